#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "clockprobe/atom_model.hpp"
#include "clockprobe/lightshift.hpp"
#include "clockprobe/operators.hpp"

namespace clockprobe {

struct MicrowaveConfig {
  double rabi_kHz = 5.0;      // clock-transition Rabi frequency chi
  double detuning_kHz = 0.0;  // drive minus unshifted clock frequency
  double inhomogeneity_frac = 0.0;

  void validate() const;
};

struct DensityMatrix {
  Operator rho = Operator::Zero();
  double lost_population = 0.0;

  static DensityMatrix pure(GroundState s);
  // Throws std::invalid_argument unless populations are >= 0 and sum to 1.
  static DensityMatrix diagonal(const std::array<double, kNumGroundStates>& populations);

  double total() const { return rho.trace().real() + lost_population; }
};

// Dissipator rate * D[op]. op is scaled so the largest diagonal of op^dagger op is 1.
struct JumpOperator {
  Operator op;
  double rate_per_s = 0.0;
};

// Probe-induced optical pumping with the excited manifold adiabatically
// eliminated, one operator per (emitted q, source F, destination F).
std::vector<JumpOperator> pumping_jump_operators(const ProbeConfig& probe,
                                                 const CsD1Constants& atom);
// Total photon scattering rate out of one sublevel.
double scattering_rate(const std::vector<JumpOperator>& jumps, std::size_t state_index);
// Scattering rate for an equal mixture of |3,0> and |4,0>.
double reference_scattering_rate(const std::vector<JumpOperator>& jumps);
// Probe irradiance (I/I_sat) that gives the requested reference scattering rate.
double irradiance_for_scattering_rate(double detuning_MHz, double theta_deg,
                                      const CsD1Constants& atom, double target_per_s);

// Relative pi-transition magnetic dipole element |3,m> <-> |4,m>, 1 at m = 0.
double microwave_matrix_element(int m);

// Rotating-frame Hamiltonian in MHz: Zeeman + probe light shift + microwave
// drive (RWA), with the F=4 block shifted by -detuning.
Operator build_hamiltonian(const std::optional<ProbeConfig>& probe, const MicrowaveConfig& mw,
                           double bias_field_G, const CsD1Constants& atom);

struct TimeGrid {
  double t_end_s = 5e-3;
  double dt_s = 2e-9;
  int output_stride = 4096;  // integration steps per recorded sample

  double sample_dt() const { return dt_s * output_stride; }
  // Sample spacing near sample_dt_s with an integer power-of-two stride so
  // that dt_s <= max_dt_s.
  static TimeGrid make(double t_end_s, double sample_dt_s, double max_dt_s);
  TimeGrid halved() const { return {t_end_s, 0.5 * dt_s, 2 * output_stride}; }
};

struct SimRecord {
  std::vector<double> times_s;
  std::vector<double> signal_rad;
  std::vector<double> s3;  // per atom: p(4,0) - p(3,0)
  std::vector<std::array<double, kNumGroundStates>> populations;
  std::vector<double> lost;

  std::size_t size() const { return times_s.size(); }
  double population_f3(std::size_t i) const;
  double population_f4(std::size_t i) const;
};

struct EvolveOptions {
  bool check_invariants = true;
  // Called with every recorded state.
  std::function<void(double t, const DensityMatrix&)> observer;
};

// Largest rate (rad/s or 1/s) the integrator must resolve.
double fastest_rate(const Operator& hamiltonian_MHz, const std::vector<JumpOperator>& jumps,
                    double extra_loss_rate);

// Fixed-step RK4 integration of the Lindblad equation
//   d rho/dt = -i[H, rho] + sum_k rate_k D[A_k] rho - (gamma/2){P_clock, rho},
// with the removed clock population accumulated in lost_population.
// signal_rad = sum_k p_k * state_phases[k].
// Throws IntegrationError if dt > 0.01 / fastest_rate or if trace or
// positivity drift beyond 1e-6.
SimRecord evolve(const DensityMatrix& rho0, const Operator& hamiltonian_MHz,
                 const std::vector<JumpOperator>& jumps, double extra_loss_rate_per_s,
                 const TimeGrid& grid, const std::array<double, kNumGroundStates>& state_phases,
                 const EvolveOptions& options = {});

// Everything needed for one evolution of the cloud.
struct ExperimentSpec {
  CsD1Constants atom;
  CloudConfig cloud;
  std::optional<ProbeConfig> probe = ProbeConfig{};
  MicrowaveConfig mw;
  bool pumping = true;
  double extra_loss_rate_per_s = 0.0;
  TimeGrid grid;
  DensityMatrix initial = DensityMatrix::pure(GroundState::of(3, 0));
};

// Time grid with ~8 us sampling and the largest power-of-two dt allowed by
// the experiment's fastest rate.
TimeGrid default_grid(const ExperimentSpec& spec, double t_end_s, double sample_dt_s = 8e-6);

SimRecord simulate(const ExperimentSpec& spec, const EvolveOptions& options = {});

// Largest population found outside the two dressed clock states during the
// evolution. The dressed states are the eigenvectors of Zeeman + light shift
// with the largest overlap on |3,0> and |4,0>.
double max_dressed_leakage(const ExperimentSpec& spec);

}  // namespace clockprobe
