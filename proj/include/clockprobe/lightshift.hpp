#pragma once

#include <optional>
#include <vector>

#include "clockprobe/atom_model.hpp"
#include "clockprobe/operators.hpp"

namespace clockprobe {

// Probe detuning is measured from the F=4 -> F'=4 resonance; the F=4 -> F'=3
// line then sits at -excited_hf_splitting_MHz. Propagation is along y.
struct ProbeConfig {
  double detuning_MHz = -335.0;
  double irradiance_rel = 16.0;  // I / I_sat
  double polarization_angle_deg = 45.0;  // from z toward x

  // Throws ConfigError.
  void validate() const;
};

// Amplitudes of a polarization vector on the spherical basis e_q
// (e_{+1} = -(x + i y)/sqrt2, e_0 = z, e_{-1} = (x - i y)/sqrt2).
struct Polarization {
  Complex minus{0.0, 0.0};
  Complex pi{1.0, 0.0};
  Complex plus{0.0, 0.0};

  Complex component(int q) const { return q < 0 ? minus : (q == 0 ? pi : plus); }

  // Linear, in the x-z plane, at theta_deg from z.
  static Polarization linear(double theta_deg);
  // Circular about the propagation axis y; helicity +1 or -1.
  static Polarization circular(int helicity);
};

struct LightShiftOperator {
  Operator total;
  Operator scalar_part;
  Operator vector_part;
  Operator tensor_part;
  // F=4 block projected on {1, F_z^2}: xi0 is the identity coefficient, xi2
  // the F_z^2 coefficient; xi1 is the F_y coefficient under circular light of
  // the same irradiance. All in MHz.
  double xi0_MHz = 0.0;
  double xi1_MHz = 0.0;
  double xi2_MHz = 0.0;
};

// Position of the gF -> eF resonance in probe-detuning coordinates (MHz).
double resonance_position_MHz(int ground_f, int excited_f, const CsD1Constants& atom);
// Probe detuning from the gF -> eF resonance.
double transition_detuning_MHz(double probe_detuning_MHz, int ground_f, int excited_f,
                               const CsD1Constants& atom);
// Throws ResonanceError when the probe lies within min_distance_MHz of any
// line (default 0.1 Gamma).
void check_off_resonance(double probe_detuning_MHz, const CsD1Constants& atom,
                         double min_distance_MHz = -1.0);

// Complex absorption amplitude <e| d.eps |g> in units of <J'||d||J>.
Complex absorption_amplitude(int excited_f, int excited_m, int ground_f, int ground_m,
                             const Polarization& eps);

LightShiftOperator build_light_shift(const ProbeConfig& probe, const CsD1Constants& atom);
LightShiftOperator build_light_shift(double detuning_MHz, double irradiance_rel,
                                     const Polarization& eps, const CsD1Constants& atom);

// Rank-k irreducible part of the F block of an operator.
Operator irreducible_part(const Operator& a, int f, int rank);

// <4,0|V|4,0> - <3,0|V|3,0> in kHz.
double differential_clock_shift_kHz(const ProbeConfig& probe, const CsD1Constants& atom);
// Clock splitting shift (kHz) between the eigenstates of Zeeman + light shift
// that overlap most with |4,0> and |3,0>. Includes the second-order shift from
// light-shift couplings to the Zeeman-split neighbours.
double dressed_clock_shift_kHz(const ProbeConfig& probe, const CsD1Constants& atom,
                               double bias_field_G);

struct DetuningWindow {
  double lo_MHz = 0.0;
  double hi_MHz = 0.0;
};
// Between the F=4 -> F'=3 and F=4 -> F'=4 lines.
DetuningWindow upper_window(const CsD1Constants& atom);
// Between the F=3 -> F'=3 and F=3 -> F'=4 lines.
DetuningWindow lower_window(const CsD1Constants& atom);

struct MagicPoint {
  double detuning_MHz = 0.0;
  double polarization_angle_deg = 0.0;
  double residual_dU_kHz = 0.0;
};

// All zeros of the differential clock shift inside the open window, sorted.
// A 1 MHz scan brackets sign changes, bisection refines to |dU| < 1 Hz.
std::vector<MagicPoint> find_magic_detunings(double theta_deg, DetuningWindow window,
                                             const CsD1Constants& atom);

// Largest light-shift coupling from |F,0> to |F,m != 0> that survives the
// secular average at the given bias field (kHz). A coupling V across a Zeeman
// gap dE is averaged out when |dE| > 10 |V|.
double tensor_fz2_check(const ProbeConfig& probe, const CsD1Constants& atom,
                        double bias_field_G);

struct TwoColorPoint {
  double detuning_lower_MHz = 0.0;  // component between the F=3 -> F' lines
  double detuning_upper_MHz = 0.0;  // component between the F=4 -> F' lines
  double power_ratio = 0.0;         // P_lower / P_upper
  // Phases per unit OD for an equal clock mixture.
  double phase_lower_rad = 0.0;
  double phase_upper_rad = 0.0;
  bool lower_is_magic = false;
  bool upper_is_magic = false;

  // Power-weighted phase for the given clock populations (per unit OD).
  double total_phase(double p_up, double p_down, const CsD1Constants& atom) const;
};

// Throws std::domain_error when the two components cannot be balanced.
TwoColorPoint two_color_balance(DetuningWindow window_lower, DetuningWindow window_upper,
                                double theta_deg, const CsD1Constants& atom);


// True within mask_MHz of any F -> F' line.
bool is_masked(double detuning_MHz, const CsD1Constants& atom, double mask_MHz);
// Uniform grid over [lo, hi] with masked points removed.
std::vector<double> detuning_grid(DetuningWindow window, double step_MHz, double mask_MHz,
                                  const CsD1Constants& atom);

}  // namespace clockprobe
