#include "clockprobe/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "clockprobe/angular_momentum.hpp"
#include "clockprobe/birefringence.hpp"
#include "clockprobe/errors.hpp"

namespace clockprobe {
namespace {

constexpr int kDim = kNumGroundStates;
constexpr int kVecDim = kDim * kDim + 1;  // vec(rho) plus the lost reservoir
constexpr int kLostIndex = kDim * kDim;

using Liouvillian = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

double angular_per_s(double mhz) { return 2.0 * std::numbers::pi * 1e6 * mhz; }

int block_offset(int f) { return f == 3 ? 0 : 7; }

Liouvillian build_liouvillian(const Operator& hamiltonian_MHz,
                              const std::vector<JumpOperator>& jumps, double loss_rate) {
  const Complex i(0.0, 1.0);
  Operator decay = Operator::Zero();
  for (const auto& j : jumps) decay += j.rate_per_s * (j.op.adjoint() * j.op);
  for (std::size_t k : {kClockDown, kClockUp}) decay(k, k) += loss_rate;
  const Operator heff = hamiltonian_MHz.unaryExpr([](Complex z) { return z * angular_per_s(1.0); }) -
                        0.5 * i * decay;

  Liouvillian l = Liouvillian::Zero(kVecDim, kVecDim);
  const auto vi = [](int r, int c) { return r + kDim * c; };
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int k = 0; k < kDim; ++k) {
        // -i Heff rho + i rho Heff^dagger
        l(vi(a, b), vi(k, b)) += -i * heff(a, k);
        l(vi(a, b), vi(a, k)) += i * std::conj(heff(b, k));
      }
  for (const auto& j : jumps) {
    const Operator& op = j.op;
    for (int a = 0; a < kDim; ++a)
      for (int k = 0; k < kDim; ++k) {
        const Complex left = j.rate_per_s * op(a, k);
        if (left == Complex(0.0)) continue;
        for (int b = 0; b < kDim; ++b)
          for (int c = 0; c < kDim; ++c) {
            const Complex right = std::conj(op(b, c));
            if (right == Complex(0.0)) continue;
            l(vi(a, b), vi(k, c)) += left * right;
          }
      }
  }
  for (std::size_t k : {kClockDown, kClockUp})
    l(kLostIndex, vi(static_cast<int>(k), static_cast<int>(k))) += loss_rate;
  return l;
}

// RK4 step for a linear time-invariant system: 1 + X + X^2/2 + X^3/6 + X^4/24.
Liouvillian rk4_step_matrix(const Liouvillian& l, double dt) {
  const Liouvillian x = l * dt;
  const Liouvillian id = Liouvillian::Identity(kVecDim, kVecDim);
  Liouvillian t = id / 6.0 + x / 24.0;
  t = id / 2.0 + x * t;
  t = id + x * t;
  return id + x * t;
}

Liouvillian matrix_power(Liouvillian base, int n) {
  Liouvillian result = Liouvillian::Identity(kVecDim, kVecDim);
  bool first = true;
  while (n > 0) {
    if (n & 1) {
      result = first ? base : Liouvillian(base * result);
      first = false;
    }
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

StateVector to_vector(const DensityMatrix& dm) {
  StateVector v(kVecDim);
  for (int c = 0; c < kDim; ++c)
    for (int r = 0; r < kDim; ++r) v(r + kDim * c) = dm.rho(r, c);
  v(kLostIndex) = dm.lost_population;
  return v;
}

DensityMatrix from_vector(const StateVector& v) {
  DensityMatrix dm;
  for (int c = 0; c < kDim; ++c)
    for (int r = 0; r < kDim; ++r) dm.rho(r, c) = v(r + kDim * c);
  dm.lost_population = v(kLostIndex).real();
  return dm;
}

}  // namespace

void MicrowaveConfig::validate() const {
  if (!(rabi_kHz >= 0)) throw ConfigError("microwave rabi_kHz must be >= 0");
  if (!(inhomogeneity_frac >= 0)) throw ConfigError("microwave inhomogeneity_frac must be >= 0");
  if (!std::isfinite(detuning_kHz)) throw ConfigError("microwave detuning must be finite");
}

DensityMatrix DensityMatrix::pure(GroundState s) {
  DensityMatrix dm;
  const std::size_t k = index_of(s);
  dm.rho(k, k) = 1.0;
  return dm;
}

DensityMatrix DensityMatrix::diagonal(const std::array<double, kNumGroundStates>& populations) {
  double sum = 0.0;
  for (double p : populations) {
    if (p < 0) throw std::invalid_argument("negative population");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("populations must sum to 1");
  DensityMatrix dm;
  for (int k = 0; k < kNumGroundStates; ++k) dm.rho(k, k) = populations[k];
  return dm;
}

std::vector<JumpOperator> pumping_jump_operators(const ProbeConfig& probe,
                                                 const CsD1Constants& atom) {
  probe.validate();
  check_off_resonance(probe.detuning_MHz, atom);
  const Polarization eps = Polarization::linear(probe.polarization_angle_deg);
  const double gamma_rate = angular_per_s(atom.gamma_MHz);
  // Half Rabi frequency over Gamma per unit absorption amplitude.
  const double drive = 0.5 * std::sqrt(3.0 * probe.irradiance_rel);

  std::vector<JumpOperator> jumps;
  for (int q = -1; q <= 1; ++q)
    for (int fs : {3, 4})
      for (int fd : {3, 4}) {
        Operator a = Operator::Zero();
        for (int fe : {3, 4}) {
          const double ratio = atom.gamma_MHz / transition_detuning_MHz(probe.detuning_MHz, fs, fe, atom);
          for (int me = -fe; me <= fe; ++me) {
            const int md = me - q;
            if (std::abs(md) > fd) continue;
            // Each excited sublevel decays with total branching 1.
            const double emit = std::numbers::sqrt2 * dipole_amplitude(fd, md, fe, me, q);
            if (emit == 0.0) continue;
            for (int ms = -fs; ms <= fs; ++ms) {
              const Complex absorb = absorption_amplitude(fe, me, fs, ms, eps);
              if (absorb == Complex(0.0)) continue;
              a(block_offset(fd) + md + fd, block_offset(fs) + ms + fs) +=
                  emit * drive * ratio * absorb;
            }
          }
        }
        const double scale = (a.adjoint() * a).diagonal().real().maxCoeff();
        if (scale <= 0.0) continue;
        jumps.push_back({a / std::sqrt(scale), gamma_rate * scale});
      }
  return jumps;
}

double scattering_rate(const std::vector<JumpOperator>& jumps, std::size_t state_index) {
  double r = 0.0;
  for (const auto& j : jumps)
    r += j.rate_per_s * (j.op.adjoint() * j.op)(state_index, state_index).real();
  return r;
}

double reference_scattering_rate(const std::vector<JumpOperator>& jumps) {
  return 0.5 * (scattering_rate(jumps, kClockDown) + scattering_rate(jumps, kClockUp));
}

double irradiance_for_scattering_rate(double detuning_MHz, double theta_deg,
                                      const CsD1Constants& atom, double target_per_s) {
  if (!(target_per_s > 0)) throw std::invalid_argument("target scattering rate must be > 0");
  const ProbeConfig unit{detuning_MHz, 1.0, theta_deg};
  return target_per_s / reference_scattering_rate(pumping_jump_operators(unit, atom));
}

double microwave_matrix_element(int m) {
  if (std::abs(m) > 3) return 0.0;
  const auto element = [](int mm) {
    double v = wigner3j(HalfInt::integer(4), HalfInt::integer(1), HalfInt::integer(3),
                        HalfInt::integer(-mm), HalfInt::integer(0), HalfInt::integer(mm));
    return (4 - mm) % 2 == 0 ? v : -v;
  };
  return element(m) / element(0);
}

Operator build_hamiltonian(const std::optional<ProbeConfig>& probe, const MicrowaveConfig& mw,
                           double bias_field_G, const CsD1Constants& atom) {
  mw.validate();
  Operator h = zeeman_hamiltonian(bias_field_G, atom);
  if (probe) h += build_light_shift(*probe, atom).total;
  const double half_rabi = 0.5 * mw.rabi_kHz * 1e-3;
  for (int m = -3; m <= 3; ++m) {
    const std::size_t up = index_of(4, m);
    const std::size_t down = index_of(3, m);
    h(up, down) += half_rabi * microwave_matrix_element(m);
    h(down, up) += half_rabi * microwave_matrix_element(m);
  }
  h -= (mw.detuning_kHz * 1e-3) * block_projector(4);
  return h;
}

TimeGrid TimeGrid::make(double t_end_s, double sample_dt_s, double max_dt_s) {
  if (!(t_end_s > 0) || !(sample_dt_s > 0) || !(max_dt_s > 0))
    throw std::invalid_argument("time grid needs positive t_end, sample and step sizes");
  int stride = 1;
  while (sample_dt_s / stride > max_dt_s) stride *= 2;
  return {t_end_s, sample_dt_s / stride, stride};
}

double SimRecord::population_f3(std::size_t i) const {
  double s = 0.0;
  for (int k = 0; k < 7; ++k) s += populations[i][k];
  return s;
}

double SimRecord::population_f4(std::size_t i) const {
  double s = 0.0;
  for (int k = 7; k < kNumGroundStates; ++k) s += populations[i][k];
  return s;
}

double fastest_rate(const Operator& hamiltonian_MHz, const std::vector<JumpOperator>& jumps,
                    double extra_loss_rate) {
  double fastest = angular_per_s(hamiltonian_MHz.cwiseAbs().maxCoeff());
  for (const auto& j : jumps) fastest = std::max(fastest, j.rate_per_s);
  return std::max(fastest, extra_loss_rate);
}

SimRecord evolve(const DensityMatrix& rho0, const Operator& hamiltonian_MHz,
                 const std::vector<JumpOperator>& jumps, double extra_loss_rate_per_s,
                 const TimeGrid& grid, const std::array<double, kNumGroundStates>& state_phases,
                 const EvolveOptions& options) {
  if (!(grid.dt_s > 0) || grid.output_stride < 1 || !(grid.t_end_s > 0))
    throw IntegrationError("invalid time grid");
  if (extra_loss_rate_per_s < 0) throw IntegrationError("extra loss rate must be >= 0");
  const double fastest = fastest_rate(hamiltonian_MHz, jumps, extra_loss_rate_per_s);
  if (grid.dt_s > 0.01 / fastest) {
    std::ostringstream msg;
    msg << "step " << grid.dt_s << " s does not resolve the fastest rate " << fastest
        << " /s (need dt <= " << 0.01 / fastest << " s)";
    throw IntegrationError(msg.str());
  }

  const Liouvillian l = build_liouvillian(hamiltonian_MHz, jumps, extra_loss_rate_per_s);
  const Liouvillian propagator = matrix_power(rk4_step_matrix(l, grid.dt_s), grid.output_stride);

  const double initial_total = rho0.total();
  const auto n_samples =
      static_cast<std::size_t>(std::floor(grid.t_end_s / grid.sample_dt() + 1e-9)) + 1;

  SimRecord rec;
  rec.times_s.reserve(n_samples);
  StateVector v = to_vector(rho0);
  for (std::size_t n = 0; n < n_samples; ++n) {
    if (n > 0) v = propagator * v;
    const double t = static_cast<double>(n) * grid.sample_dt();
    const DensityMatrix dm = from_vector(v);

    std::array<double, kNumGroundStates> pops{};
    double signal = 0.0;
    for (int k = 0; k < kNumGroundStates; ++k) {
      pops[k] = dm.rho(k, k).real();
      signal += pops[k] * state_phases[k];
    }
    if (options.check_invariants) {
      const double drift = std::abs(dm.total() - initial_total);
      const double min_eig =
          Eigen::SelfAdjointEigenSolver<Operator>(0.5 * (dm.rho + dm.rho.adjoint()),
                                                  Eigen::EigenvaluesOnly)
              .eigenvalues()
              .minCoeff();
      if (drift > 1e-6 || min_eig < -1e-6) {
        std::ostringstream msg;
        msg << "invariant violated at t=" << t << " s: trace drift " << drift
            << ", min eigenvalue " << min_eig;
        throw IntegrationError(msg.str());
      }
    }
    if (options.observer) options.observer(t, dm);

    rec.times_s.push_back(t);
    rec.signal_rad.push_back(signal);
    rec.s3.push_back(pops[kClockUp] - pops[kClockDown]);
    rec.populations.push_back(pops);
    rec.lost.push_back(dm.lost_population);
  }
  return rec;
}

namespace {

struct Assembled {
  Operator hamiltonian;
  std::vector<JumpOperator> jumps;
  std::array<double, kNumGroundStates> phases{};
};

Assembled assemble(const ExperimentSpec& spec) {
  Assembled a;
  a.hamiltonian = build_hamiltonian(spec.probe, spec.mw, spec.cloud.bias_field_G, spec.atom);
  if (spec.probe) {
    if (spec.pumping) a.jumps = pumping_jump_operators(*spec.probe, spec.atom);
    a.phases = manifold_phases(spec.probe->detuning_MHz, spec.atom, spec.cloud.od_resonant);
  }
  return a;
}

}  // namespace

TimeGrid default_grid(const ExperimentSpec& spec, double t_end_s, double sample_dt_s) {
  const Assembled a = assemble(spec);
  const double fastest = fastest_rate(a.hamiltonian, a.jumps, spec.extra_loss_rate_per_s);
  return TimeGrid::make(t_end_s, sample_dt_s, 0.01 / std::max(fastest, 1.0));
}

SimRecord simulate(const ExperimentSpec& spec, const EvolveOptions& options) {
  const Assembled a = assemble(spec);
  return evolve(spec.initial, a.hamiltonian, a.jumps, spec.extra_loss_rate_per_s, spec.grid,
                a.phases, options);
}

double max_dressed_leakage(const ExperimentSpec& spec) {
  Operator h0 = zeeman_hamiltonian(spec.cloud.bias_field_G, spec.atom);
  if (spec.probe) h0 += build_light_shift(*spec.probe, spec.atom).total;
  const Eigen::SelfAdjointEigenSolver<Operator> es(h0);
  const auto dressed = [&](std::size_t bare) {
    Eigen::Index k = 0;
    es.eigenvectors().row(static_cast<Eigen::Index>(bare)).cwiseAbs2().maxCoeff(&k);
    return Eigen::Matrix<Complex, kNumGroundStates, 1>(es.eigenvectors().col(k));
  };
  const auto up = dressed(kClockUp);
  const auto down = dressed(kClockDown);

  double worst = 0.0;
  EvolveOptions options;
  options.observer = [&](double, const DensityMatrix& dm) {
    const double inside = (up.adjoint() * dm.rho * up)(0, 0).real() +
                          (down.adjoint() * dm.rho * down)(0, 0).real();
    worst = std::max(worst, dm.rho.trace().real() - inside);
  };
  simulate(spec, options);
  return worst;
}

}  // namespace clockprobe
