#include "clockprobe/lightshift.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "clockprobe/angular_momentum.hpp"
#include "clockprobe/errors.hpp"

namespace clockprobe {

ResonanceError::ResonanceError(int ground_f, int excited_f, double distance_MHz)
    : std::domain_error("probe within " + std::to_string(std::abs(distance_MHz)) +
                        " MHz of the F=" + std::to_string(ground_f) + " -> F'=" +
                        std::to_string(excited_f) + " resonance"),
      ground_f_(ground_f),
      excited_f_(excited_f),
      distance_MHz_(distance_MHz) {}

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

int block_offset(int f) { return f == 3 ? 0 : 7; }

// Unit-irradiance light-shift operator, no decomposition.
Operator raw_light_shift(double detuning_MHz, double irradiance_rel, const Polarization& eps,
                         const CsD1Constants& atom) {
  check_off_resonance(detuning_MHz, atom);
  // Gamma^2/(8 Delta) * I/I_sat per unit isotropic strength; 6|d|^2 is that strength.
  const double k = atom.gamma_MHz * atom.gamma_MHz / 8.0 * irradiance_rel * 6.0;
  Operator v = Operator::Zero();
  for (int f : {3, 4}) {
    const int off = block_offset(f);
    const int dim = 2 * f + 1;
    for (int fe : {3, 4}) {
      const double delta = transition_detuning_MHz(detuning_MHz, f, fe, atom);
      for (int me = -fe; me <= fe; ++me) {
        Eigen::VectorXcd a(dim);
        for (int m = -f; m <= f; ++m) a(m + f) = absorption_amplitude(fe, me, f, m, eps);
        v.block(off, off, dim, dim) += (k / delta) * (a.conjugate() * a.transpose());
      }
    }
  }
  return v;
}

// <F m| T^k_q |F m'> = (-1)^(F-m) sqrt(2k+1) (F k F; -m q m'), orthonormal
// under the Hilbert-Schmidt product.
Operator spherical_tensor(int f, int rank, int q) {
  Operator t = Operator::Zero();
  const int off = block_offset(f);
  const HalfInt hf = HalfInt::integer(f);
  for (int m = -f; m <= f; ++m) {
    const int mp = m - q;
    if (std::abs(mp) > f) continue;
    double c = std::sqrt(2.0 * rank + 1.0) *
               wigner3j(hf, HalfInt::integer(rank), hf, HalfInt::integer(-m),
                        HalfInt::integer(q), HalfInt::integer(mp));
    if ((f - m) % 2 != 0) c = -c;
    t(off + m + f, off + mp + f) = c;
  }
  return t;
}

bool near_resonance(double detuning_MHz, const CsD1Constants& atom, double min_distance) {
  for (int f : {3, 4})
    for (int fe : {3, 4})
      if (std::abs(transition_detuning_MHz(detuning_MHz, f, fe, atom)) <= min_distance)
        return true;
  return false;
}

double clock_shift_MHz(int f, double detuning_MHz, const Polarization& eps,
                       const CsD1Constants& atom) {
  const double k = atom.gamma_MHz * atom.gamma_MHz / 8.0 * 6.0;
  double u = 0.0;
  for (int fe : {3, 4}) {
    const double delta = transition_detuning_MHz(detuning_MHz, f, fe, atom);
    for (int q = -1; q <= 1; ++q) u += std::norm(absorption_amplitude(fe, q, f, 0, eps)) / delta;
  }
  return k * u;
}

}  // namespace

void ProbeConfig::validate() const {
  if (!(irradiance_rel > 0)) throw ConfigError("probe irradiance_rel must be > 0");
  if (!(polarization_angle_deg >= 0.0 && polarization_angle_deg < 180.0))
    throw ConfigError("probe polarization_angle_deg must lie in [0, 180)");
  if (!std::isfinite(detuning_MHz)) throw ConfigError("probe detuning must be finite");
}

Polarization Polarization::linear(double theta_deg) {
  const double s = std::sin(theta_deg * kDegree);
  const double c = std::cos(theta_deg * kDegree);
  return {Complex(s / std::numbers::sqrt2, 0.0), Complex(c, 0.0),
          Complex(-s / std::numbers::sqrt2, 0.0)};
}

Polarization Polarization::circular(int helicity) {
  const double h = helicity >= 0 ? 1.0 : -1.0;
  return {Complex(0.0, 0.5 * h), Complex(1.0 / std::numbers::sqrt2, 0.0), Complex(0.0, -0.5 * h)};
}

double resonance_position_MHz(int ground_f, int excited_f, const CsD1Constants& atom) {
  double pos = excited_f == 3 ? -atom.excited_hf_splitting_MHz : 0.0;
  if (ground_f == 3) pos += atom.ground_hf_splitting_MHz;
  return pos;
}

double transition_detuning_MHz(double probe_detuning_MHz, int ground_f, int excited_f,
                               const CsD1Constants& atom) {
  return probe_detuning_MHz - resonance_position_MHz(ground_f, excited_f, atom);
}

void check_off_resonance(double probe_detuning_MHz, const CsD1Constants& atom,
                         double min_distance_MHz) {
  if (min_distance_MHz < 0) min_distance_MHz = 0.1 * atom.gamma_MHz;
  for (int f : {3, 4})
    for (int fe : {3, 4}) {
      const double d = transition_detuning_MHz(probe_detuning_MHz, f, fe, atom);
      if (std::abs(d) <= min_distance_MHz) throw ResonanceError(f, fe, d);
    }
}

Complex absorption_amplitude(int excited_f, int excited_m, int ground_f, int ground_m,
                             const Polarization& eps) {
  const int q = excited_m - ground_m;
  if (std::abs(q) > 1) return {0.0, 0.0};
  return eps.component(q) * dipole_amplitude(ground_f, ground_m, excited_f, excited_m, q);
}

Operator irreducible_part(const Operator& a, int f, int rank) {
  Operator out = Operator::Zero();
  for (int q = -rank; q <= rank; ++q) {
    const Operator t = spherical_tensor(f, rank, q);
    out += hs_inner(t, a) * t;
  }
  return out;
}

LightShiftOperator build_light_shift(double detuning_MHz, double irradiance_rel,
                                     const Polarization& eps, const CsD1Constants& atom) {
  LightShiftOperator ls;
  ls.total = raw_light_shift(detuning_MHz, irradiance_rel, eps, atom);
  ls.scalar_part = Operator::Zero();
  ls.vector_part = Operator::Zero();
  ls.tensor_part = Operator::Zero();
  for (int f : {3, 4}) {
    ls.scalar_part += irreducible_part(ls.total, f, 0);
    ls.vector_part += irreducible_part(ls.total, f, 1);
    ls.tensor_part += irreducible_part(ls.total, f, 2);
  }

  // Least squares of the F=4 block on {1, F_z^2}.
  const Operator one = block_projector(4);
  const Operator fz = spin_z(4);
  const Operator fz2 = fz * fz;
  Eigen::Matrix2d gram;
  gram << hs_inner(one, one).real(), hs_inner(one, fz2).real(), hs_inner(fz2, one).real(),
      hs_inner(fz2, fz2).real();
  const Eigen::Vector2d rhs(hs_inner(one, ls.total).real(), hs_inner(fz2, ls.total).real());
  const Eigen::Vector2d coef = gram.ldlt().solve(rhs);
  ls.xi0_MHz = coef(0);
  ls.xi2_MHz = coef(1);

  const Operator circ =
      raw_light_shift(detuning_MHz, irradiance_rel, Polarization::circular(+1), atom);
  const Operator fy = spin_y(4);
  ls.xi1_MHz = hs_inner(fy, irreducible_part(circ, 4, 1)).real() / hs_inner(fy, fy).real();
  return ls;
}

LightShiftOperator build_light_shift(const ProbeConfig& probe, const CsD1Constants& atom) {
  probe.validate();
  return build_light_shift(probe.detuning_MHz, probe.irradiance_rel,
                           Polarization::linear(probe.polarization_angle_deg), atom);
}

double differential_clock_shift_kHz(const ProbeConfig& probe, const CsD1Constants& atom) {
  check_off_resonance(probe.detuning_MHz, atom);
  const Polarization eps = Polarization::linear(probe.polarization_angle_deg);
  const double du = clock_shift_MHz(4, probe.detuning_MHz, eps, atom) -
                    clock_shift_MHz(3, probe.detuning_MHz, eps, atom);
  return 1e3 * probe.irradiance_rel * du;
}

double dressed_clock_shift_kHz(const ProbeConfig& probe, const CsD1Constants& atom,
                               double bias_field_G) {
  const Operator h = zeeman_hamiltonian(bias_field_G, atom) + build_light_shift(probe, atom).total;
  const Eigen::SelfAdjointEigenSolver<Operator> es(h);
  const auto energy_of = [&](std::size_t bare) {
    Eigen::Index k = 0;
    es.eigenvectors().row(static_cast<Eigen::Index>(bare)).cwiseAbs2().maxCoeff(&k);
    return es.eigenvalues()(k);
  };
  return 1e3 * (energy_of(kClockUp) - energy_of(kClockDown));
}

DetuningWindow upper_window(const CsD1Constants& atom) {
  return {resonance_position_MHz(4, 3, atom), resonance_position_MHz(4, 4, atom)};
}

DetuningWindow lower_window(const CsD1Constants& atom) {
  return {resonance_position_MHz(3, 3, atom), resonance_position_MHz(3, 4, atom)};
}

std::vector<MagicPoint> find_magic_detunings(double theta_deg, DetuningWindow window,
                                             const CsD1Constants& atom) {
  if (!(window.lo_MHz < window.hi_MHz)) throw std::invalid_argument("empty detuning window");
  const Polarization eps = Polarization::linear(theta_deg);
  const double exclusion = 0.1 * atom.gamma_MHz;
  const auto du = [&](double d) {
    return 1e3 * (clock_shift_MHz(4, d, eps, atom) - clock_shift_MHz(3, d, eps, atom));
  };

  std::vector<MagicPoint> roots;
  constexpr double kStep = 1.0;
  bool have_prev = false;
  double prev_x = 0.0, prev_y = 0.0;
  for (double x = window.lo_MHz + kStep; x < window.hi_MHz; x += kStep) {
    if (near_resonance(x, atom, exclusion)) {
      have_prev = false;
      continue;
    }
    const double y = du(x);
    if (have_prev && ((prev_y < 0) != (y < 0))) {
      double a = prev_x, b = x, fa = prev_y;
      double mid = 0.5 * (a + b), fm = du(mid);
      while (b - a > 1e-10 && (std::abs(fm) >= 1e-3 || b - a > 0.1)) {
        if ((fa < 0) == (fm < 0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
        mid = 0.5 * (a + b);
        fm = du(mid);
      }
      // A pole shows up as a bracket that never converges in value.
      if (std::abs(fm) < 1e-3) roots.push_back({mid, theta_deg, fm});
    }
    prev_x = x;
    prev_y = y;
    have_prev = true;
  }
  std::sort(roots.begin(), roots.end(),
            [](const MagicPoint& l, const MagicPoint& r) { return l.detuning_MHz < r.detuning_MHz; });
  return roots;
}

double tensor_fz2_check(const ProbeConfig& probe, const CsD1Constants& atom,
                        double bias_field_G) {
  const LightShiftOperator ls = build_light_shift(probe, atom);
  const Operator h = zeeman_hamiltonian(bias_field_G, atom) + ls.total;
  double worst = 0.0;
  for (int f : {3, 4}) {
    const int off = block_offset(f);
    const int zero = off + f;
    for (int m = -f; m <= f; ++m) {
      if (m == 0) continue;
      const int k = off + m + f;
      const double coupling = std::abs(h(zero, k));
      const double gap = std::abs((h(k, k) - h(zero, zero)).real());
      if (gap > 10.0 * coupling) continue;
      worst = std::max(worst, coupling);
    }
  }
  return 1e3 * worst;
}


bool is_masked(double detuning_MHz, const CsD1Constants& atom, double mask_MHz) {
  return near_resonance(detuning_MHz, atom, mask_MHz);
}

std::vector<double> detuning_grid(DetuningWindow window, double step_MHz, double mask_MHz,
                                  const CsD1Constants& atom) {
  if (!(step_MHz > 0)) throw std::invalid_argument("grid step must be positive");
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor((window.hi_MHz - window.lo_MHz) / step_MHz + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double d = window.lo_MHz + static_cast<double>(k) * step_MHz;
    if (!is_masked(d, atom, mask_MHz)) grid.push_back(d);
  }
  return grid;
}

}  // namespace clockprobe
