#include "clockprobe/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "clockprobe/errors.hpp"

namespace clockprobe {
namespace {

struct Problem {
  Eigen::VectorXd t;
  Eigen::VectorXd u;  // t mapped onto [-1, 1]
  Eigen::VectorXd y;
  int degree = 2;
  double t_max = 1.0;

  Eigen::MatrixXd basis(double gamma, double omega) const {
    const Eigen::Index n = t.size();
    Eigen::MatrixXd a(n, 2 + degree + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double env = std::exp(-gamma * t(i));
      a(i, 0) = env * std::cos(omega * t(i));
      a(i, 1) = env * std::sin(omega * t(i));
      double p = 1.0;
      for (int k = 0; k <= degree; ++k) {
        a(i, 2 + k) = p;
        p *= u(i);
      }
    }
    return a;
  }

  Eigen::VectorXd coefficients(double gamma, double omega) const {
    return basis(gamma, omega).colPivHouseholderQr().solve(y);
  }

  Eigen::VectorXd residual(double gamma, double omega) const {
    const Eigen::MatrixXd a = basis(gamma, omega);
    return a * a.colPivHouseholderQr().solve(y) - y;
  }
};

// Parameters are scaled by 1/t_max so that both are O(1).
struct Functor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const Problem* problem;
  int m;
  Functor(const Problem* p, int m_values) : problem(p), m(m_values) {}
  int inputs() const { return 2; }
  int values() const { return m; }

  int operator()(const InputType& x, ValueType& f) const {
    f = problem->residual(x(0) / problem->t_max, x(1) / problem->t_max);
    return 0;
  }
};

}  // namespace

double DampedSinusoidFit::amplitude() const { return std::hypot(cos_coeff, sin_coeff); }

double DampedSinusoidFit::frequency_kHz() const {
  return omega_rad_per_s / (2.0 * std::numbers::pi) * 1e-3;
}

double DampedSinusoidFit::evaluate(double t, double t_max) const {
  double v = std::exp(-gamma_per_s * t) *
             (cos_coeff * std::cos(omega_rad_per_s * t) + sin_coeff * std::sin(omega_rad_per_s * t));
  const double u = 2.0 * t / t_max - 1.0;
  double p = 1.0;
  for (double c : background) {
    v += c * p;
    p *= u;
  }
  return v;
}

DampedSinusoidFit fit_damped_sinusoid(std::span<const double> t, std::span<const double> y,
                                      int background_degree) {
  if (t.size() != y.size()) throw FitError("time and signal lengths differ");
  const auto n = static_cast<Eigen::Index>(t.size());
  if (n < 8 + background_degree) throw FitError("record too short to fit");
  if (background_degree < 0) throw FitError("background degree must be >= 0");

  Problem pb;
  pb.degree = background_degree;
  pb.t = Eigen::Map<const Eigen::VectorXd>(t.data(), n);
  pb.y = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  pb.t_max = pb.t(n - 1);
  if (!(pb.t_max > pb.t(0))) throw FitError("time axis must be increasing");
  pb.u = (2.0 / pb.t_max) * pb.t.array() - 1.0;

  // Periodogram of the detrended record on a zero-padded frequency grid.
  Eigen::MatrixXd poly(n, background_degree + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k <= background_degree; ++k, p *= pb.u(i)) poly(i, k) = p;
  }
  const Eigen::VectorXd detrended = pb.y - poly * poly.colPivHouseholderQr().solve(pb.y);
  const double span = pb.t_max - pb.t(0);
  const double dt = span / static_cast<double>(n - 1);
  const double omega_lo = 2.0 * std::numbers::pi * 1.5 / span;
  const double omega_hi = std::numbers::pi / dt;
  const double omega_step = 2.0 * std::numbers::pi / span / 8.0;
  double best_omega = omega_lo;
  double best_power = -1.0;
  for (double w = omega_lo; w < omega_hi; w += omega_step) {
    double c = 0.0;
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      c += detrended(i) * std::cos(w * pb.t(i));
      s += detrended(i) * std::sin(w * pb.t(i));
    }
    const double power = c * c + s * s;
    if (power > best_power) {
      best_power = power;
      best_omega = w;
    }
  }

  // Coarse scan of the damping rate before the local refinement.
  double best_gamma = 0.0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (double g : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double cost = pb.residual(g / span, best_omega).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best_gamma = g / span;
    }
  }

  Functor functor(&pb, static_cast<int>(n));
  Eigen::NumericalDiff<Functor> numdiff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Functor>> lm(numdiff);
  lm.parameters.xtol = 1e-12;
  lm.parameters.ftol = 1e-14;
  lm.parameters.maxfev = 2000;
  Eigen::VectorXd x(2);
  x << best_gamma * pb.t_max, best_omega * pb.t_max;
  lm.minimize(x);

  DampedSinusoidFit fit;
  fit.gamma_per_s = x(0) / pb.t_max;
  fit.omega_rad_per_s = std::abs(x(1) / pb.t_max);
  const Eigen::VectorXd coef = pb.coefficients(fit.gamma_per_s, fit.omega_rad_per_s);
  fit.cos_coeff = coef(0);
  fit.sin_coeff = coef(1);
  fit.background.assign(coef.data() + 2, coef.data() + coef.size());
  fit.residual_rms = std::sqrt(pb.residual(fit.gamma_per_s, fit.omega_rad_per_s).squaredNorm() /
                               static_cast<double>(n));
  if (fit.omega_rad_per_s < 0.5 * omega_lo) {
    std::ostringstream msg;
    msg << "fitted frequency " << fit.frequency_kHz() << " kHz is below one cycle per record";
    throw FitError(msg.str());
  }
  if (!std::isfinite(fit.amplitude()) || fit.amplitude() < 5.0 * fit.residual_rms) {
    std::ostringstream msg;
    msg << "oscillation amplitude " << fit.amplitude() << " is below 5x the residual rms "
        << fit.residual_rms;
    throw FitError(msg.str());
  }
  return fit;
}

double rabi_frequency_kHz(const SimRecord& record) {
  return fit_damped_sinusoid(record.times_s, record.s3).frequency_kHz();
}

double decay_time_s(const SimRecord& record) {
  const DampedSinusoidFit fit = fit_damped_sinusoid(record.times_s, record.signal_rad);
  if (!(fit.gamma_per_s > 0.0)) throw FitError("fitted envelope does not decay");
  return 1.0 / fit.gamma_per_s;
}

}  // namespace clockprobe
