#pragma once

#include <span>
#include <vector>

#include "clockprobe/dynamics.hpp"

namespace clockprobe {

// y(t) = exp(-gamma t) (a cos(omega t) + b sin(omega t)) + polynomial(t)
struct DampedSinusoidFit {
  double omega_rad_per_s = 0.0;
  double gamma_per_s = 0.0;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
  std::vector<double> background;  // coefficients in u = 2 t / t_max - 1
  double residual_rms = 0.0;

  double amplitude() const;
  double frequency_kHz() const;
  double evaluate(double t, double t_max) const;
};

// Variable-projection least squares: the amplitudes and background are
// solved linearly for each (gamma, omega). Starts from the periodogram peak.
// Throws FitError if the fitted amplitude is below 5x the residual rms, the
// frequency collapses below one cycle per record, or the record is too short.
DampedSinusoidFit fit_damped_sinusoid(std::span<const double> t, std::span<const double> y,
                                      int background_degree = 2);

// Oscillation frequency of s3, in kHz.
double rabi_frequency_kHz(const SimRecord& record);
// 1/e time of the fitted envelope of the polarimeter signal, in seconds.
double decay_time_s(const SimRecord& record);

}  // namespace clockprobe
