#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "clockprobe/dynamics.hpp"

namespace clockprobe {

struct InhomogeneityConfig {
  double probe_irradiance_rms_frac = 0.0;
  double mw_irradiance_rms_frac = 0.0;
  int n_samples = 1;
  std::uint64_t seed = 1;

  // Throws ConfigError.
  void validate() const;
};

// One atom subgroup: probe irradiance and microwave Rabi frequency scale factors.
struct EnsembleMember {
  double probe_factor = 1.0;
  double mw_factor = 1.0;
};

// Stratified Gaussian quantiles for both distributions, paired by a seeded
// shuffle of the microwave quantiles. Members with nonpositive probe
// irradiance are dropped.
std::vector<EnsembleMember> ensemble_members(const InhomogeneityConfig& inhomog);

// Worker threads for independent evolutions: CLOCKPROBE_WORKERS if set,
// otherwise the hardware concurrency.
int worker_count();

// Runs body(i) for i in [0, n) on up to `workers` threads and rethrows the
// first exception.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

// Equal-weight average of the member evolutions. Members share the base time
// grid. The result does not depend on the worker count.
SimRecord ensemble_average(const ExperimentSpec& base, const InhomogeneityConfig& inhomog,
                           int workers = 0);

struct MeasurementFigure {
  double detuning_MHz = 0.0;
  double irradiance_rel = 0.0;
  double tau_d_s = 0.0;
  double omega_kHz = 0.0;  // NaN when the ensemble dephases before one period
  double eta = 0.0;
  double eta_sq = 0.0;
  double pn_snr = 0.0;
  bool masked = false;
  bool failed = false;
  std::string error;

  bool ok() const { return !masked && !failed; }
};

struct SweepSettings {
  ExperimentSpec base;  // probe detuning and irradiance are overwritten per point
  double scattering_rate_per_s = 1250.0;
  InhomogeneityConfig inhomog;
  double t_end_s = 4e-3;
  double sample_dt_s = 8e-6;
  double mask_MHz = 5.0 * 4.5625;
};

// Runs the sweep at constant reference scattering rate. Masked and failed
// points are flagged and the sweep continues. Output follows input order.
std::vector<MeasurementFigure> sweep_measurement_strength(std::span<const double> detunings_MHz,
                                                          const SweepSettings& settings,
                                                          int workers = 0);

// Detuning of the largest value of field(figure) over the valid points,
// refined by a parabola through the neighbours.
double peak_detuning(const std::vector<MeasurementFigure>& figures,
                     const std::function<double(const MeasurementFigure&)>& field);

}  // namespace clockprobe
