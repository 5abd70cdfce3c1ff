#include "clockprobe/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "clockprobe/birefringence.hpp"
#include "clockprobe/errors.hpp"
#include "clockprobe/fit.hpp"

namespace clockprobe {
namespace {

std::vector<double> stratified_normal(int n) {
  std::vector<double> z(static_cast<std::size_t>(n), 0.0);
  if (n == 1) return z;
  const boost::math::normal_distribution<double> normal;
  for (int i = 0; i < n; ++i) z[i] = boost::math::quantile(normal, (i + 0.5) / n);
  return z;
}

SimRecord run_members(const ExperimentSpec& base, const std::vector<EnsembleMember>& members,
                      int workers) {
  if (members.empty()) throw IntegrationError("ensemble has no members with positive irradiance");
  std::vector<SimRecord> records(members.size());
  parallel_for(members.size(), workers, [&](std::size_t i) {
    ExperimentSpec spec = base;
    if (spec.probe) spec.probe->irradiance_rel *= members[i].probe_factor;
    spec.mw.rabi_kHz *= members[i].mw_factor;
    records[i] = simulate(spec);
  });
  if (records.size() == 1) return records.front();

  SimRecord avg = records.front();
  const double w = 1.0 / static_cast<double>(records.size());
  const auto accumulate = [&](auto member) {
    auto& target = avg.*member;
    for (std::size_t k = 0; k < target.size(); ++k) {
      double s = 0.0;
      for (const auto& r : records) s += (r.*member)[k];
      target[k] = s * w;
    }
  };
  accumulate(&SimRecord::signal_rad);
  accumulate(&SimRecord::s3);
  accumulate(&SimRecord::lost);
  for (std::size_t k = 0; k < avg.populations.size(); ++k)
    for (int j = 0; j < kNumGroundStates; ++j) {
      double s = 0.0;
      for (const auto& r : records) s += r.populations[k][j];
      avg.populations[k][j] = s * w;
    }
  return avg;
}

}  // namespace

void InhomogeneityConfig::validate() const {
  if (!(probe_irradiance_rms_frac >= 0)) throw ConfigError("probe_irradiance_rms_frac must be >= 0");
  if (!(mw_irradiance_rms_frac >= 0)) throw ConfigError("mw_irradiance_rms_frac must be >= 0");
  if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
}

std::vector<EnsembleMember> ensemble_members(const InhomogeneityConfig& inhomog) {
  inhomog.validate();
  const std::vector<double> zp = stratified_normal(inhomog.n_samples);
  std::vector<double> zm = zp;
  std::mt19937_64 rng(inhomog.seed);
  std::shuffle(zm.begin(), zm.end(), rng);

  std::vector<EnsembleMember> members;
  for (std::size_t i = 0; i < zp.size(); ++i) {
    const double probe = 1.0 + inhomog.probe_irradiance_rms_frac * zp[i];
    const double mw = 1.0 + inhomog.mw_irradiance_rms_frac * zm[i];
    if (probe <= 0.0) continue;
    members.push_back({probe, std::sqrt(std::max(mw, 0.0))});
  }
  return members;
}

int worker_count() {
  if (const char* env = std::getenv("CLOCKPROBE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
    throw ConfigError("CLOCKPROBE_WORKERS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 0) workers = worker_count();
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n;
          }
        }
      });
  }
  if (failure) std::rethrow_exception(failure);
}

SimRecord ensemble_average(const ExperimentSpec& base, const InhomogeneityConfig& inhomog,
                           int workers) {
  return run_members(base, ensemble_members(inhomog), workers);
}

std::vector<MeasurementFigure> sweep_measurement_strength(std::span<const double> detunings_MHz,
                                                          const SweepSettings& settings,
                                                          int workers) {
  if (!settings.base.probe) throw ConfigError("measurement sweep needs a probe");
  if (!(settings.scattering_rate_per_s > 0)) throw ConfigError("scattering rate must be > 0");
  const std::vector<EnsembleMember> members = ensemble_members(settings.inhomog);

  std::vector<MeasurementFigure> out(detunings_MHz.size());
  parallel_for(out.size(), workers, [&](std::size_t i) {
    MeasurementFigure& fig = out[i];
    fig.detuning_MHz = detunings_MHz[i];
    if (is_masked(fig.detuning_MHz, settings.base.atom, settings.mask_MHz)) {
      fig.masked = true;
      return;
    }
    try {
      ExperimentSpec spec = settings.base;
      spec.probe->detuning_MHz = fig.detuning_MHz;
      spec.probe->irradiance_rel =
          irradiance_for_scattering_rate(fig.detuning_MHz, spec.probe->polarization_angle_deg,
                                         spec.atom, settings.scattering_rate_per_s);
      fig.irradiance_rel = spec.probe->irradiance_rel;
      // The brightest member sets the step size for all of them.
      double brightest = 1.0;
      for (const auto& m : members) brightest = std::max(brightest, m.probe_factor);
      ExperimentSpec bright = spec;
      bright.probe->irradiance_rel *= brightest;
      spec.grid = default_grid(bright, settings.t_end_s, settings.sample_dt_s);

      const SimRecord rec = run_members(spec, members, 1);
      fig.tau_d_s = decay_time_s(rec);
      try {
        fig.omega_kHz = rabi_frequency_kHz(rec);
      } catch (const FitError&) {
        // Fully dephased within a Rabi period; tau_d is still meaningful.
        fig.omega_kHz = std::numeric_limits<double>::quiet_NaN();
      }
      fig.eta = snr_eta(*spec.probe, spec.atom, spec.cloud, fig.tau_d_s);
      fig.eta_sq = fig.eta * fig.eta;
      fig.pn_snr = projection_noise_snr(spec.cloud, *spec.probe, spec.atom, fig.tau_d_s);
    } catch (const std::exception& e) {
      fig.failed = true;
      fig.error = e.what();
    }
  });
  return out;
}

double peak_detuning(const std::vector<MeasurementFigure>& figures,
                     const std::function<double(const MeasurementFigure&)>& field) {
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < figures.size(); ++i)
    if (figures[i].ok()) valid.push_back(i);
  if (valid.empty()) throw FitError("no valid sweep points");
  std::size_t best = 0;
  for (std::size_t k = 1; k < valid.size(); ++k)
    if (field(figures[valid[k]]) > field(figures[valid[best]])) best = k;
  const double x1 = figures[valid[best]].detuning_MHz;
  if (best == 0 || best + 1 == valid.size()) return x1;
  const double x0 = figures[valid[best - 1]].detuning_MHz;
  const double x2 = figures[valid[best + 1]].detuning_MHz;
  const double y0 = field(figures[valid[best - 1]]);
  const double y1 = field(figures[valid[best]]);
  const double y2 = field(figures[valid[best + 1]]);
  const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
  if (!(a < 0)) return x1;
  return std::clamp(-b / (2.0 * a), x0, x2);
}

}  // namespace clockprobe
