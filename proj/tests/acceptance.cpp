// Acceptance checks. Prints one PASS/FAIL line per criterion; with
// --criterion N only that one runs.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "clockprobe/angular_momentum.hpp"
#include "clockprobe/birefringence.hpp"
#include "clockprobe/commands.hpp"
#include "clockprobe/config.hpp"
#include "clockprobe/csv.hpp"
#include "clockprobe/dynamics.hpp"
#include "clockprobe/ensemble.hpp"
#include "clockprobe/fit.hpp"
#include "clockprobe/lightshift.hpp"

using namespace clockprobe;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

const std::string& file_content(const CommandOutput& out, const std::string& name) {
  for (const auto& f : out.files)
    if (f.name == name) return f.content;
  throw std::runtime_error("missing output " + name);
}

std::map<std::string, double> key_values(const std::string& text) {
  std::map<std::string, double> kv;
  for (const auto& row : parse_csv(text).rows) kv[row.at(0)] = std::stod(row.at(1));
  return kv;
}

SweepSettings sweep_settings(const RunConfig& cfg) {
  SweepSettings s;
  s.base = experiment_spec(cfg);
  s.scattering_rate_per_s = cfg.sweep.scattering_rate_per_s;
  s.inhomog = cfg.inhomog;
  s.t_end_s = cfg.sim.t_end_ms * 1e-3;
  s.sample_dt_s = cfg.sim.sample_dt_us * 1e-6;
  s.mask_MHz = cfg.sweep.mask_linewidths * cfg.atom.gamma_MHz;
  return s;
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (double d = lo; d <= hi + 1e-9; d += step) g.push_back(d);
  return g;
}

Outcome magic_point() {
  const CsD1Constants atom;
  Timer t;
  const auto roots = find_magic_detunings(45.0, DetuningWindow{-1168.0, 0.0}, atom);
  const double secs = t.seconds();
  bool near = false;
  std::ostringstream list;
  for (const auto& r : roots) {
    near |= std::abs(r.detuning_MHz + 335.0) <= 5.0;
    list << " " << r.detuning_MHz;
  }
  return {near && roots.size() == 2 && secs < 1.0,
          fmt("%zu root(s) in (-1168, 0) MHz at:%s (need one at -335 +/- 5 and exactly 2); %.3f s",
              roots.size(), list.str().c_str(), secs)};
}

Outcome phase_prefactor() {
  const CsD1Constants atom;
  Timer t;
  const double delta = -0.5 * atom.excited_hf_splitting_MHz;
  const double phi = per_state_phase(GroundState::of(4, 0), delta, atom, 1.0);
  const double closed = 5.0 / 96.0 / (delta / atom.gamma_MHz) * 2.0;
  const double rel = std::abs(phi / closed - 1.0);
  return {rel <= 0.02 && t.seconds() < 1.0,
          fmt("multi-level %.6e vs closed form %.6e, relative difference %.2e", phi, closed, rel)};
}

Outcome selection_rule() {
  const double forbidden = dipole_amplitude(4, 0, 4, 0, 0);
  double worst = 0.0;
  for (const auto& g : state_registry()) {
    double sum = 0.0;
    for (int fe : {3, 4})
      for (int q = -1; q <= 1; ++q) {
        const int me = g.m.as_int() + q;
        if (std::abs(me) <= fe) sum += std::pow(dipole_amplitude(g.f.as_int(), g.m.as_int(), fe, me, q), 2);
      }
    worst = std::max(worst, std::abs(sum - 0.5));
  }
  return {forbidden == 0.0 && worst <= 1e-12,
          fmt("<4',0|d_0|4,0> = %g, line-strength sum deviation %.1e", std::abs(forbidden), worst)};
}

Outcome chevron() {
  Timer t;
  const CommandOutput out = cmd_chevron(preset("chevron"));
  const CsvTable table = parse_csv(file_content(out, "chevron.csv"));
  const auto summary = key_values(file_content(out, "chevron_summary.csv"));
  std::size_t col_res = 0, col_mask = 0, col_fail = 0;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (table.columns[c] == "residual") col_res = c;
    if (table.columns[c] == "masked") col_mask = c;
    if (table.columns[c] == "failed") col_fail = c;
  }
  double worst = 0.0;
  int points = 0, failed = 0;
  for (const auto& row : table.rows) {
    if (row[col_mask] == "1") continue;
    if (row[col_fail] == "1") {
      ++failed;
      continue;
    }
    ++points;
    worst = std::max(worst, std::abs(std::stod(row[col_res])));
  }
  const double at_magic = summary.at("omega_at_magic_over_chi");
  const double secs = t.seconds();
  return {failed == 0 && points > 0 && worst <= 0.02 && std::abs(at_magic - 1.0) <= 0.01 && secs < 600,
          fmt("%d points, %d failed, max |Omega/analytic - 1| = %.4f, Omega(magic)/chi = %.5f, %.1f s",
              points, failed, worst, at_magic, secs)};
}

ExperimentSpec leakage_spec(double bias_G) {
  RunConfig cfg = preset("rabi");
  cfg.pumping = false;
  cfg.sim.t_end_ms = 5.0;
  ExperimentSpec spec = experiment_spec(cfg);
  spec.cloud.bias_field_G = bias_G;
  spec.grid = default_grid(spec, 5e-3);
  return spec;
}

Outcome bias_decoupling() {
  Timer t;
  const double with_field = max_dressed_leakage(leakage_spec(0.5));
  const double without = max_dressed_leakage(leakage_spec(0.0));
  const double secs = t.seconds();
  return {with_field < 1e-3 && without > 1e-2 && secs < 60,
          fmt("max leakage %.2e at 0.5 G, %.2e at 0 G; %.1f s", with_field, without, secs)};
}

double decay_rate(double scattering_per_s, double loss_per_s, double t_end_s) {
  RunConfig cfg = preset("rabi");
  const double d = resolved_detuning_MHz(cfg);
  cfg.probe.irradiance_rel = irradiance_for_scattering_rate(d, cfg.probe.polarization_angle_deg,
                                                            cfg.atom, scattering_per_s);
  cfg.sim.extra_loss_rate_per_s = loss_per_s;
  cfg.sim.t_end_ms = t_end_s * 1e3;
  return 1.0 / decay_time_s(simulate(experiment_spec(cfg)));
}

Outcome decay_physics() {
  Timer t;
  std::vector<double> products;
  for (double r : {625.0, 1250.0, 2500.0}) products.push_back(r / decay_rate(r, 0.0, 4e-3 * 1250.0 / r));
  double spread = 0.0;
  for (double p : products) spread = std::max(spread, std::abs(p / products[1] - 1.0));

  // Rate = loss + c * R; extrapolate the intercept from small scattering rates.
  const std::vector<double> rs{50.0, 100.0, 200.0};
  std::vector<double> gs;
  for (double r : rs) gs.push_back(decay_rate(r, 400.0, 7.5e-3));
  double mr = 0, mg = 0;
  for (std::size_t i = 0; i < rs.size(); ++i) mr += rs[i] / 3, mg += gs[i] / 3;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < rs.size(); ++i) sxy += (rs[i] - mr) * (gs[i] - mg), sxx += (rs[i] - mr) * (rs[i] - mr);
  const double intercept = mg - sxy / sxx * mr;
  const double tau_asym_ms = 1e3 / intercept;
  const double secs = t.seconds();
  return {spread <= 0.05 && std::abs(tau_asym_ms / 2.5 - 1.0) <= 0.05 && secs < 300,
          fmt("tau_d * R = %.4f, %.4f, %.4f (max deviation %.3f); asymptotic decay time %.3f ms; %.1f s",
              products[0], products[1], products[2], spread, tau_asym_ms, secs)};
}

double max_over_min_tau(const std::vector<MeasurementFigure>& figs) {
  double lo = INFINITY, hi = 0.0;
  for (const auto& f : figs)
    if (f.ok()) lo = std::min(lo, f.tau_d_s), hi = std::max(hi, f.tau_d_s);
  return hi / lo;
}

Outcome measurement_shape() {
  Timer t;
  const RunConfig cfg = preset("measurement");
  const double magic = resolved_detuning_MHz(cfg);
  const auto g = grid(-500.0, -180.0, 20.0);
  const SweepSettings spread = sweep_settings(cfg);
  const auto figs = sweep_measurement_strength(g, spread);
  SweepSettings uniform = spread;
  uniform.inhomog.probe_irradiance_rms_frac = 0.0;
  const auto flat = sweep_measurement_strength(g, uniform);

  const double tau_peak = peak_detuning(figs, [](const MeasurementFigure& f) { return f.tau_d_s; });
  const double eta_peak = peak_detuning(figs, [](const MeasurementFigure& f) { return f.eta_sq; });
  const double contrast = max_over_min_tau(figs);
  const double contrast_flat = max_over_min_tau(flat);
  const double secs = t.seconds();
  return {std::abs(tau_peak - magic) <= 15 && std::abs(eta_peak - magic) <= 15 &&
              contrast >= 2.0 * contrast_flat && secs < 900,
          fmt("magic %.2f MHz; tau_d peak %.2f, eta^2 peak %.2f; tau_d max/min %.2f with spread, "
              "%.2f without; %.1f s",
              magic, tau_peak, eta_peak, contrast, contrast_flat, secs)};
}

Outcome scaling_laws() {
  RunConfig cfg = preset("measurement");
  cfg.sweep.detuning_lo_MHz = -345.0;
  cfg.sweep.detuning_hi_MHz = -325.0;
  cfg.sweep.step_MHz = 10.0;
  const auto kv = key_values(file_content(cmd_measurement(cfg), "measurement_summary.csv"));
  const double ratio = kv.at("pn_snr_ratio");
  const double pn = kv.at("pn_snr");
  return {std::abs(ratio - 20.0) <= 0.5 && pn >= 0.1 && pn <= 0.4,
          fmt("projection-noise SNR %.4f at OD %.1f, %.4f at OD %.0f, ratio %.4f", pn, kv.at("od"),
              kv.at("pn_snr_extrapolated"), kv.at("extrapolated_od"), ratio)};
}

Outcome numerical_hygiene() {
  RunConfig cfg = preset("rabi_ensemble");
  cfg.sim.t_end_ms = 1.0;
  ExperimentSpec spec = experiment_spec(cfg);

  double trace_drift = 0.0;  // per ms
  double min_eig = 1.0;
  EvolveOptions opts;
  opts.observer = [&](double t, const DensityMatrix& rho) {
    if (t > 0) trace_drift = std::max(trace_drift, std::abs(rho.total() - 1.0) / (t * 1e3));
    const Eigen::SelfAdjointEigenSolver<Operator> es(rho.rho, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  };
  const SimRecord a = simulate(spec, opts);
  spec.grid = spec.grid.halved();
  const SimRecord b = simulate(spec);
  double halving = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    halving = std::max(halving, std::abs(a.s3[i] - b.s3[i]));
    halving = std::max(halving, std::abs(a.signal_rad[i] - b.signal_rad[i]) / std::abs(a.signal_rad[0]));
  }

  RunConfig small = preset("rabi_ensemble");
  small.inhomog.n_samples = 4;
  small.sim.t_end_ms = 0.5;
  ::setenv("CLOCKPROBE_WORKERS", "1", 1);
  const CommandOutput r1 = cmd_rabi(small);
  ::setenv("CLOCKPROBE_WORKERS", "3", 1);
  const CommandOutput r2 = cmd_rabi(small);
  ::unsetenv("CLOCKPROBE_WORKERS");
  bool identical = r1.files.size() == r2.files.size();
  for (std::size_t i = 0; identical && i < r1.files.size(); ++i)
    identical = r1.files[i].content == r2.files[i].content;

  return {trace_drift <= 1e-9 && min_eig >= -1e-9 && halving < 1e-6 && identical,
          fmt("trace drift %.1e per ms, min eigenvalue %.1e, step-halving change %.1e, "
              "repeat outputs %s",
              trace_drift, min_eig, halving, identical ? "byte-identical" : "DIFFER")};
}

Outcome two_color() {
  const CsD1Constants atom;
  const double od = preset("measurement").cloud.od_resonant;
  const TwoColorPoint p = two_color_balance(lower_window(atom), upper_window(atom), 45.0, atom);
  const double phi = od * p.total_phase(0.5, 0.5, atom);
  return {std::abs(phi) <= 1e-6 && p.phase_lower_rad * p.phase_upper_rad < 0,
          fmt("components at %.2f and %.2f MHz, power ratio %.4f, phases %.3e / %.3e per OD, "
              "balanced phase %.1e rad",
              p.detuning_lower_MHz, p.detuning_upper_MHz, p.power_ratio, p.phase_lower_rad,
              p.phase_upper_rad, phi)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> list = {
      {"magic point location and count", magic_point},
      {"collective phase prefactor", phase_prefactor},
      {"selection rule and sum rule", selection_rule},
      {"Rabi chevron", chevron},
      {"bias-field decoupling", bias_decoupling},
      {"decay physics", decay_physics},
      {"measurement-strength shape", measurement_shape},
      {"projection-noise scaling", scaling_laws},
      {"numerical hygiene", numerical_hygiene},
      {"two-color balance", two_color},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }
  if (only < 0 || only > static_cast<int>(criteria().size())) {
    std::cerr << "criterion must be 1.." << criteria().size() << "\n";
    return 2;
  }

  int failures = 0;
  for (std::size_t k = 0; k < criteria().size(); ++k) {
    if (only && static_cast<int>(k) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria()[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << " ("
              << criteria()[k].first << "): " << o.detail << std::endl;
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
