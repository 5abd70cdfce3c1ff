#include "clockprobe/commands.hpp"

#include <cmath>
#include <sstream>

#include "clockprobe/birefringence.hpp"
#include "clockprobe/csv.hpp"
#include "clockprobe/ensemble.hpp"
#include "clockprobe/errors.hpp"
#include "clockprobe/fit.hpp"

namespace clockprobe {
namespace {

std::string num(double v) { return format_number(v); }

std::string flag(bool v) { return v ? "1" : "0"; }

std::vector<double> uniform_grid(double lo, double hi, double step) {
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= n; ++k) grid.push_back(lo + static_cast<double>(k) * step);
  return grid;
}

double mask_MHz(const RunConfig& cfg) { return cfg.sweep.mask_linewidths * cfg.atom.gamma_MHz; }

void add_meta(CsvTable& t, const RunConfig& cfg) {
  t.meta.emplace_back("seed", std::to_string(cfg.sim.seed));
  t.meta.emplace_back("polarization_angle_deg", num(cfg.probe.polarization_angle_deg));
}

std::string summary_line(const std::string& key, double value) {
  return key + " = " + num(value);
}

std::string key_value_csv(const std::vector<std::pair<std::string, double>>& rows) {
  CsvTable t;
  t.columns = {"key", "value"};
  for (const auto& [k, v] : rows) t.add_row({k, num(v)});
  return t.render();
}

std::string plot_script(const std::string& body) {
  return "import numpy as np\n"
         "import matplotlib\n"
         "matplotlib.use(\"Agg\")\n"
         "import matplotlib.pyplot as plt\n\n"
         "def load(name):\n"
         "    return np.genfromtxt(name, delimiter=\",\", names=True, comments=\"#\")\n\n" +
         body;
}

// Evolution at one probe detuning; irradiance either fixed or chosen for a
// constant reference scattering rate.
ExperimentSpec point_spec(const RunConfig& cfg, double detuning_MHz) {
  RunConfig c = cfg;
  c.probe_at_magic = false;
  c.probe.detuning_MHz = detuning_MHz;
  if (cfg.sweep.constant_scattering)
    c.probe.irradiance_rel = irradiance_for_scattering_rate(
        detuning_MHz, c.probe.polarization_angle_deg, c.atom, c.sweep.scattering_rate_per_s);
  return experiment_spec(c);
}

}  // namespace

CommandOutput cmd_spectra(const RunConfig& cfg) {
  const double mask = mask_MHz(cfg);
  const double od = cfg.cloud.od_resonant;

  CsvTable phase;
  phase.columns = {"detuning_MHz", "phi_up_rad", "phi_down_rad", "masked"};
  phase.meta.emplace_back("od_resonant", num(od));
  add_meta(phase, cfg);
  CsvTable shift;
  shift.columns = {"detuning_MHz", "dU_kHz", "masked"};
  shift.meta.emplace_back("irradiance_rel", num(cfg.probe.irradiance_rel));
  add_meta(shift, cfg);

  for (double d : uniform_grid(cfg.sweep.detuning_lo_MHz, cfg.sweep.detuning_hi_MHz, cfg.sweep.step_MHz)) {
    if (is_masked(d, cfg.atom, mask)) {
      phase.add_row({num(d), "nan", "nan", "1"});
      shift.add_row({num(d), "nan", "1"});
      continue;
    }
    phase.add_row({num(d), num(per_state_phase(GroundState::of(4, 0), d, cfg.atom, od)),
                   num(per_state_phase(GroundState::of(3, 0), d, cfg.atom, od)), "0"});
    ProbeConfig p = cfg.probe;
    p.detuning_MHz = d;
    shift.add_row({num(d), num(differential_clock_shift_kHz(p, cfg.atom)), "0"});
  }

  CsvTable magic;
  magic.columns = {"theta_deg", "window", "found", "detuning_MHz", "residual_kHz"};
  CommandOutput out;
  const auto thetas = uniform_grid(cfg.sweep.theta_lo_deg, cfg.sweep.theta_hi_deg, cfg.sweep.theta_step_deg);
  for (double theta : thetas) {
    for (const auto& [label, window] : {std::pair{"F4", upper_window(cfg.atom)},
                                        std::pair{"F3", lower_window(cfg.atom)}}) {
      const auto roots = find_magic_detunings(theta, window, cfg.atom);
      if (roots.empty()) magic.add_row({num(theta), label, "0", "nan", "nan"});
      for (const auto& r : roots)
        magic.add_row({num(theta), label, "1", num(r.detuning_MHz), num(r.residual_dU_kHz)});
    }
  }
  const auto at_theta =
      find_magic_detunings(cfg.probe.polarization_angle_deg, upper_window(cfg.atom), cfg.atom);
  out.summary.push_back("magic points between the F=4 lines at " +
                        num(cfg.probe.polarization_angle_deg) + " deg: " +
                        std::to_string(at_theta.size()));
  for (const auto& r : at_theta) out.summary.push_back(summary_line("magic_detuning_MHz", r.detuning_MHz));

  out.files.push_back({"phase_spectrum.csv", phase.render()});
  out.files.push_back({"light_shift.csv", shift.render()});
  out.files.push_back({"magic_points.csv", magic.render()});
  if (cfg.output.plot_script)
    out.files.push_back({"plot_spectra.py", plot_script(R"py(ph = load("phase_spectrum.csv")
du = load("light_shift.csv")
fig, (a, b) = plt.subplots(2, 1, sharex=True)
a.plot(ph["detuning_MHz"], ph["phi_up_rad"], label="|4,0>")
a.plot(ph["detuning_MHz"], ph["phi_down_rad"], label="|3,0>")
a.set_ylabel("phase (rad)")
a.legend()
b.plot(du["detuning_MHz"], du["dU_kHz"])
b.axhline(0, color="k", lw=0.5)
b.set_ylabel("dU (kHz)")
b.set_xlabel("detuning (MHz)")
fig.savefig("spectra.png", dpi=150)
)py")});
  return out;
}

CommandOutput cmd_rabi(const RunConfig& cfg) {
  const ExperimentSpec spec = experiment_spec(cfg);
  const SimRecord rec = ensemble_average(spec, cfg.inhomog);

  CsvTable t;
  t.columns = {"time_s", "signal_rad", "s3", "pop_F3", "pop_F4", "lost"};
  add_meta(t, cfg);
  if (spec.probe) t.meta.emplace_back("detuning_MHz", num(spec.probe->detuning_MHz));
  for (std::size_t i = 0; i < rec.size(); ++i)
    t.add_row({num(rec.times_s[i]), num(rec.signal_rad[i]), num(rec.s3[i]),
               num(rec.population_f3(i)), num(rec.population_f4(i)), num(rec.lost[i])});

  std::vector<std::pair<std::string, double>> summary = {
      {"dt_ns", spec.grid.dt_s * 1e9}, {"output_stride", spec.grid.output_stride}};
  if (spec.probe) {
    summary.emplace_back("detuning_MHz", spec.probe->detuning_MHz);
    summary.emplace_back("irradiance_rel", spec.probe->irradiance_rel);
    if (spec.pumping)
      summary.emplace_back("scattering_rate_per_s",
                           reference_scattering_rate(pumping_jump_operators(*spec.probe, spec.atom)));
  }
  if (spec.mw.rabi_kHz > 0) summary.emplace_back("omega_kHz", rabi_frequency_kHz(rec));
  if (spec.probe) summary.emplace_back("tau_d_ms", decay_time_s(rec) * 1e3);

  CommandOutput out;
  for (const auto& [k, v] : summary) out.summary.push_back(summary_line(k, v));
  out.files.push_back({"rabi.csv", t.render()});
  out.files.push_back({"rabi_summary.csv", key_value_csv(summary)});
  if (cfg.output.plot_script)
    out.files.push_back({"plot_rabi.py", plot_script(R"py(r = load("rabi.csv")
fig, ax = plt.subplots()
ax.plot(r["time_s"] * 1e3, r["signal_rad"] * 1e3)
ax.set_xlabel("time (ms)")
ax.set_ylabel("polarimeter phase (mrad)")
fig.savefig("rabi.png", dpi=150)
)py")});
  return out;
}

CommandOutput cmd_chevron(const RunConfig& cfg) {
  const double mask = mask_MHz(cfg);
  const auto grid = uniform_grid(cfg.sweep.detuning_lo_MHz, cfg.sweep.detuning_hi_MHz, cfg.sweep.step_MHz);

  struct Point {
    double irradiance = 0, omega = 0, analytic = 0, du = 0;
    bool masked = false, failed = false;
    std::string error;
  };
  std::vector<Point> points(grid.size());
  const auto run_point = [&](double d, Point& p) {
    if (is_masked(d, cfg.atom, mask)) {
      p.masked = true;
      return;
    }
    try {
      const ExperimentSpec spec = point_spec(cfg, d);
      p.irradiance = spec.probe->irradiance_rel;
      p.du = dressed_clock_shift_kHz(*spec.probe, spec.atom, spec.cloud.bias_field_G);
      p.analytic = std::hypot(spec.mw.rabi_kHz, p.du - spec.mw.detuning_kHz);
      p.omega = rabi_frequency_kHz(ensemble_average(spec, cfg.inhomog, 1));
    } catch (const std::exception& e) {
      p.failed = true;
      p.error = e.what();
    }
  };
  parallel_for(grid.size(), 0, [&](std::size_t i) { run_point(grid[i], points[i]); });

  CsvTable t;
  t.columns = {"detuning_MHz", "irradiance_rel", "omega_kHz", "omega_analytic_kHz", "dU_kHz",
               "residual", "masked", "failed"};
  add_meta(t, cfg);
  t.meta.emplace_back("rabi_kHz", num(cfg.mw.rabi_kHz));
  double worst = 0.0;
  CommandOutput out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point& p = points[i];
    if (p.masked || p.failed) {
      t.add_row({num(grid[i]), "nan", "nan", "nan", "nan", "nan", flag(p.masked), flag(p.failed)});
      if (p.failed) out.summary.push_back("point " + num(grid[i]) + " MHz failed: " + p.error);
      continue;
    }
    const double residual = std::abs(p.omega - p.analytic) / p.omega;
    worst = std::max(worst, residual);
    t.add_row({num(grid[i]), num(p.irradiance), num(p.omega), num(p.analytic), num(p.du),
               num(residual), "0", "0"});
  }

  CsvTable theta;
  theta.columns = {"theta_deg", "magic_MHz", "found"};
  for (double th : uniform_grid(cfg.sweep.theta_lo_deg, cfg.sweep.theta_hi_deg, cfg.sweep.theta_step_deg)) {
    const auto roots = find_magic_detunings(th, upper_window(cfg.atom), cfg.atom);
    theta.add_row({num(th), roots.empty() ? "nan" : num(roots.front().detuning_MHz),
                   flag(!roots.empty())});
  }

  const double magic = resolved_detuning_MHz([&] {
    RunConfig c = cfg;
    c.probe_at_magic = true;
    return c;
  }());
  Point at_magic;
  run_point(magic, at_magic);
  if (at_magic.failed) throw FitError("Rabi fit at the magic detuning failed: " + at_magic.error);

  const std::vector<std::pair<std::string, double>> summary = {
      {"magic_detuning_MHz", magic},
      {"omega_at_magic_kHz", at_magic.omega},
      {"omega_at_magic_over_chi", at_magic.omega / cfg.mw.rabi_kHz},
      {"max_overlay_residual", worst}};
  for (const auto& [k, v] : summary) out.summary.push_back(summary_line(k, v));
  out.files.push_back({"chevron.csv", t.render()});
  out.files.push_back({"magic_vs_theta.csv", theta.render()});
  out.files.push_back({"chevron_summary.csv", key_value_csv(summary)});
  if (cfg.output.plot_script)
    out.files.push_back({"plot_chevron.py", plot_script(R"py(c = load("chevron.csv")
m = load("magic_vs_theta.csv")
fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))
a.plot(c["detuning_MHz"], c["omega_kHz"], "o", label="simulation")
a.plot(c["detuning_MHz"], c["omega_analytic_kHz"], "-", label="sqrt(chi^2 + dU^2)")
a.set_xlabel("detuning (MHz)")
a.set_ylabel("Rabi frequency (kHz)")
a.legend()
b.plot(m["theta_deg"], m["magic_MHz"], "o-")
b.set_xlabel("polarization angle (deg)")
b.set_ylabel("magic detuning (MHz)")
fig.savefig("chevron.png", dpi=150)
)py")});
  return out;
}

CommandOutput cmd_measurement(const RunConfig& cfg) {
  SweepSettings settings;
  settings.base = experiment_spec(cfg);
  settings.scattering_rate_per_s = cfg.sweep.scattering_rate_per_s;
  settings.inhomog = cfg.inhomog;
  settings.t_end_s = cfg.sim.t_end_ms * 1e-3;
  settings.sample_dt_s = cfg.sim.sample_dt_us * 1e-6;
  settings.mask_MHz = mask_MHz(cfg);
  const auto grid = uniform_grid(cfg.sweep.detuning_lo_MHz, cfg.sweep.detuning_hi_MHz, cfg.sweep.step_MHz);

  const auto table = [&](const std::vector<MeasurementFigure>& figs, double loss) {
    CsvTable t;
    t.columns = {"detuning_MHz", "irradiance_rel", "tau_d_ms", "omega_kHz", "eta_sq", "pn_snr",
                 "masked", "failed"};
    add_meta(t, cfg);
    t.meta.emplace_back("scattering_rate_per_s", num(settings.scattering_rate_per_s));
    t.meta.emplace_back("extra_loss_rate_per_s", num(loss));
    for (const auto& f : figs) {
      if (!f.ok()) {
        t.add_row({num(f.detuning_MHz), "nan", "nan", "nan", "nan", "nan", flag(f.masked), flag(f.failed)});
        continue;
      }
      t.add_row({num(f.detuning_MHz), num(f.irradiance_rel), num(f.tau_d_s * 1e3), num(f.omega_kHz),
                 num(f.eta_sq), num(f.pn_snr), "0", "0"});
    }
    return t.render();
  };

  CommandOutput out;
  const auto figs = sweep_measurement_strength(grid, settings);
  for (const auto& f : figs)
    if (f.failed) out.summary.push_back("point " + num(f.detuning_MHz) + " MHz failed: " + f.error);
  out.files.push_back({"measurement.csv", table(figs, settings.base.extra_loss_rate_per_s)});
  if (settings.base.extra_loss_rate_per_s > 0) {
    SweepSettings lossless = settings;
    lossless.base.extra_loss_rate_per_s = 0.0;
    out.files.push_back({"measurement_no_loss.csv", table(sweep_measurement_strength(grid, lossless), 0.0)});
  }

  const double tau_peak = peak_detuning(figs, [](const MeasurementFigure& f) { return f.tau_d_s; });
  const double eta_peak = peak_detuning(figs, [](const MeasurementFigure& f) { return f.eta_sq; });
  const MeasurementFigure* best = nullptr;
  for (const auto& f : figs)
    if (f.ok() && (!best || f.eta_sq > best->eta_sq)) best = &f;
  if (!best) throw FitError("no valid point in the measurement sweep");

  ProbeConfig probe = *settings.base.probe;
  probe.detuning_MHz = best->detuning_MHz;
  probe.irradiance_rel = best->irradiance_rel;
  const CloudConfig dense =
      scale_optical_density(cfg.cloud, cfg.sweep.extrapolate_od / cfg.cloud.od_resonant);
  const double pn_dense = projection_noise_snr(dense, probe, cfg.atom, best->tau_d_s);

  const std::vector<std::pair<std::string, double>> summary = {
      {"tau_d_peak_MHz", tau_peak},
      {"eta_sq_peak_MHz", eta_peak},
      {"eta_sq_max", best->eta_sq},
      {"tau_d_at_eta_sq_max_ms", best->tau_d_s * 1e3},
      {"pn_snr", best->pn_snr},
      {"od", cfg.cloud.od_resonant},
      {"pn_snr_extrapolated", pn_dense},
      {"extrapolated_od", cfg.sweep.extrapolate_od},
      {"pn_snr_ratio", pn_dense / best->pn_snr}};
  for (const auto& [k, v] : summary) out.summary.push_back(summary_line(k, v));
  out.files.push_back({"measurement_summary.csv", key_value_csv(summary)});
  if (cfg.output.plot_script)
    out.files.push_back({"plot_measurement.py", plot_script(R"py(import os
m = load("measurement.csv")
fig, (a, b) = plt.subplots(2, 1, sharex=True)
a.plot(m["detuning_MHz"], m["tau_d_ms"], "-", label="with loss")
b.plot(m["detuning_MHz"], m["eta_sq"], "-", label="with loss")
if os.path.exists("measurement_no_loss.csv"):
    n = load("measurement_no_loss.csv")
    a.plot(n["detuning_MHz"], n["tau_d_ms"], "--", label="no loss")
    b.plot(n["detuning_MHz"], n["eta_sq"], "--", label="no loss")
a.set_ylabel("tau_d (ms)")
b.set_ylabel("eta^2")
b.set_xlabel("detuning (MHz)")
a.legend()
fig.savefig("measurement.png", dpi=150)
)py")});
  return out;
}

void write_outputs(const CommandOutput& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& f : out.files) write_atomic(dir / f.name, f.content);
}

}  // namespace clockprobe
