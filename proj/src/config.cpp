#include "clockprobe/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "clockprobe/errors.hpp"

namespace clockprobe {
namespace {

using json = nlohmann::json;

// Reads the keys of one JSON object and rejects anything left over.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + "expected an object");
  }

  void number(const char* key, double& target) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError(where(key) + "expected a number");
      target = v->get<double>();
    }
  }

  void integer(const char* key, int& target) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(where(key) + "expected an integer");
      target = v->get<int>();
    }
  }

  void unsigned_integer(const char* key, std::uint64_t& target) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(where(key) + "expected a nonnegative integer");
      target = v->get<std::uint64_t>();
    }
  }

  void boolean(const char* key, bool& target) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key) + "expected true or false");
      target = v->get<bool>();
    }
  }

  void string(const char* key, std::string& target) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(where(key) + "expected a string");
      target = v->get<std::string>();
    }
  }

  // Number, or the string "magic".
  void detuning(const char* key, double& target, bool& magic) {
    if (const json* v = take(key)) {
      if (v->is_string() && v->get<std::string>() == "magic") {
        magic = true;
      } else if (v->is_number()) {
        target = v->get<double>();
        magic = false;
      } else {
        throw ConfigError(where(key) + "expected a number or \"magic\"");
      }
    }
  }

  template <typename F>
  void child(const char* key, F&& read) {
    if (const json* v = take(key)) {
      Section s(*v, path_.empty() ? key : path_ + "." + key);
      read(s);
      s.finish();
    }
  }

  void finish() const {
    for (const auto& [key, value] : node_.items())
      if (!seen_.contains(key)) throw ConfigError(where(key.c_str()) + "unknown key");
  }

 private:
  const json* take(const char* key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }
  std::string where() const { return path_.empty() ? "config: " : "config key '" + path_ + "': "; }
  std::string where(const char* key) const {
    return "config key '" + (path_.empty() ? std::string(key) : path_ + "." + key) + "': ";
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> table = {
      {"spectra", R"({
  "probe": {"detuning_MHz": "magic", "irradiance_rel": 16.0, "polarization_angle_deg": 45.0},
  "sweep": {"detuning_lo_MHz": -1600.0, "detuning_hi_MHz": 9800.0, "step_MHz": 2.0,
            "theta_lo_deg": 0.0, "theta_hi_deg": 90.0, "theta_step_deg": 5.0}
}
)"},
      {"rabi", R"({
  "cloud": {"od_resonant": 2.2},
  "probe": {"detuning_MHz": "magic", "irradiance_rel": 16.0, "polarization_angle_deg": 45.0},
  "microwave": {"rabi_kHz": 5.0, "inhomogeneity_frac": 0.0},
  "simulation": {"t_end_ms": 2.0, "extra_loss_rate_per_s": 0.0}
}
)"},
      {"rabi_ensemble", R"({
  "cloud": {"od_resonant": 2.2},
  "probe": {"detuning_MHz": "magic", "irradiance_rel": 16.0, "polarization_angle_deg": 45.0},
  "microwave": {"rabi_kHz": 5.0, "inhomogeneity_frac": 0.015},
  "inhomogeneity": {"n_samples": 16},
  "simulation": {"t_end_ms": 2.0, "extra_loss_rate_per_s": 400.0}
}
)"},
      {"chevron", R"({
  "probe": {"detuning_MHz": "magic", "irradiance_rel": 16.0, "polarization_angle_deg": 45.0},
  "microwave": {"rabi_kHz": 5.0},
  "simulation": {"t_end_ms": 2.0},
  "sweep": {"detuning_lo_MHz": -1168.0, "detuning_hi_MHz": 0.0, "step_MHz": 25.0,
            "mask_linewidths": 5.0, "constant_scattering": true, "scattering_rate_per_s": 1250.0,
            "theta_lo_deg": 0.0, "theta_hi_deg": 90.0, "theta_step_deg": 5.0}
}
)"},
      {"measurement", R"({
  "cloud": {"od_resonant": 2.5, "atom_number": 4861111.0},
  "probe": {"detuning_MHz": "magic", "polarization_angle_deg": 45.0},
  "microwave": {"rabi_kHz": 5.0, "inhomogeneity_frac": 0.015},
  "inhomogeneity": {"probe_irradiance_rms_frac": 0.15, "n_samples": 16},
  "simulation": {"t_end_ms": 4.0, "extra_loss_rate_per_s": 400.0},
  "sweep": {"detuning_lo_MHz": -1168.0, "detuning_hi_MHz": 0.0, "step_MHz": 20.0,
            "mask_linewidths": 5.0, "constant_scattering": true, "scattering_rate_per_s": 1250.0,
            "extrapolate_od": 1000.0}
}
)"},
  };
  return table;
}

}  // namespace

std::vector<std::string> RunConfig::validate() const {
  atom.validate();
  std::vector<std::string> warnings = cloud.validate();
  probe.validate();
  mw.validate();
  inhomog.validate();
  if (!(sim.t_end_ms > 0)) throw ConfigError("simulation.t_end_ms must be > 0");
  if (!(sim.sample_dt_us > 0)) throw ConfigError("simulation.sample_dt_us must be > 0");
  if (!(sim.dt_ns >= 0)) throw ConfigError("simulation.dt_ns must be >= 0");
  if (sim.dt_ns > 0) {
    const double ratio = sim.sample_dt_us * 1e3 / sim.dt_ns;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
      throw ConfigError("simulation.sample_dt_us must be an integer multiple of dt_ns");
  }
  if (!(sim.extra_loss_rate_per_s >= 0)) throw ConfigError("simulation.extra_loss_rate_per_s must be >= 0");
  if (!(sweep.detuning_lo_MHz < sweep.detuning_hi_MHz))
    throw ConfigError("sweep.detuning_lo_MHz must be below detuning_hi_MHz");
  if (!(sweep.step_MHz > 0)) throw ConfigError("sweep.step_MHz must be > 0");
  if (!(sweep.mask_linewidths >= 0)) throw ConfigError("sweep.mask_linewidths must be >= 0");
  if (!(sweep.theta_lo_deg <= sweep.theta_hi_deg) || !(sweep.theta_step_deg > 0))
    throw ConfigError("sweep theta range must be ordered with a positive step");
  if (!(sweep.scattering_rate_per_s > 0)) throw ConfigError("sweep.scattering_rate_per_s must be > 0");
  if (!(sweep.extrapolate_od > 0)) throw ConfigError("sweep.extrapolate_od must be > 0");
  if (inhomog.mw_irradiance_rms_frac != mw.inhomogeneity_frac)
    throw ConfigError("microwave inhomogeneity is set through microwave.inhomogeneity_frac");
  return warnings;
}

RunConfig parse_config(const std::string& json_text, const RunConfig& base) {
  json doc;
  try {
    doc = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    const auto upto = json_text.substr(0, std::min<std::size_t>(e.byte, json_text.size()));
    const auto line = 1 + std::count(upto.begin(), upto.end(), '\n');
    std::ostringstream msg;
    msg << "config syntax error at line " << line << ": " << e.what();
    throw ConfigError(msg.str());
  }

  RunConfig c = base;
  Section root(doc, "");
  root.child("atom", [&](Section& s) {
    s.number("gamma_MHz", c.atom.gamma_MHz);
    s.number("excited_hf_splitting_MHz", c.atom.excited_hf_splitting_MHz);
    s.number("ground_hf_splitting_MHz", c.atom.ground_hf_splitting_MHz);
    s.number("i_sat_W_per_m2", c.atom.i_sat_W_per_m2);
    s.number("g_f_upper", c.atom.g_f_upper);
    s.number("g_f_lower", c.atom.g_f_lower);
    s.number("zeeman_MHz_per_G", c.atom.zeeman_MHz_per_G);
    s.number("wavelength_nm", c.atom.wavelength_nm);
  });
  root.child("cloud", [&](Section& s) {
    s.number("atom_number", c.cloud.atom_number);
    s.number("cloud_radius_mm", c.cloud.cloud_radius_mm);
    s.number("od_resonant", c.cloud.od_resonant);
    s.number("probe_radius_mm", c.cloud.probe_radius_mm);
    s.number("bias_field_G", c.cloud.bias_field_G);
    s.number("interrogated_atoms", c.cloud.interrogated_atoms);
    s.number("detection_efficiency", c.cloud.detection_efficiency);
  });
  root.child("probe", [&](Section& s) {
    s.boolean("enabled", c.probe_enabled);
    s.detuning("detuning_MHz", c.probe.detuning_MHz, c.probe_at_magic);
    s.number("irradiance_rel", c.probe.irradiance_rel);
    s.number("polarization_angle_deg", c.probe.polarization_angle_deg);
    s.boolean("pumping", c.pumping);
  });
  root.child("microwave", [&](Section& s) {
    s.number("rabi_kHz", c.mw.rabi_kHz);
    s.number("detuning_kHz", c.mw.detuning_kHz);
    s.number("inhomogeneity_frac", c.mw.inhomogeneity_frac);
  });
  root.child("inhomogeneity", [&](Section& s) {
    s.number("probe_irradiance_rms_frac", c.inhomog.probe_irradiance_rms_frac);
    s.integer("n_samples", c.inhomog.n_samples);
  });
  root.child("simulation", [&](Section& s) {
    s.number("t_end_ms", c.sim.t_end_ms);
    s.number("sample_dt_us", c.sim.sample_dt_us);
    s.number("dt_ns", c.sim.dt_ns);
    s.unsigned_integer("seed", c.sim.seed);
    s.number("extra_loss_rate_per_s", c.sim.extra_loss_rate_per_s);
  });
  root.child("sweep", [&](Section& s) {
    s.number("detuning_lo_MHz", c.sweep.detuning_lo_MHz);
    s.number("detuning_hi_MHz", c.sweep.detuning_hi_MHz);
    s.number("step_MHz", c.sweep.step_MHz);
    s.number("mask_linewidths", c.sweep.mask_linewidths);
    s.number("theta_lo_deg", c.sweep.theta_lo_deg);
    s.number("theta_hi_deg", c.sweep.theta_hi_deg);
    s.number("theta_step_deg", c.sweep.theta_step_deg);
    s.boolean("constant_scattering", c.sweep.constant_scattering);
    s.number("scattering_rate_per_s", c.sweep.scattering_rate_per_s);
    s.number("extrapolate_od", c.sweep.extrapolate_od);
  });
  root.child("output", [&](Section& s) {
    s.string("directory", c.output.directory);
    s.boolean("plot_script", c.output.plot_script);
  });
  root.finish();

  c.inhomog.mw_irradiance_rms_frac = c.mw.inhomogeneity_frac;
  c.inhomog.seed = c.sim.seed;
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << f.rdbuf();
  try {
    return parse_config(text.str(), base);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : presets()) names.push_back(name);
  return names;
}

const std::string& preset_json(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
  }
  return it->second;
}

RunConfig preset(const std::string& name) { return parse_config(preset_json(name)); }

double resolved_detuning_MHz(const RunConfig& cfg) {
  if (!cfg.probe_at_magic) return cfg.probe.detuning_MHz;
  const auto roots =
      find_magic_detunings(cfg.probe.polarization_angle_deg, upper_window(cfg.atom), cfg.atom);
  if (roots.empty()) {
    std::ostringstream msg;
    msg << "no magic detuning between the F=4 lines at polarization angle "
        << cfg.probe.polarization_angle_deg << " deg";
    throw std::domain_error(msg.str());
  }
  return roots.front().detuning_MHz;
}

ExperimentSpec experiment_spec(const RunConfig& cfg) {
  ExperimentSpec spec;
  spec.atom = cfg.atom;
  spec.cloud = cfg.cloud;
  if (cfg.probe_enabled) {
    ProbeConfig p = cfg.probe;
    p.detuning_MHz = resolved_detuning_MHz(cfg);
    spec.probe = p;
  } else {
    spec.probe.reset();
  }
  spec.mw = cfg.mw;
  spec.pumping = cfg.pumping;
  spec.extra_loss_rate_per_s = cfg.sim.extra_loss_rate_per_s;
  const double t_end = cfg.sim.t_end_ms * 1e-3;
  const double sample = cfg.sim.sample_dt_us * 1e-6;
  if (cfg.sim.dt_ns > 0) {
    const double dt = cfg.sim.dt_ns * 1e-9;
    spec.grid = {t_end, dt, static_cast<int>(std::lround(sample / dt))};
  } else {
    // Leave headroom for the brightest ensemble member.
    ExperimentSpec bright = spec;
    if (bright.probe)
      bright.probe->irradiance_rel *= 1.0 + 4.0 * cfg.inhomog.probe_irradiance_rms_frac;
    spec.grid = default_grid(bright, t_end, sample);
  }
  return spec;
}

}  // namespace clockprobe
