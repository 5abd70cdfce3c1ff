#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "clockprobe/atom_model.hpp"
#include "clockprobe/dynamics.hpp"
#include "clockprobe/ensemble.hpp"
#include "clockprobe/lightshift.hpp"

namespace clockprobe {

struct SimulationConfig {
  double t_end_ms = 2.0;
  double sample_dt_us = 8.0;
  double dt_ns = 0.0;  // 0 picks the largest step the dynamics allow
  std::uint64_t seed = 1;
  double extra_loss_rate_per_s = 0.0;
};

struct SweepConfig {
  double detuning_lo_MHz = -1168.0;
  double detuning_hi_MHz = 0.0;
  double step_MHz = 20.0;
  double mask_linewidths = 5.0;
  double theta_lo_deg = 0.0;
  double theta_hi_deg = 90.0;
  double theta_step_deg = 5.0;
  bool constant_scattering = true;
  double scattering_rate_per_s = 1250.0;
  double extrapolate_od = 1000.0;
};

struct OutputConfig {
  std::string directory;
  bool plot_script = true;
};

struct RunConfig {
  CsD1Constants atom;
  CloudConfig cloud;
  ProbeConfig probe;
  bool probe_enabled = true;
  bool probe_at_magic = false;  // detuning given as "magic"
  bool pumping = true;
  MicrowaveConfig mw;
  InhomogeneityConfig inhomog;  // mw_irradiance_rms_frac mirrors mw.inhomogeneity_frac
  SimulationConfig sim;
  SweepConfig sweep;
  OutputConfig output;

  // Re-validates every embedded type. Throws ConfigError; returns warnings.
  std::vector<std::string> validate() const;
};

// Overlays a JSON document on `base`. Unknown keys, wrong types and syntax
// errors raise ConfigError naming the key path or line.
RunConfig parse_config(const std::string& json_text, const RunConfig& base = {});
RunConfig load_config(const std::filesystem::path& path, const RunConfig& base = {});

std::vector<std::string> preset_names();
// JSON text of a built-in preset; throws ConfigError for unknown names.
const std::string& preset_json(const std::string& name);
RunConfig preset(const std::string& name);

// Detuning of the first magic point in the F=4 window when probe_at_magic is
// set, otherwise the configured detuning.
double resolved_detuning_MHz(const RunConfig& cfg);

// ExperimentSpec for a single evolution described by the config.
ExperimentSpec experiment_spec(const RunConfig& cfg);

}  // namespace clockprobe
