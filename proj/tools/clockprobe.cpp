#include <cstdlib>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "clockprobe/commands.hpp"
#include "clockprobe/config.hpp"
#include "clockprobe/errors.hpp"

namespace {

enum ExitCode {
  kOk = 0,
  kOtherError = 1,
  kConfigError = 2,
  kPhysicsError = 3,
  kFitError = 4,
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous birefringence probe of the Cs clock transition"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string preset_name;

  const char* names[] = {"spectra", "rabi", "chevron", "measurement"};
  const char* help[] = {"phase and differential light-shift spectra, magic points",
                        "Rabi oscillation record",
                        "Rabi frequency versus detuning and magic detuning versus angle",
                        "decay time and measurement strength at constant scattering"};
  for (int i = 0; i < 4; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", config_path, "JSON config file (overlays the preset)");
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "seed for ensemble pairing");
    sub->add_option("--preset", preset_name, "built-in preset")
        ->check(CLI::IsMember(clockprobe::preset_names()));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    if (config_path.empty() && preset_name.empty())
      throw clockprobe::ConfigError("give --config, --preset or both");
    clockprobe::RunConfig cfg = preset_name.empty() ? clockprobe::RunConfig{}
                                                    : clockprobe::preset(preset_name);
    if (!config_path.empty()) cfg = clockprobe::load_config(config_path, cfg);
    if (seed) {
      cfg.sim.seed = *seed;
      cfg.inhomog.seed = *seed;
    }
    for (const auto& w : cfg.validate()) std::cerr << "warning: " << w << "\n";
    clockprobe::worker_count();  // reject a bad CLOCKPROBE_WORKERS before any work

    clockprobe::CommandOutput out;
    if (command == "spectra") out = clockprobe::cmd_spectra(cfg);
    else if (command == "rabi") out = clockprobe::cmd_rabi(cfg);
    else if (command == "chevron") out = clockprobe::cmd_chevron(cfg);
    else out = clockprobe::cmd_measurement(cfg);

    clockprobe::write_outputs(out, out_dir);
    for (const auto& line : out.summary) std::cout << line << "\n";
    for (const auto& f : out.files) std::cout << "wrote " << out_dir << "/" << f.name << "\n";
    return kOk;
  } catch (const clockprobe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const clockprobe::FitError& e) {
    std::cerr << "fit failed: " << e.what() << "\n";
    return kFitError;
  } catch (const clockprobe::IntegrationError& e) {
    std::cerr << "integration error: " << e.what() << "\n";
    return kPhysicsError;
  } catch (const std::domain_error& e) {
    std::cerr << "physics error: " << e.what() << "\n";
    return kPhysicsError;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kOtherError;
  }
}
