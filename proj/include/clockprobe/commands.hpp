#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "clockprobe/config.hpp"

namespace clockprobe {

struct OutputFile {
  std::string name;
  std::string content;
};

// Everything a subcommand produces. Nothing touches the disk until
// write_outputs, so a failed run leaves no files behind.
struct CommandOutput {
  std::vector<OutputFile> files;
  std::vector<std::string> summary;
};

CommandOutput cmd_spectra(const RunConfig& cfg);
CommandOutput cmd_rabi(const RunConfig& cfg);
CommandOutput cmd_chevron(const RunConfig& cfg);
CommandOutput cmd_measurement(const RunConfig& cfg);

// Creates the directory if needed and writes every file atomically.
void write_outputs(const CommandOutput& out, const std::filesystem::path& dir);

}  // namespace clockprobe
