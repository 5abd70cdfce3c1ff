#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace clockprobe {

inline constexpr int kCsvSchemaVersion = 1;

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  // Extra "# key: value" lines after the version header.
  std::vector<std::pair<std::string, std::string>> meta;

  void add_row(std::vector<std::string> row);
  std::string render() const;
};

// Shortest round-trip representation; "nan" and "inf" for non-finite values.
std::string format_number(double v);

// Writes to a temporary file in the same directory, then renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Splits a rendered table back into columns and rows, skipping comment lines.
CsvTable parse_csv(const std::string& text);

}  // namespace clockprobe
