#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace valbench::cli {

/// Comma-separated table with a header row. Fields never contain commas or
/// line breaks (writers sanitize free text).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws Parse when absent
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Fixed six-decimal rendering used by every emitted CSV.
std::string fixed6(double value);

/// Replaces separators and line breaks so `text` fits in one CSV field.
std::string sanitize_field(std::string text);

double parse_double(const std::string& field, const std::string& context);
std::int64_t parse_int(const std::string& field, const std::string& context);

}  // namespace valbench::cli
