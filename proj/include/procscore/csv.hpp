#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace procscore {

// RFC-4180 table. Lines starting with '#' before the header are treated as
// provenance comments and skipped on read.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
  // Throws ParseError when the column is missing.
  std::size_t require_column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);

std::string csv_escape(std::string_view field);
void append_csv_row(std::string& out, const std::vector<std::string>& fields);
std::string to_csv(const CsvTable& table, const std::vector<std::string>& preamble = {});

// Shortest round-trip decimal form of a double.
std::string format_double(double value);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace procscore
