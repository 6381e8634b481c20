#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tempofield {

/// Comma-separated table with a closed schema: the header must list exactly
/// the expected columns, in order. No quoting; fields never contain commas.
/// Lines starting with '#' are comments.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in, const std::vector<std::string>& expected_header);
CsvTable read_csv_file(const std::filesystem::path& path, const std::vector<std::string>& expected_header);

/// Comma-joined fields, no line terminator. Rejects fields holding a comma.
std::string csv_line(const std::vector<std::string>& fields);

/// Shortest text that parses back to exactly `x`.
std::string format_real(double x);
double parse_real(std::string_view s);
std::size_t parse_count(std::string_view s);

/// Writes `content` to `path` through a temporary file and a rename, so
/// readers never observe a partially written file.
void write_file_atomically(const std::filesystem::path& path, const std::string& content);

}  // namespace tempofield
