#include "tempofield/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "tempofield/error.hpp"

namespace tempofield {

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError("no column '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::vector<std::string>& expected_header) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_line(line);
    if (!have_header) {
      if (fields != expected_header) {
        std::string expected;
        for (const auto& h : expected_header) expected += (expected.empty() ? "" : ",") + h;
        throw ParseError("unexpected columns '" + line + "', schema is '" + expected + "'", lineno);
      }
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       lineno);
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw ParseError("missing CSV header");
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path, const std::vector<std::string>& expected_header) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return read_csv(in, expected_header);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].find(',') != std::string::npos || fields[i].find('\n') != std::string::npos) {
      throw ConfigError("CSV field '" + fields[i] + "' contains a separator");
    }
    if (i > 0) out += ',';
    out += fields[i];
  }
  return out;
}

std::string format_real(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw ConfigError("cannot format real");
  return std::string(buf, ptr);
}

double parse_real(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("invalid number '" + std::string(s) + "'");
  }
  return x;
}

std::size_t parse_count(std::string_view s) {
  std::size_t x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("invalid count '" + std::string(s) + "'");
  }
  return x;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ConfigError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace tempofield
