#pragma once

#include <filesystem>
#include <string>

#include "tempofield/csv.hpp"

namespace tempofield {

struct Report {
  std::string text;  ///< aligned plain-text tables
  std::string csv;   ///< table,dataset,model,key,value rows, AP x100
};

/// Renders summary.csv and analysis.csv contents (schemas from bench.hpp):
/// the inf-vs-1 table, the inf / tau* table with "(tau)" suffixes and the
/// average gain row, and the snapshot correlation column. Pure function of
/// its inputs.
Report render_report(const CsvTable& summary, const CsvTable& analysis);

/// Reads <dir>/summary.csv and <dir>/analysis.csv; ConfigError when absent.
Report render_report_dir(const std::filesystem::path& dir);

/// "+3.40" style signed two-decimal text.
std::string format_gain(double points);
/// Two decimals of ap * 100.
std::string format_ap(double ap);

}  // namespace tempofield
