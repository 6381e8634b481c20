#include "tempofield/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>

#include "tempofield/bench.hpp"
#include "tempofield/error.hpp"
#include "tempofield/models.hpp"

namespace tempofield {

namespace fs = std::filesystem;

std::string format_gain(double points) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f", points);
  return buf;
}

std::string format_ap(double ap) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", ap * 100.0);
  return buf;
}

namespace {

struct Cell {
  double ap_inf = 0.0;
  double ap_1 = 0.0;
  double ap_star = 0.0;
  std::string tau_star;
  std::string ties;
};

// Left-aligned first column, right-aligned rest.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string pad(width[i] - r[i].size(), ' ');
      if (i == 0) {
        line += r[i] + pad;
      } else {
        line += "  " + pad + r[i];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace

Report render_report(const CsvTable& summary, const CsvTable& analysis) {
  if (summary.header != kSummaryHeader) throw ParseError("summary table has the wrong schema");
  if (analysis.header != kAnalysisHeader) throw ParseError("analysis table has the wrong schema");

  std::vector<std::string> datasets;
  std::vector<Arch> present;
  std::map<std::pair<std::string, Arch>, Cell> cells;
  for (const auto& r : summary.rows) {
    const Arch arch = parse_arch(r[1]);
    if (std::find(datasets.begin(), datasets.end(), r[0]) == datasets.end()) datasets.push_back(r[0]);
    if (std::find(present.begin(), present.end(), arch) == present.end()) present.push_back(arch);
    Cell c;
    c.tau_star = r[3];
    c.ap_star = parse_real(r[4]);
    c.ties = r[5];
    c.ap_inf = parse_real(r[6]);
    c.ap_1 = parse_real(r[7]);
    cells[{r[0], arch}] = c;
  }
  std::map<Arch, std::pair<std::string, std::optional<std::string>>> gains;
  for (const auto& r : analysis.rows) {
    const Arch arch = parse_arch(r[0]);
    if (std::find(present.begin(), present.end(), arch) == present.end()) present.push_back(arch);
    gains[arch] = {format_gain(parse_real(r[2])),
                   r[3].empty() ? std::nullopt : std::optional<std::string>(r[3])};
  }
  std::vector<Arch> archs;
  for (Arch a : all_archs()) {
    if (std::find(present.begin(), present.end(), a) != present.end()) archs.push_back(a);
  }

  Report rep;
  rep.csv = csv_line({"table", "dataset", "model", "key", "value"}) + "\n";
  auto emit = [&](const std::string& table, const std::string& dataset, Arch arch,
                  const std::string& key, const std::string& value) {
    rep.csv += csv_line({table, dataset, std::string(arch_name(arch)), key, value}) + "\n";
  };

  // inf vs 1
  std::vector<std::vector<std::string>> t1;
  std::vector<std::string> head = {"dataset"};
  std::vector<std::string> sub = {""};
  for (Arch a : archs) {
    head.push_back(std::string(arch_name(a)));
    head.push_back("");
    sub.push_back("inf");
    sub.push_back("1");
  }
  t1.push_back(head);
  t1.push_back(sub);
  for (const auto& d : datasets) {
    std::vector<std::string> row = {d};
    for (Arch a : archs) {
      auto it = cells.find({d, a});
      if (it == cells.end()) {
        row.insert(row.end(), {"-", "-"});
        continue;
      }
      row.push_back(format_ap(it->second.ap_inf));
      row.push_back(format_ap(it->second.ap_1));
      emit("tau_inf_vs_tau_1", d, a, "ap_inf", format_ap(it->second.ap_inf));
      emit("tau_inf_vs_tau_1", d, a, "ap_1", format_ap(it->second.ap_1));
    }
    t1.push_back(row);
  }

  // inf and tau*
  std::vector<std::vector<std::string>> t2;
  std::vector<std::string> head2 = {"tau", "dataset"};
  for (Arch a : archs) head2.push_back(std::string(arch_name(a)));
  t2.push_back(head2);
  for (const char* block : {"inf", "tau*"}) {
    bool first = true;
    for (const auto& d : datasets) {
      std::vector<std::string> row = {first ? block : "", d};
      first = false;
      for (Arch a : archs) {
        auto it = cells.find({d, a});
        if (it == cells.end()) {
          row.push_back("-");
          continue;
        }
        const Cell& c = it->second;
        if (std::string(block) == "inf") {
          row.push_back(format_ap(c.ap_inf));
          continue;
        }
        std::string s = format_ap(c.ap_star) + " (" + c.tau_star + ")";
        if (c.ties.find(';') != std::string::npos) s += " ties " + c.ties;
        row.push_back(s);
        emit("optimal_tau", d, a, "ap_star", format_ap(c.ap_star));
        emit("optimal_tau", d, a, "tau_star", c.tau_star);
        if (!c.ties.empty()) emit("optimal_tau", d, a, "ties", c.ties);
      }
      t2.push_back(row);
    }
  }
  std::vector<std::string> gain_row = {"", "Avg gain"};
  for (Arch a : archs) {
    auto it = gains.find(a);
    gain_row.push_back(it == gains.end() ? "-" : it->second.first);
    if (it != gains.end()) emit("optimal_tau", "", a, "avg_gain", it->second.first);
  }
  t2.push_back(gain_row);

  // correlation
  std::vector<std::vector<std::string>> t3 = {{"model", "r"}};
  for (Arch a : archs) {
    auto it = gains.find(a);
    if (it == gains.end()) continue;
    std::string r = "N/A";
    if (it->second.second) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", parse_real(*it->second.second));
      r = buf;
      emit("snapshot_correlation", "", a, "r", r);
    }
    t3.push_back({std::string(arch_name(a)), r});
  }

  rep.text = "AP x100, all history (inf) vs last snapshot only (1)\n" + render_table(t1) +
             "\nAP x100 with the optimal window in parentheses\n" + render_table(t2) +
             "\nCorrelation of snapshot count with AP(inf) - AP(1)\n" + render_table(t3);
  return rep;
}

Report render_report_dir(const fs::path& dir) {
  for (const char* f : {"summary.csv", "analysis.csv"}) {
    if (!fs::exists(dir / f)) throw ConfigError("missing " + (dir / f).string());
  }
  return render_report(read_csv_file(dir / "summary.csv", kSummaryHeader),
                       read_csv_file(dir / "analysis.csv", kAnalysisHeader));
}

}  // namespace tempofield
