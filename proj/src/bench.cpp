#include "tempofield/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <ostream>
#include <sstream>
#include <thread>

#include "tempofield/csv.hpp"
#include "tempofield/error.hpp"
#include "tempofield/eval.hpp"

namespace tempofield {

namespace fs = std::filesystem;

namespace {

struct PlannedDataset {
  Dtdg graph;
  std::vector<Tau> grid;
};

struct CellRows {
  std::vector<std::string> runs;    ///< formatted lines, step=mean last
  std::vector<std::string> losses;
  double mean_ap = 0.0;
};

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = (c == ',') ? ';' : ' ';
  }
  return s;
}

std::string header_line(const std::vector<std::string>& header) { return csv_line(header) + "\n"; }

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<CellKey> parse_key(const std::vector<std::string>& f) {
  try {
    return CellKey{f[0], parse_arch(f[1]), Tau::parse(f[2]), parse_count(f[3])};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// Lenient reader for resume: an interrupted append may leave a truncated last
// line, so malformed lines are dropped instead of rejected.
struct PriorRows {
  std::vector<CellKey> order;  ///< first appearance
  std::map<CellKey, CellRows> cells;
  std::map<CellKey, bool> complete;
};

PriorRows read_prior_runs(const fs::path& path) {
  PriorRows prior;
  std::ifstream in(path);
  if (!in) return prior;
  std::string line;
  if (!std::getline(in, line) || split_fields(line) != kRunsHeader) {
    throw ConfigError(path.string() + " does not have the runs.csv schema; refusing to resume");
  }
  while (std::getline(in, line)) {
    if (in.eof()) break;  // no trailing newline: the write was cut short
    const auto f = split_fields(line);
    if (f.size() != kRunsHeader.size()) continue;
    auto key = parse_key(f);
    if (!key) continue;
    if (!prior.cells.contains(*key)) prior.order.push_back(*key);
    auto& cell = prior.cells[*key];
    if (prior.complete[*key]) continue;
    cell.runs.push_back(line);
    if (f[4] == "mean") {
      try {
        cell.mean_ap = parse_real(f[5]);
        prior.complete[*key] = true;
      } catch (const std::exception&) {
      }
    }
  }
  return prior;
}

std::map<CellKey, std::vector<std::string>> read_prior_losses(const fs::path& path) {
  std::map<CellKey, std::vector<std::string>> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  if (!std::getline(in, line) || split_fields(line) != kLossHeader) return out;
  while (std::getline(in, line)) {
    if (in.eof()) break;
    const auto f = split_fields(line);
    if (f.size() != kLossHeader.size()) continue;
    if (auto key = parse_key(f)) out[*key].push_back(line);
  }
  return out;
}

std::vector<std::string> key_fields(const CellKey& k) {
  return {k.dataset, std::string(arch_name(k.arch)), k.tau.to_string(), std::to_string(k.seed)};
}

CellRows format_cell(const CellKey& key, const ExperimentOutcome& out, bool record_wall_time) {
  CellRows rows;
  const auto base = key_fields(key);
  for (const auto& step : out.result.per_step) {
    auto f = base;
    f.push_back(std::to_string(step.t));
    f.push_back(step.ap ? format_real(*step.ap) : "skipped");
    f.push_back("0");
    rows.runs.push_back(csv_line(f));
  }
  auto f = base;
  f.push_back("mean");
  f.push_back(format_real(out.result.mean_ap));
  f.push_back(record_wall_time ? format_real(std::round(out.result.wall_time_ms)) : "0");
  rows.runs.push_back(csv_line(f));
  for (std::size_t e = 0; e < out.loss_curve.size(); ++e) {
    auto l = base;
    l.push_back(std::to_string(e));
    l.push_back(format_real(out.loss_curve[e]));
    rows.losses.push_back(csv_line(l));
  }
  rows.mean_ap = out.result.mean_ap;
  return rows;
}

std::string join_ties(const std::vector<Tau>& ties) {
  std::string s;
  for (const auto& t : ties) s += (s.empty() ? "" : ";") + t.to_string();
  return s;
}

std::string file_stem(const std::string& dataset, Arch arch) {
  std::string s = dataset + "__" + std::string(arch_name(arch));
  for (char& c : s) {
    if (c == '/' || c == '\\' || c == ' ') c = '_';
  }
  return s;
}

// Serializes every write to runs.csv and losses.csv.
class Writer {
 public:
  Writer(const fs::path& runs, std::optional<fs::path> losses)
      : runs_(runs, std::ios::app), losses_path_(std::move(losses)) {
    if (!runs_) throw ConfigError("cannot append to " + runs.string());
    if (losses_path_) losses_.open(*losses_path_, std::ios::app);
  }

  void append(const CellRows& rows) {
    std::lock_guard lock(mu_);
    std::string block;
    for (const auto& r : rows.runs) block += r + "\n";
    runs_ << block << std::flush;
    if (losses_.is_open()) {
      std::string lb;
      for (const auto& r : rows.losses) lb += r + "\n";
      losses_ << lb << std::flush;
    }
  }

 private:
  std::mutex mu_;
  std::ofstream runs_;
  std::optional<fs::path> losses_path_;
  std::ofstream losses_;
};

}  // namespace

SweepOutcome run_sweep(const RunConfig& config, std::ostream* progress) {
  const fs::path out_dir = config.output_dir;
  fs::create_directories(out_dir / "curves");
  auto log = [&](const std::string& msg) {
    if (progress) *progress << msg << '\n' << std::flush;
  };

  SweepOutcome outcome;
  std::vector<std::vector<std::string>> errors;
  std::vector<std::string> dataset_order;
  std::map<std::string, PlannedDataset> plan;
  for (const auto& name : config.datasets) {
    std::optional<Dtdg> d;
    try {
      d = load_configured_dataset(config, name);
    } catch (const std::exception& e) {
      log("dataset " + name + ": " + e.what());
      errors.push_back({name, "", "", "", sanitize(e.what())});
      ++outcome.cells_failed;
      continue;
    }
    std::vector<Tau> grid =
        config.grid ? *config.grid : default_tau_grid(d->num_snapshots(), config.grid_cap);
    validate_tau_grid(grid, d->num_snapshots());
    dataset_order.push_back(name);
    plan.emplace(name, PlannedDataset{std::move(*d), std::move(grid)});
  }

  std::vector<CellKey> cells;
  for (const auto& name : dataset_order) {
    for (Arch arch : config.archs) {
      for (const Tau& tau : plan.at(name).grid) {
        for (std::size_t seed = 0; seed < config.seeds; ++seed) {
          cells.push_back({name, arch, tau, seed});
        }
      }
    }
  }
  outcome.cells_total = cells.size();
  const std::set<CellKey> planned(cells.begin(), cells.end());

  const fs::path runs_path = out_dir / "runs.csv";
  const fs::path loss_path = out_dir / "losses.csv";
  PriorRows prior = read_prior_runs(runs_path);
  auto prior_losses = config.emit_loss ? read_prior_losses(loss_path)
                                       : std::map<CellKey, std::vector<std::string>>{};

  std::map<CellKey, CellRows> done;
  for (const auto& [key, complete] : prior.complete) {
    if (!complete) continue;
    CellRows rows = prior.cells.at(key);
    if (auto it = prior_losses.find(key); it != prior_losses.end()) rows.losses = it->second;
    done.emplace(key, std::move(rows));
  }
  std::vector<CellKey> foreign;
  for (const auto& key : prior.order) {
    if (done.contains(key) && !planned.contains(key)) {
      foreign.push_back(key);
    }
  }

  auto canonical = [&](bool with_losses) {
    std::string runs = header_line(kRunsHeader);
    std::string losses = header_line(kLossHeader);
    auto emit = [&](const CellKey& key) {
      auto it = done.find(key);
      if (it == done.end()) return;
      for (const auto& r : it->second.runs) runs += r + "\n";
      for (const auto& r : it->second.losses) losses += r + "\n";
    };
    for (const auto& key : cells) emit(key);
    for (const auto& key : foreign) emit(key);
    write_file_atomically(runs_path, runs);
    if (with_losses) write_file_atomically(loss_path, losses);
  };
  canonical(config.emit_loss);

  std::vector<CellKey> pending;
  for (const auto& key : cells) {
    if (done.contains(key)) {
      ++outcome.cells_resumed;
    } else {
      pending.push_back(key);
    }
  }
  if (outcome.cells_resumed > 0) {
    log("resuming: " + std::to_string(outcome.cells_resumed) + " of " +
        std::to_string(cells.size()) + " units already complete");
  }

  Writer writer(runs_path, config.emit_loss ? std::optional<fs::path>(loss_path) : std::nullopt);
  std::mutex state_mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pending.size(); i = next++) {
      const CellKey& key = pending[i];
      const PlannedDataset& pd = plan.at(key.dataset);
      ExperimentSpec spec;
      spec.arch = key.arch;
      spec.tau = key.tau;
      spec.seed = key.seed;
      spec.master_seed = config.master_seed;
      spec.train_fraction = config.split;
      spec.hyper = config.hyper;
      spec.training = config.training;
      const std::string label = key.dataset + " " + std::string(arch_name(key.arch)) +
                                " tau=" + key.tau.to_string() + " seed=" + std::to_string(key.seed);
      try {
        CellRows rows = format_cell(key, run_experiment(pd.graph, spec), config.record_wall_time);
        writer.append(rows);
        std::lock_guard lock(state_mu);
        log(label + " ap=" + format_real(rows.mean_ap));
        done.emplace(key, std::move(rows));
        ++outcome.cells_run;
      } catch (const std::exception& e) {
        std::lock_guard lock(state_mu);
        log(label + " failed: " + e.what());
        auto f = key_fields(key);
        f.push_back(sanitize(e.what()));
        errors.push_back(std::move(f));
        ++outcome.cells_failed;
      }
    }
  };
  const std::size_t threads = std::min(config.parallelism, pending.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  canonical(config.emit_loss);

  std::sort(errors.begin(), errors.end());
  std::string err_text = header_line(kErrorsHeader);
  for (const auto& e : errors) err_text += csv_line(e) + "\n";
  write_file_atomically(out_dir / "errors.csv", err_text);

  std::string sweeps_text = header_line(kSweepsHeader);
  std::string summary_text = header_line(kSummaryHeader);
  for (const auto& name : dataset_order) {
    const PlannedDataset& pd = plan.at(name);
    for (Arch arch : config.archs) {
      std::vector<std::vector<double>> aps(pd.grid.size());
      bool complete = true;
      for (std::size_t g = 0; g < pd.grid.size() && complete; ++g) {
        for (std::size_t seed = 0; seed < config.seeds; ++seed) {
          auto it = done.find(CellKey{name, arch, pd.grid[g], seed});
          if (it == done.end()) {
            complete = false;
            break;
          }
          aps[g].push_back(it->second.mean_ap);
        }
      }
      if (!complete) continue;
      SweepResult s = aggregate_sweep(name, arch, pd.graph.num_snapshots(), pd.grid, aps);
      std::string curve = header_line(kCurveHeader);
      for (const auto& row : s.rows) {
        sweeps_text += csv_line({name, std::string(arch_name(arch)), row.tau.to_string(),
                                 format_real(row.mean_ap), format_real(row.stddev),
                                 std::to_string(row.seeds)}) +
                       "\n";
        curve += csv_line({row.tau.to_string(), format_real(row.mean_ap), format_real(row.stddev),
                           std::to_string(row.seeds)}) +
                 "\n";
      }
      summary_text +=
          csv_line({name, std::string(arch_name(arch)), std::to_string(s.num_snapshots),
                    s.tau_star.tau.to_string(), format_real(s.tau_star.ap),
                    join_ties(s.tau_star.ties), format_real(s.ap_inf), format_real(s.ap_1),
                    format_real((s.tau_star.ap - s.ap_inf) * 100.0)}) +
          "\n";
      const std::string stem = file_stem(name, arch);
      write_file_atomically(out_dir / "curves" / (stem + ".csv"), curve);
      if (config.svg) write_file_atomically(out_dir / "curves" / (stem + ".svg"), render_curve_svg(s));
      outcome.sweeps.push_back(std::move(s));
    }
  }
  write_file_atomically(out_dir / "sweeps.csv", sweeps_text);
  write_file_atomically(out_dir / "summary.csv", summary_text);

  outcome.analysis =
      analyze(outcome.sweeps, [](const SweepResult& s) { return s.num_snapshots; });
  std::string analysis_text = header_line(kAnalysisHeader);
  for (const auto& row : outcome.analysis) {
    analysis_text += csv_line({std::string(arch_name(row.arch)), std::to_string(row.datasets),
                               format_real(row.avg_gain),
                               row.correlation ? format_real(*row.correlation) : "",
                               sanitize(row.note)}) +
                     "\n";
  }
  write_file_atomically(out_dir / "analysis.csv", analysis_text);
  return outcome;
}

std::string render_curve_svg(const SweepResult& sweep) {
  constexpr double kW = 480, kH = 320, kLeft = 50, kRight = 20, kTop = 30, kBottom = 40;
  std::vector<std::pair<double, double>> pts;
  std::optional<double> inf_ap;
  double lo = 100.0, hi = 0.0;
  for (const auto& r : sweep.rows) {
    const double ap = r.mean_ap * 100.0;
    lo = std::min(lo, ap);
    hi = std::max(hi, ap);
    if (r.tau.is_infinite()) {
      inf_ap = ap;
    } else {
      pts.emplace_back(static_cast<double>(r.tau.value()), ap);
    }
  }
  if (hi - lo < 1.0) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double max_tau = pts.empty() ? 1.0 : std::max(pts.back().first, 2.0);
  auto x = [&](double t) { return kLeft + (t - 1.0) / (max_tau - 1.0) * (kW - kLeft - kRight); };
  auto y = [&](double ap) { return kTop + (hi - ap) / (hi - lo) * (kH - kTop - kBottom); };

  std::ostringstream svg;
  svg.precision(4);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<text x=\"" << kLeft << "\" y=\"18\">" << sweep.dataset << " / "
      << arch_name(sweep.arch) << "</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
      << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kH - kBottom << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"" << kH - 8 << "\">tau</text>\n";
  svg << "<text x=\"4\" y=\"" << kTop + 4 << "\">" << std::fixed << hi << "</text>\n";
  svg << "<text x=\"4\" y=\"" << kH - kBottom << "\">" << lo << "</text>\n";
  svg.unsetf(std::ios::fixed);
  if (inf_ap) {
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << y(*inf_ap) << "\" x2=\"" << kW - kRight
        << "\" y2=\"" << y(*inf_ap) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    svg << "<text x=\"" << kW - kRight - 20 << "\" y=\"" << y(*inf_ap) - 4 << "\">inf</text>\n";
  }
  if (!pts.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& [t, ap] : pts) svg << x(t) << "," << y(ap) << " ";
    svg << "\"/>\n";
    for (const auto& [t, ap] : pts) {
      svg << "<circle cx=\"" << x(t) << "\" cy=\"" << y(ap) << "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace tempofield
