#include "tempofield/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tempofield/error.hpp"
#include "tempofield/ingest.hpp"

namespace tempofield {

std::vector<Tau> default_tau_grid(std::size_t num_snapshots, std::size_t cap) {
  std::vector<Tau> grid;
  const std::size_t top = std::min(num_snapshots > 0 ? num_snapshots - 1 : 0, cap);
  for (std::size_t k = 1; k <= top; ++k) grid.push_back(Tau::finite(k));
  if (grid.empty()) grid.push_back(Tau::finite(1));
  grid.push_back(Tau::infinite());
  return grid;
}

void validate_tau_grid(std::span<const Tau> grid, std::optional<std::size_t> num_snapshots) {
  if (grid.empty()) throw ConfigError("tau grid is empty");
  std::set<Tau> seen;
  for (const Tau& t : grid) {
    if (!seen.insert(t).second) throw ConfigError("tau " + t.to_string() + " listed twice");
    if (num_snapshots && !t.is_infinite() && t.value() + 1 > *num_snapshots) {
      throw ConfigError("tau " + t.to_string() + " exceeds T-1 = " + std::to_string(*num_snapshots - 1));
    }
  }
  if (!seen.contains(Tau::finite(1))) throw ConfigError("tau grid must contain 1");
  if (!seen.contains(Tau::infinite())) throw ConfigError("tau grid must contain inf");
}

SweepResult aggregate_sweep(const std::string& dataset, Arch arch, std::size_t num_snapshots,
                            std::span<const Tau> grid,
                            const std::vector<std::vector<double>>& per_seed_ap) {
  validate_tau_grid(grid, std::nullopt);
  if (per_seed_ap.size() != grid.size()) throw ConfigError("one AP list per tau expected");
  SweepResult result;
  result.dataset = dataset;
  result.arch = arch;
  result.num_snapshots = num_snapshots;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& aps = per_seed_ap[i];
    if (aps.empty()) throw ConfigError("tau " + grid[i].to_string() + " has no completed seed");
    SweepRow row;
    row.tau = grid[i];
    row.seeds = aps.size();
    // Offsets from the first seed keep equal APs exact (zero spread).
    double offset = 0.0;
    for (double a : aps) offset += a - aps.front();
    row.mean_ap = aps.front() + offset / static_cast<double>(aps.size());
    if (aps.size() > 1) {
      double ss = 0.0;
      for (double a : aps) ss += (a - row.mean_ap) * (a - row.mean_ap);
      row.stddev = std::sqrt(ss / static_cast<double>(aps.size() - 1));
    }
    result.rows.push_back(row);
    if (grid[i] == Tau::infinite()) result.ap_inf = row.mean_ap;
    if (grid[i] == Tau::finite(1)) result.ap_1 = row.mean_ap;
  }
  result.tau_star = select_tau_star(result.rows);
  return result;
}

SweepResult sweep_tau(const std::string& dataset, Arch arch, std::span<const Tau> grid,
                      std::size_t seeds, const SweepRunner& runner,
                      std::optional<std::size_t> num_snapshots) {
  validate_tau_grid(grid, num_snapshots);
  if (seeds == 0) throw ConfigError("sweep needs at least one seed");
  std::vector<std::vector<double>> aps(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t s = 0; s < seeds; ++s) aps[i].push_back(runner(grid[i], s));
  }
  return aggregate_sweep(dataset, arch, num_snapshots.value_or(0), grid, aps);
}

TauStar select_tau_star(std::span<const SweepRow> rows) {
  if (rows.empty()) throw ConfigError("cannot select tau* from no rows");
  double best = rows[0].mean_ap;
  for (const auto& r : rows) best = std::max(best, r.mean_ap);
  TauStar star;
  for (const auto& r : rows) {
    if (best - r.mean_ap <= kTieTolerance) star.ties.push_back(r.tau);
  }
  std::sort(star.ties.begin(), star.ties.end());
  star.tau = star.ties.front();
  for (const auto& r : rows) {
    if (r.tau == star.tau) star.ap = r.mean_ap;
  }
  return star;
}

double avg_gain(std::span<const SweepResult> sweeps) {
  if (sweeps.empty()) throw ConfigError("average gain needs at least one sweep");
  double sum = 0.0;
  for (const auto& s : sweeps) sum += s.tau_star.ap - s.ap_inf;
  return 100.0 * sum / static_cast<double>(sweeps.size());
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DegenerateInputError("correlation inputs differ in length");
  if (x.size() < 3) throw DegenerateInputError("correlation needs at least 3 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInputError("correlation of a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::size_t registry_snapshot_count(const SweepResult& s) {
  if (const DatasetSpec* spec = find_dataset(s.dataset); spec && spec->expected_snapshots) {
    return *spec->expected_snapshots;
  }
  return s.num_snapshots;
}

AnalysisRow snapshot_correlation(std::span<const SweepResult> sweeps, const SnapshotCount& count) {
  AnalysisRow row;
  if (sweeps.empty()) throw ConfigError("snapshot correlation needs sweeps");
  row.arch = sweeps.front().arch;
  row.datasets = sweeps.size();
  row.avg_gain = avg_gain(sweeps);
  std::vector<double> x, y;
  for (const auto& s : sweeps) {
    if (s.arch != row.arch) throw ConfigError("snapshot correlation mixes architectures");
    x.push_back(static_cast<double>(count(s)));
    y.push_back(s.ap_inf - s.ap_1);
  }
  try {
    row.correlation = pearson_correlation(x, y);
  } catch (const DegenerateInputError& e) {
    row.note = e.what();
  }
  return row;
}

std::vector<AnalysisRow> analyze(std::span<const SweepResult> sweeps, const SnapshotCount& count) {
  std::vector<AnalysisRow> rows;
  for (Arch a : all_archs()) {
    std::vector<SweepResult> mine;
    for (const auto& s : sweeps) {
      if (s.arch == a) mine.push_back(s);
    }
    if (!mine.empty()) rows.push_back(snapshot_correlation(mine, count));
  }
  return rows;
}

}  // namespace tempofield
