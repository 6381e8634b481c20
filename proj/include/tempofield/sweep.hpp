#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tempofield/dtdg.hpp"
#include "tempofield/models.hpp"

namespace tempofield {

/// Seed-aggregated result of one tau. AP in [0, 1].
struct SweepRow {
  Tau tau = Tau::infinite();
  double mean_ap = 0.0;
  double stddev = 0.0;  ///< sample standard deviation over seeds, 0 for one seed
  std::size_t seeds = 0;
};

struct TauStar {
  Tau tau = Tau::infinite();
  double ap = 0.0;
  std::vector<Tau> ties;  ///< every tau within kTieTolerance of the best AP
};

inline constexpr double kTieTolerance = 1e-12;

struct SweepResult {
  std::string dataset;
  Arch arch = Arch::kEdgeBank;
  std::size_t num_snapshots = 0;
  std::vector<SweepRow> rows;  ///< grid order
  TauStar tau_star;
  double ap_inf = 0.0;
  double ap_1 = 0.0;
};

/// All integers 1..min(T-1, cap) followed by the infinite window.
std::vector<Tau> default_tau_grid(std::size_t num_snapshots, std::size_t cap = 12);

/// Throws ConfigError when the grid is empty, repeats a tau, misses the 1 or
/// infinite anchors, or (with num_snapshots given) exceeds T-1.
void validate_tau_grid(std::span<const Tau> grid, std::optional<std::size_t> num_snapshots);

/// Mean AP of one trained-and-evaluated run.
using SweepRunner = std::function<double(Tau tau, std::size_t seed)>;

SweepResult sweep_tau(const std::string& dataset, Arch arch, std::span<const Tau> grid,
                      std::size_t seeds, const SweepRunner& runner,
                      std::optional<std::size_t> num_snapshots = std::nullopt);

/// Aggregates per-seed mean APs (outer index follows the grid) into a
/// SweepResult; the anchors are required.
SweepResult aggregate_sweep(const std::string& dataset, Arch arch, std::size_t num_snapshots,
                            std::span<const Tau> grid,
                            const std::vector<std::vector<double>>& per_seed_ap);

/// Highest AP; ties go to the smallest finite tau, infinity last.
TauStar select_tau_star(std::span<const SweepRow> rows);

/// Mean over sweeps of (ap(tau*) - ap(inf)), in AP x 100 points.
double avg_gain(std::span<const SweepResult> sweeps);

/// Sample Pearson coefficient. Throws DegenerateInputError for fewer than 3
/// points, mismatched lengths, or a constant input.
double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Per-architecture analysis row.
struct AnalysisRow {
  Arch arch = Arch::kEdgeBank;
  std::size_t datasets = 0;
  double avg_gain = 0.0;             ///< points
  std::optional<double> correlation; ///< nullopt when undefined
  std::string note;
};

using SnapshotCount = std::function<std::size_t(const SweepResult&)>;

/// Snapshot count from the dataset registry, falling back to the sweep's own.
std::size_t registry_snapshot_count(const SweepResult& s);

/// Pearson r between each dataset's snapshot count and (ap_inf - ap_1) for
/// the sweeps of one architecture. Degenerate inputs yield a row with no r.
AnalysisRow snapshot_correlation(std::span<const SweepResult> sweeps,
                                 const SnapshotCount& count = registry_snapshot_count);

/// One row per architecture present, in all_archs() order.
std::vector<AnalysisRow> analyze(std::span<const SweepResult> sweeps,
                                 const SnapshotCount& count = registry_snapshot_count);

}  // namespace tempofield
