#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tempofield/config.hpp"
#include "tempofield/sweep.hpp"

namespace tempofield {

// Output schemas. AP columns hold values in [0, 1]; gain columns are points.
inline const std::vector<std::string> kRunsHeader = {"dataset", "arch", "tau",          "seed",
                                                     "step",    "ap",   "wall_time_ms"};
inline const std::vector<std::string> kSweepsHeader = {"dataset", "arch",   "tau",
                                                       "mean_ap", "stddev", "seeds"};
inline const std::vector<std::string> kSummaryHeader = {
    "dataset", "arch", "num_snapshots", "tau_star", "ap_star", "ties", "ap_inf", "ap_1", "gain"};
inline const std::vector<std::string> kAnalysisHeader = {"arch", "datasets", "avg_gain",
                                                         "correlation", "note"};
inline const std::vector<std::string> kErrorsHeader = {"dataset", "arch", "tau", "seed", "error"};
inline const std::vector<std::string> kCurveHeader = {"tau", "mean_ap", "stddev", "seeds"};
inline const std::vector<std::string> kLossHeader = {"dataset", "arch", "tau",
                                                     "seed",    "epoch", "loss"};

/// One (dataset, arch, tau, seed) experiment unit.
struct CellKey {
  std::string dataset;
  Arch arch = Arch::kEdgeBank;
  Tau tau = Tau::infinite();
  std::size_t seed = 0;

  bool operator==(const CellKey&) const = default;
  auto operator<=>(const CellKey&) const = default;
};

struct SweepOutcome {
  std::size_t cells_total = 0;
  std::size_t cells_resumed = 0;  ///< already complete in runs.csv
  std::size_t cells_run = 0;
  std::size_t cells_failed = 0;
  std::vector<SweepResult> sweeps;
  std::vector<AnalysisRow> analysis;

  int exit_code() const { return cells_failed == 0 ? 0 : 3; }
};

/// Runs every unit of the config into config.output_dir:
///   runs.csv      per-step AP rows plus a step=mean row per unit ("skipped"
///                 marks steps whose target had no edges)
///   sweeps.csv    seed-aggregated AP per (dataset, arch, tau)
///   summary.csv   tau*, argmax ties (';'-separated), ap_inf, ap_1, gain
///   analysis.csv  average gain and snapshot correlation per arch
///   curves/       one (tau, AP) CSV per (dataset, arch), plus SVG on request
///   errors.csv    failed units
///   losses.csv    per-epoch training loss when emit_loss is set
/// Units whose step=mean row is already in runs.csv are not rerun; partial
/// units left by an interruption are dropped and recomputed. Throws
/// ConfigError for an invalid grid.
SweepOutcome run_sweep(const RunConfig& config, std::ostream* progress = nullptr);

/// Static line chart of AP (x100) against finite tau, with the infinite
/// window as a dashed reference line.
std::string render_curve_svg(const SweepResult& sweep);

}  // namespace tempofield
