#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tempofield/dtdg.hpp"
#include "tempofield/models.hpp"
#include "tempofield/sweep.hpp"

namespace tempofield {

/// Published dataset statistics and result cells, read from the fixture file
/// data/published_cells.csv (columns table,dataset,model,key,value; AP x100).
struct PublishedCells {
  struct DatasetRow {
    std::string name;
    std::string domain;
    std::size_t nodes = 0;
    std::size_t links = 0;
    std::size_t snapshots = 0;
    std::string duration;
  };
  struct Cell {
    double ap_inf = 0.0;   ///< all history
    double ap_1 = 0.0;     ///< last snapshot only
    double ap_star = 0.0;  ///< best window
    Tau tau_star = Tau::infinite();
  };

  std::vector<DatasetRow> datasets;               ///< file order
  std::map<std::string, std::map<Arch, Cell>> cells;
  std::map<Arch, double> avg_gain;                ///< published, points
  std::map<Arch, double> correlation;             ///< published Pearson r

  std::size_t snapshots_of(const std::string& dataset) const;
};

PublishedCells read_published_cells(std::istream& in);
PublishedCells load_published_cells(const std::filesystem::path& path);
/// Path of the fixture shipped with the sources.
std::filesystem::path default_fixture_path();

/// SweepResults rebuilt from the published cells of one architecture: rows
/// for tau = 1, the published tau* and infinity (AP scaled to [0, 1]).
std::vector<SweepResult> published_sweeps(const PublishedCells& cells, Arch arch);

struct FixtureCheck {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Arithmetic regressions on the published numbers: registry vs dataset
/// table, per-arch snapshot correlation (+-0.01) and average gain (+-0.01).
std::vector<FixtureCheck> run_fixture_checks(const PublishedCells& cells);

/// Writes the published cells as summary.csv and analysis.csv into `dir`,
/// so the report renderer can lay them out. Avg gain and r are the
/// published values, not recomputed.
void write_published_tables(const PublishedCells& cells, const std::filesystem::path& dir);

}  // namespace tempofield
