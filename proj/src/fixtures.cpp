#include "tempofield/fixtures.hpp"

#include <cmath>
#include <fstream>

#include "tempofield/bench.hpp"
#include "tempofield/csv.hpp"
#include "tempofield/error.hpp"
#include "tempofield/ingest.hpp"

namespace tempofield {

namespace {
const std::vector<std::string> kFixtureHeader = {"table", "dataset", "model", "key", "value"};
}

std::size_t PublishedCells::snapshots_of(const std::string& dataset) const {
  for (const auto& d : datasets) {
    if (d.name == dataset) return d.snapshots;
  }
  throw ConfigError("fixture has no dataset '" + dataset + "'");
}

PublishedCells read_published_cells(std::istream& in) {
  const CsvTable table = read_csv(in, kFixtureHeader);
  PublishedCells cells;
  auto dataset_row = [&](const std::string& name) -> PublishedCells::DatasetRow& {
    for (auto& d : cells.datasets) {
      if (d.name == name) return d;
    }
    cells.datasets.push_back({});
    cells.datasets.back().name = name;
    return cells.datasets.back();
  };
  for (const auto& r : table.rows) {
    const std::string& tab = r[0];
    const std::string& dataset = r[1];
    const std::string& key = r[3];
    const std::string& value = r[4];
    if (tab == "datasets") {
      auto& d = dataset_row(dataset);
      if (key == "domain") d.domain = value;
      else if (key == "nodes") d.nodes = parse_count(value);
      else if (key == "links") d.links = parse_count(value);
      else if (key == "snapshots") d.snapshots = parse_count(value);
      else if (key == "duration") d.duration = value;
      else throw ParseError("unknown dataset key '" + key + "'");
      continue;
    }
    const Arch arch = parse_arch(r[2]);
    if (tab == "tau_inf_vs_tau_1" || tab == "optimal_tau") {
      if (dataset.empty()) {
        if (key != "avg_gain") throw ParseError("row without dataset: " + key);
        cells.avg_gain[arch] = parse_real(value);
        continue;
      }
      auto& c = cells.cells[dataset][arch];
      if (key == "ap_inf") c.ap_inf = parse_real(value);
      else if (key == "ap_1") c.ap_1 = parse_real(value);
      else if (key == "ap_star") c.ap_star = parse_real(value);
      else if (key == "tau_star") c.tau_star = Tau::parse(value);
      else throw ParseError("unknown result key '" + key + "'");
    } else if (tab == "snapshot_correlation") {
      cells.correlation[arch] = parse_real(value);
    } else {
      throw ParseError("unknown fixture table '" + tab + "'");
    }
  }
  return cells;
}

PublishedCells load_published_cells(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read fixture " + path.string());
  return read_published_cells(in);
}

std::filesystem::path default_fixture_path() { return TEMPOFIELD_DEFAULT_FIXTURE; }

std::vector<SweepResult> published_sweeps(const PublishedCells& cells, Arch arch) {
  std::vector<SweepResult> sweeps;
  for (const auto& d : cells.datasets) {
    auto it = cells.cells.find(d.name);
    if (it == cells.cells.end() || !it->second.contains(arch)) continue;
    const auto& c = it->second.at(arch);
    std::vector<Tau> grid = {Tau::finite(1)};
    std::vector<std::vector<double>> aps = {{c.ap_1 / 100.0}};
    if (c.tau_star != Tau::finite(1) && !c.tau_star.is_infinite()) {
      grid.push_back(c.tau_star);
      aps.push_back({c.ap_star / 100.0});
    }
    grid.push_back(Tau::infinite());
    aps.push_back({c.ap_inf / 100.0});
    sweeps.push_back(aggregate_sweep(d.name, arch, d.snapshots, grid, aps));
  }
  return sweeps;
}

std::vector<FixtureCheck> run_fixture_checks(const PublishedCells& cells) {
  std::vector<FixtureCheck> checks;
  auto add = [&](std::string name, double expected, double actual, double tol) {
    checks.push_back({std::move(name), expected, actual, tol, std::abs(expected - actual) <= tol});
  };

  for (const auto& d : cells.datasets) {
    const DatasetSpec* spec = find_dataset(d.name);
    if (spec == nullptr) {
      add("registry has " + d.name, 1, 0, 0);
      continue;
    }
    add("registry nodes " + d.name, static_cast<double>(d.nodes),
        static_cast<double>(spec->expected_nodes.value_or(0)), 0);
    add("registry links " + d.name, static_cast<double>(d.links),
        static_cast<double>(spec->expected_links.value_or(0)), 0);
    add("registry snapshots " + d.name, static_cast<double>(d.snapshots),
        static_cast<double>(spec->expected_snapshots.value_or(0)), 0);
  }

  const SnapshotCount count = [&](const SweepResult& s) { return cells.snapshots_of(s.dataset); };
  for (const auto& [arch, r] : cells.correlation) {
    const auto sweeps = published_sweeps(cells, arch);
    const AnalysisRow row = snapshot_correlation(sweeps, count);
    add("snapshot correlation " + std::string(arch_name(arch)), r,
        row.correlation.value_or(std::nan("")), 0.01);
  }
  for (const auto& [arch, g] : cells.avg_gain) {
    const auto sweeps = published_sweeps(cells, arch);
    add("avg gain " + std::string(arch_name(arch)), g, avg_gain(sweeps), 0.01);
  }
  return checks;
}

void write_published_tables(const PublishedCells& cells, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string summary = csv_line(kSummaryHeader) + "\n";
  for (const auto& d : cells.datasets) {
    auto it = cells.cells.find(d.name);
    if (it == cells.cells.end()) continue;
    for (Arch arch : all_archs()) {
      if (!it->second.contains(arch)) continue;
      const auto& c = it->second.at(arch);
      summary += csv_line({d.name, std::string(arch_name(arch)), std::to_string(d.snapshots),
                           c.tau_star.to_string(), format_real(c.ap_star / 100.0),
                           c.tau_star.to_string(), format_real(c.ap_inf / 100.0),
                           format_real(c.ap_1 / 100.0), format_real(c.ap_star - c.ap_inf)}) +
                 "\n";
    }
  }
  std::string analysis = csv_line(kAnalysisHeader) + "\n";
  for (Arch arch : all_archs()) {
    auto g = cells.avg_gain.find(arch);
    if (g == cells.avg_gain.end()) continue;
    auto r = cells.correlation.find(arch);
    std::size_t n = 0;
    for (const auto& [_, per_arch] : cells.cells) n += per_arch.contains(arch) ? 1 : 0;
    analysis += csv_line({std::string(arch_name(arch)), std::to_string(n), format_real(g->second),
                          r == cells.correlation.end() ? "" : format_real(r->second),
                          "published"}) +
                "\n";
  }
  write_file_atomically(dir / "summary.csv", summary);
  write_file_atomically(dir / "analysis.csv", analysis);
}

}  // namespace tempofield
