#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "tempofield/bench.hpp"
#include "tempofield/error.hpp"
#include "tempofield/fixtures.hpp"
#include "tempofield/report.hpp"
#include "tempofield/sweep.hpp"

using namespace tempofield;

namespace {

std::vector<Tau> taus(std::initializer_list<std::size_t> finite, bool inf = true) {
  std::vector<Tau> out;
  for (std::size_t t : finite) out.push_back(Tau::finite(t));
  if (inf) out.push_back(Tau::infinite());
  return out;
}

SweepResult sweep_with(std::string dataset, Arch arch, std::size_t T, double ap_1, double ap_inf,
                       std::optional<std::pair<std::size_t, double>> best = std::nullopt) {
  std::vector<Tau> grid = {Tau::finite(1)};
  std::vector<std::vector<double>> ap = {{ap_1}};
  if (best) {
    grid.push_back(Tau::finite(best->first));
    ap.push_back({best->second});
  }
  grid.push_back(Tau::infinite());
  ap.push_back({ap_inf});
  return aggregate_sweep(dataset, arch, T, grid, ap);
}

}  // namespace

TEST(TauGrid, DefaultCappedWithAnchors) {
  EXPECT_EQ(default_tau_grid(5), taus({1, 2, 3, 4}));
  EXPECT_EQ(default_tau_grid(40).size(), 13u);
  EXPECT_EQ(default_tau_grid(40, 3), taus({1, 2, 3}));
}

TEST(TauGrid, Validation) {
  EXPECT_NO_THROW(validate_tau_grid(taus({1, 3}), 10));
  EXPECT_THROW(validate_tau_grid(taus({1}, false), std::nullopt), ConfigError);
  EXPECT_THROW(validate_tau_grid(taus({2}), std::nullopt), ConfigError);
  EXPECT_THROW(validate_tau_grid(taus({1, 1}), std::nullopt), ConfigError);
  EXPECT_THROW(validate_tau_grid({}, std::nullopt), ConfigError);
  EXPECT_THROW(validate_tau_grid(taus({1, 10}), 10), ConfigError);
}

TEST(TauStar, TieBreaksToSmallestFinite) {
  const std::vector<SweepRow> rows = {{Tau::finite(5), 0.905, 0, 1},
                                      {Tau::finite(1), 0.905, 0, 1},
                                      {Tau::infinite(), 0.897, 0, 1}};
  const TauStar s = select_tau_star(rows);
  EXPECT_EQ(s.tau, Tau::finite(1));
  EXPECT_EQ(s.ap, 0.905);
  EXPECT_EQ(s.ties, taus({1, 5}, false));
}

TEST(TauStar, InfinityLastAndSingleRow) {
  const std::vector<SweepRow> tie = {{Tau::infinite(), 0.5, 0, 1}, {Tau::finite(3), 0.5, 0, 1}};
  EXPECT_EQ(select_tau_star(tie).tau, Tau::finite(3));
  const std::vector<SweepRow> one = {{Tau::infinite(), 0.7, 0, 1}};
  EXPECT_EQ(select_tau_star(one).tau, Tau::infinite());
  EXPECT_EQ(select_tau_star(one).ap, 0.7);
}

TEST(SweepTau, DeterministicRunnerHasZeroVariance) {
  std::size_t calls = 0;
  const auto r = sweep_tau("d", Arch::kEdgeBank, taus({1, 2}), 3, [&](Tau t, std::size_t) {
    ++calls;
    return t.is_infinite() ? 0.6 : 0.8 / static_cast<double>(t.value());
  });
  EXPECT_EQ(calls, 9u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.stddev, 0.0);
    EXPECT_EQ(row.seeds, 3u);
  }
  EXPECT_EQ(r.ap_1, 0.8);
  EXPECT_EQ(r.ap_inf, 0.6);
  EXPECT_EQ(r.tau_star.tau, Tau::finite(1));
  EXPECT_THROW(sweep_tau("d", Arch::kEdgeBank, taus({1}, false), 1, [](Tau, std::size_t) { return 0.0; }),
               ConfigError);
}

TEST(SweepTau, SampleStddevOverSeeds) {
  const auto r = sweep_tau("d", Arch::kGclstm, taus({1}), 3,
                           [](Tau, std::size_t seed) { return 0.5 + 0.1 * static_cast<double>(seed); });
  EXPECT_NEAR(r.rows[0].mean_ap, 0.6, 1e-15);
  EXPECT_NEAR(r.rows[0].stddev, 0.1, 1e-15);
}

TEST(AvgGain, Examples) {
  const std::vector<SweepResult> inf_best = {sweep_with("a", Arch::kEgcn, 5, 0.4, 0.9),
                                             sweep_with("b", Arch::kEgcn, 5, 0.1, 0.2)};
  EXPECT_EQ(avg_gain(inf_best), 0.0);
  // Gains of 2 and 4 points.
  const std::vector<SweepResult> pair = {sweep_with("a", Arch::kEgcn, 5, 0.52, 0.50),
                                         sweep_with("b", Arch::kEgcn, 5, 0.10, 0.20, {{3, 0.24}})};
  EXPECT_NEAR(avg_gain(pair), 3.0, 1e-12);
}

TEST(Pearson, Examples) {
  const std::vector<double> a = {1, 2, 3}, b = {3, 2, 1};
  EXPECT_NEAR(pearson_correlation(a, a), 1.0, 1e-15);
  EXPECT_NEAR(pearson_correlation(a, b), -1.0, 1e-15);
  const std::vector<double> x = {1, 2, 4}, y = {2, 3, 9};
  // cov = sum (x - 7/3)(y - 14/3); sx^2 = sum (x - 7/3)^2; sy^2 = sum (y - 14/3)^2
  const double cov = (-4.0 / 3) * (-8.0 / 3) + (-1.0 / 3) * (-5.0 / 3) + (5.0 / 3) * (13.0 / 3);
  const double sx = (16.0 + 1.0 + 25.0) / 9.0, sy = (64.0 + 25.0 + 169.0) / 9.0;
  EXPECT_NEAR(pearson_correlation(x, y), cov / std::sqrt(sx * sy), 1e-14);
}

TEST(Pearson, DegenerateInputs) {
  const std::vector<double> two = {1, 2}, c = {5, 5, 5}, v = {1, 2, 3}, four = {1, 2, 3, 4};
  EXPECT_THROW(pearson_correlation(two, two), DegenerateInputError);
  EXPECT_THROW(pearson_correlation(c, v), DegenerateInputError);
  EXPECT_THROW(pearson_correlation(v, four), DegenerateInputError);
}

TEST(SnapshotCorrelation, ZeroGainsAreNotApplicable) {
  const std::vector<SweepResult> s = {sweep_with("a", Arch::kDysat, 5, 0.5, 0.5),
                                      sweep_with("b", Arch::kDysat, 9, 0.7, 0.7),
                                      sweep_with("c", Arch::kDysat, 14, 0.2, 0.2)};
  const AnalysisRow row = snapshot_correlation(s);
  EXPECT_FALSE(row.correlation.has_value());
  EXPECT_FALSE(row.note.empty());
  EXPECT_EQ(row.datasets, 3u);
}

TEST(SnapshotCorrelation, UsesSnapshotCounts) {
  const std::vector<SweepResult> s = {sweep_with("a", Arch::kDysat, 5, 0.5, 0.51),
                                      sweep_with("b", Arch::kDysat, 9, 0.5, 0.53),
                                      sweep_with("c", Arch::kDysat, 14, 0.5, 0.59)};
  const std::vector<double> x = {5, 9, 14}, y = {0.01, 0.03, 0.09};
  EXPECT_NEAR(*snapshot_correlation(s).correlation, pearson_correlation(x, y), 1e-12);
}

class Published : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { cells_ = load_published_cells(default_fixture_path()); }
  static PublishedCells cells_;
};
PublishedCells Published::cells_;

TEST_F(Published, FixtureShape) {
  EXPECT_EQ(cells_.datasets.size(), 10u);
  EXPECT_EQ(cells_.cells.size(), 10u);
  EXPECT_EQ(cells_.snapshots_of("Enron"), 11u);
  const auto& unvote = cells_.cells.at("UNVote").at(Arch::kEdgeBank);
  EXPECT_EQ(unvote.ap_1, 97.30);
  EXPECT_EQ(unvote.ap_inf, 61.17);
  EXPECT_EQ(unvote.tau_star, Tau::finite(1));
}

TEST_F(Published, CanParlEgcnPicksTauOne) {
  const auto sweeps = published_sweeps(cells_, Arch::kEgcn);
  const auto it = std::find_if(sweeps.begin(), sweeps.end(), [](const auto& s) { return s.dataset == "CanParl"; });
  ASSERT_NE(it, sweeps.end());
  EXPECT_EQ(it->tau_star.tau, Tau::finite(1));
  EXPECT_NEAR(it->tau_star.ap, 0.9056, 1e-12);
}

TEST_F(Published, SnapshotCorrelationsMatch) {
  const std::pair<Arch, double> expected[] = {{Arch::kDysat, 0.85}, {Arch::kEgcn, -0.19},
                                              {Arch::kGclstm, -0.43}, {Arch::kStgcn, 0.62},
                                              {Arch::kEdgeBank, 0.09}};
  for (const auto& [arch, r] : expected) {
    const auto row = snapshot_correlation(published_sweeps(cells_, arch));
    ASSERT_TRUE(row.correlation.has_value());
    EXPECT_NEAR(*row.correlation, r, 0.01) << arch_name(arch);
  }
}

TEST_F(Published, AvgGainOfConsistentColumns) {
  EXPECT_NEAR(avg_gain(published_sweeps(cells_, Arch::kGclstm)), 3.24, 0.01);
  EXPECT_NEAR(avg_gain(published_sweeps(cells_, Arch::kDysat)), 1.80, 0.01);
  EXPECT_NEAR(avg_gain(published_sweeps(cells_, Arch::kStgcn)), 0.58, 0.01);
}

TEST_F(Published, ReportRendersPublishedGainRow) {
  const auto dir = std::filesystem::temp_directory_path() / "tempofield_report_test";
  std::filesystem::remove_all(dir);
  write_published_tables(cells_, dir);
  const Report a = render_report_dir(dir);
  const Report b = render_report_dir(dir);
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(a.csv, b.csv);
  std::istringstream lines(a.text);
  std::string line, gain;
  while (std::getline(lines, line)) {
    if (line.find("Avg gain") != std::string::npos) gain = line;
  }
  std::istringstream fields(gain.substr(gain.find("Avg gain") + 8));
  std::vector<std::string> values;
  for (std::string v; fields >> v;) values.push_back(v);
  EXPECT_EQ(values, (std::vector<std::string>{"+3.40", "+1.80", "+3.24", "+0.58", "+1.92"}));
  EXPECT_NE(a.text.find("97.30 (1)"), std::string::npos);
  EXPECT_NE(a.csv.find("optimal_tau,UNVote,edgebank,tau_star,1"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Report, MissingInputsAreConfigErrors) {
  EXPECT_THROW(render_report_dir("/nonexistent/tempofield"), ConfigError);
}

TEST(Report, Formatting) {
  EXPECT_EQ(format_gain(3.4), "+3.40");
  EXPECT_EQ(format_gain(-1.234), "-1.23");
  EXPECT_EQ(format_ap(0.9056), "90.56");
}
