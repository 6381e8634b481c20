#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "tempofield/dataset_io.hpp"
#include "tempofield/error.hpp"
#include "tempofield/ingest.hpp"
#include "tempofield/rng.hpp"

using namespace tempofield;

namespace {

std::vector<EdgeEvent> parse(const std::string& text, const std::string& layout) {
  std::istringstream in(text);
  return parse_edge_list(in, ColumnLayout::parse(layout));
}

}  // namespace

TEST(ParseEdgeList, WeightedColumns) {
  const auto ev = parse("0 1 5 10\n2 3 -2 11", "src dst weight time");
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].src, 0);
  EXPECT_EQ(ev[0].dst, 1);
  EXPECT_EQ(*ev[0].weight, 5.0);
  EXPECT_EQ(*ev[1].weight, -2.0);
  EXPECT_EQ(ev[1].time, 11.0);
}

TEST(ParseEdgeList, SkipsComments) {
  const auto ev = parse("# header\n% other\n\n4 7 3", "src dst time");
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_FALSE(ev[0].weight.has_value());
  EXPECT_EQ(ev[0].src, 4);
  EXPECT_EQ(ev[0].time, 3.0);
}

TEST(ParseEdgeList, CommaSeparatedAndExtraColumns) {
  const auto ev = parse("1,2,7,99\n", "src dst time");
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].time, 7.0);
}

TEST(ParseEdgeList, MalformedLineReportsLine) {
  try {
    parse("a b c", "src dst time");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  try {
    parse("1 2 3\n4 5\n", "src dst time");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseEdgeList, EmptyFileIsError) {
  EXPECT_THROW(parse("# nothing\n", "src dst time"), ParseError);
}

TEST(ColumnLayout, RejectsBadFormats) {
  EXPECT_THROW(ColumnLayout::parse("src dst"), ConfigError);
  EXPECT_THROW(ColumnLayout::parse("src src dst time"), ConfigError);
  EXPECT_THROW(ColumnLayout::parse("src dst when"), ConfigError);
  EXPECT_TRUE(ColumnLayout::parse("src dst weight time").has_weight());
}

TEST(Discretize, EqualWidthBins) {
  const std::vector<EdgeEvent> ev = {{0, 1, {}, 0}, {1, 2, {}, 0}, {2, 3, {}, 9}, {3, 4, {}, 4.4}};
  const Dtdg d = discretize("x", ev, DiscretizationRule::fixed_count(2));
  ASSERT_EQ(d.num_snapshots(), 2u);
  EXPECT_EQ(d.snapshot(0).num_edges(), 3u);  // [0, 4.5)
  EXPECT_EQ(d.snapshot(1).num_edges(), 1u);  // time 9, last bin closed
}

TEST(Discretize, GivenIndexLeavesGaps) {
  const std::vector<EdgeEvent> ev = {{10, 20, {}, 0}, {20, 30, {}, 1}, {10, 30, {}, 1}, {30, 40, {}, 3}};
  const Dtdg d = discretize("x", ev, DiscretizationRule::given_index());
  ASSERT_EQ(d.num_snapshots(), 4u);
  EXPECT_EQ(d.snapshot(2).num_edges(), 0u);
  EXPECT_EQ(d.snapshot(1).num_edges(), 2u);
}

TEST(Discretize, RemapsInFirstAppearanceOrder) {
  const std::vector<EdgeEvent> ev = {{50, 7, {}, 0}, {7, 900, {}, 1}, {-3, 50, {}, 1}};
  const Dtdg d = discretize("x", ev, DiscretizationRule::given_index());
  EXPECT_EQ(d.num_nodes(), 4u);
  EXPECT_EQ(std::vector<std::int64_t>(d.raw_ids().begin(), d.raw_ids().end()),
            (std::vector<std::int64_t>{50, 7, 900, -3}));
  EXPECT_TRUE(d.snapshot(0).contains(0, 1));
  EXPECT_TRUE(d.snapshot(1).contains(1, 2));
  EXPECT_TRUE(d.snapshot(1).contains(0, 3));
}

TEST(Discretize, Errors) {
  const std::vector<EdgeEvent> ev = {{0, 1, {}, 0.5}};
  EXPECT_THROW(discretize("x", ev, DiscretizationRule::fixed_count(1)), ConfigError);
  EXPECT_THROW(discretize("x", ev, DiscretizationRule::given_index()), ConfigError);
  EXPECT_THROW(discretize("x", {}, DiscretizationRule::fixed_count(3)), ConfigError);
}

TEST(Discretize, NegativeWeightsAreEdgesZeroIsNot) {
  const std::vector<EdgeEvent> ev = {{0, 1, -4.0, 0}, {1, 2, 0.0, 0}, {2, 3, 2.0, 1}};
  const Dtdg d = discretize("x", ev, DiscretizationRule::given_index());
  EXPECT_TRUE(d.snapshot(0).contains(0, 1));
  EXPECT_FALSE(d.snapshot(0).contains(1, 2));
  EXPECT_EQ(d.num_nodes(), 4u);
}

TEST(Discretize, PreservesEventMassAndIsDeterministic) {
  Rng rng(3);
  std::vector<EdgeEvent> ev;
  for (int i = 0; i < 400; ++i) {
    const auto u = static_cast<std::int64_t>(rng.below(30));
    auto v = static_cast<std::int64_t>(rng.below(29));
    if (v >= u) ++v;
    ev.push_back({u * 17, v * 17, std::nullopt, rng.uniform(0, 1000)});
  }
  const Dtdg a = discretize("x", ev, DiscretizationRule::fixed_count(7));
  std::size_t mass = 0;
  for (const auto& s : a.snapshots()) {
    for (auto m : s.multiplicity()) mass += m;
  }
  EXPECT_EQ(mass, ev.size());
  // raw <-> dense is a bijection
  std::set<std::int64_t> raw(a.raw_ids().begin(), a.raw_ids().end());
  EXPECT_EQ(raw.size(), a.num_nodes());

  std::ostringstream x, y;
  write_dataset_cache(x, a);
  write_dataset_cache(y, discretize("x", ev, DiscretizationRule::fixed_count(7)));
  EXPECT_EQ(x.str(), y.str());
}

TEST(Rule, ParseAndPrint) {
  EXPECT_EQ(DiscretizationRule::parse("bins:11").count, 11u);
  EXPECT_EQ(DiscretizationRule::parse("index").kind, DiscretizationRule::Kind::kGivenIndex);
  EXPECT_EQ(DiscretizationRule::fixed_count(4).to_string(), "bins:4");
  EXPECT_THROW(DiscretizationRule::parse("bins:x"), ConfigError);
  EXPECT_THROW(DiscretizationRule::parse("weekly"), ConfigError);
}

TEST(Registry, HoldsTheTenDatasetsAndContact) {
  EXPECT_EQ(dataset_registry().size(), 11u);
  const DatasetSpec* enron = find_dataset("enron");
  ASSERT_NE(enron, nullptr);
  EXPECT_EQ(*enron->expected_nodes, 184u);
  EXPECT_EQ(*enron->expected_links, 790u);
  EXPECT_EQ(*enron->expected_snapshots, 11u);
  ASSERT_NE(find_dataset("uci-message"), nullptr);
  ASSERT_NE(find_dataset("Bitcoin-Alpha"), nullptr);
  const DatasetSpec* contact = find_dataset("Contact");
  ASSERT_NE(contact, nullptr);
  EXPECT_FALSE(contact->has_published_results);
  EXPECT_EQ(find_dataset("reddit"), nullptr);
}

namespace {

Dtdg sized_graph(std::size_t n, std::size_t links, std::size_t T) {
  std::vector<Snapshot> snaps;
  std::size_t placed = 0;
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<Edge> e;
    for (NodeId u = 0; u < n && placed < links * (t + 1) / T; ++u) {
      for (NodeId v = u + 1; v < n && placed < links * (t + 1) / T; ++v) {
        e.push_back({u, v});
        ++placed;
      }
    }
    snaps.push_back(snapshot_from_edges(t, std::span<const Edge>(e), n));
  }
  return Dtdg("sized", n, std::move(snaps));
}

}  // namespace

TEST(Validation, USLegisPassesWhenCountsMatch) {
  const Dtdg d = sized_graph(225, 60396, 12);
  ASSERT_EQ(d.total_links(), 60396u);
  const auto report = validate_against_registry(d, *find_dataset("USLegis"));
  EXPECT_TRUE(report.passed());
  EXPECT_EQ(report.entries.size(), 3u);
}

TEST(Validation, ColabPasses) {
  const auto report = validate_against_registry(sized_graph(315, 943, 10), *find_dataset("Colab"));
  EXPECT_TRUE(report.passed());
}

TEST(Validation, NodeMismatchIsReported) {
  const auto report = validate_against_registry(sized_graph(226, 60396, 12), *find_dataset("USLegis"));
  EXPECT_FALSE(report.passed());
  ASSERT_EQ(report.entries[0].field, "nodes");
  EXPECT_FALSE(report.entries[0].pass);
  EXPECT_EQ(report.entries[0].actual, 226u);
  EXPECT_TRUE(report.entries[1].pass);
}

TEST(Validation, UciCarriesApproximationNote) {
  const auto report = validate_against_registry(sized_graph(10, 5, 3), *find_dataset("UCI-Message"));
  ASSERT_FALSE(report.notes.empty());
}

TEST(Subsample, KeepsHighestDegreeNodes) {
  // Star around node 3 plus one edge 0-1.
  const std::vector<Edge> e = {{0, 3}, {1, 3}, {2, 3}, {3, 4}, {0, 1}};
  std::vector<Snapshot> snaps = {snapshot_from_edges(0, std::span<const Edge>(e), 5)};
  const Dtdg d("s", 5, std::move(snaps));
  const Dtdg s = subsample_top_degree(d, 3);
  EXPECT_EQ(s.num_nodes(), 3u);
  // degrees: 3 -> 4, 0 -> 2, 1 -> 2; kept ids 0,1,3 renumbered 0,1,2
  EXPECT_EQ(std::vector<std::int64_t>(s.raw_ids().begin(), s.raw_ids().end()),
            (std::vector<std::int64_t>{0, 1, 3}));
  EXPECT_EQ(s.snapshot(0).num_edges(), 3u);
  EXPECT_TRUE(s.snapshot(0).contains(0, 1));
  EXPECT_TRUE(s.snapshot(0).contains(0, 2));
  EXPECT_THROW(subsample_top_degree(d, 0), ConfigError);
  EXPECT_EQ(subsample_top_degree(d, 10).num_nodes(), 5u);
}

TEST(DatasetCache, RoundTripIsLossless) {
  std::vector<EdgeEvent> ev = {{5, 6, 1.5, 0}, {6, 7, -2.0, 3}, {5, 6, 2.0, 0}, {8, 5, 0.25, 2}};
  const Dtdg d = discretize("Round", ev, DiscretizationRule::given_index());
  std::stringstream buf;
  write_dataset_cache(buf, d);
  const Dtdg r = read_dataset_cache(buf);
  EXPECT_EQ(r.name(), "Round");
  EXPECT_EQ(r.num_nodes(), d.num_nodes());
  ASSERT_EQ(r.num_snapshots(), d.num_snapshots());
  for (std::size_t t = 0; t < d.num_snapshots(); ++t) EXPECT_EQ(r.snapshot(t), d.snapshot(t));
  EXPECT_TRUE(std::equal(r.raw_ids().begin(), r.raw_ids().end(), d.raw_ids().begin(), d.raw_ids().end()));

  const auto path = std::filesystem::temp_directory_path() / "tempofield_cache_test.json";
  save_dataset_cache(path, d);
  EXPECT_EQ(load_dataset_cache(path).snapshot(0), d.snapshot(0));
  std::filesystem::remove(path);
}

TEST(DatasetCache, RejectsForeignDocuments) {
  std::istringstream a("{\"format\": \"other\", \"version\": 1}");
  EXPECT_THROW(read_dataset_cache(a), ParseError);
  std::istringstream b("not json");
  EXPECT_THROW(read_dataset_cache(b), ParseError);
}
