#include "tempofield/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "tempofield/error.hpp"

namespace tempofield {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; };
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_sep(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

ColumnLayout ColumnLayout::parse(std::string_view spec) {
  ColumnLayout layout;
  bool src = false, dst = false, time = false, weight = false;
  for (auto field : split_fields(spec)) {
    std::string name = lower(field);
    if (name.size() > 2 && name.front() == '[' && name.back() == ']') {
      name = name.substr(1, name.size() - 2);
    }
    auto claim = [&](bool& seen, Column c) {
      if (seen) throw ConfigError("column '" + name + "' listed twice in format");
      seen = true;
      layout.columns_.push_back(c);
    };
    if (name == "src") claim(src, Column::kSrc);
    else if (name == "dst") claim(dst, Column::kDst);
    else if (name == "weight") claim(weight, Column::kWeight);
    else if (name == "time") claim(time, Column::kTime);
    else if (name == "_" || name == "skip") layout.columns_.push_back(Column::kIgnore);
    else throw ConfigError("unknown column '" + std::string(field) + "' in format");
  }
  if (!src || !dst || !time) throw ConfigError("format needs src, dst and time columns");
  return layout;
}

bool ColumnLayout::has_weight() const {
  return std::find(columns_.begin(), columns_.end(), Column::kWeight) != columns_.end();
}

std::vector<EdgeEvent> parse_edge_list(std::istream& in, const ColumnLayout& layout) {
  std::vector<EdgeEvent> events;
  std::string line;
  std::size_t lineno = 0;
  const auto& cols = layout.columns();
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split_fields(line);
    if (fields.empty() || fields[0].front() == '#' || fields[0].front() == '%') continue;
    if (fields.size() < cols.size()) {
      throw ParseError("expected " + std::to_string(cols.size()) + " columns, found " +
                           std::to_string(fields.size()),
                       lineno);
    }
    EdgeEvent ev;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto f = fields[c];
      bool ok = true;
      switch (cols[c]) {
        case ColumnLayout::Column::kSrc: ok = parse_number(f, ev.src); break;
        case ColumnLayout::Column::kDst: ok = parse_number(f, ev.dst); break;
        case ColumnLayout::Column::kWeight: {
          double w = 0;
          ok = parse_number(f, w) && std::isfinite(w);
          ev.weight = w;
          break;
        }
        case ColumnLayout::Column::kTime:
          ok = parse_number(f, ev.time) && std::isfinite(ev.time);
          break;
        case ColumnLayout::Column::kIgnore: break;
      }
      if (!ok) throw ParseError("cannot parse field '" + std::string(f) + "'", lineno);
    }
    events.push_back(ev);
  }
  if (events.empty()) throw ParseError("edge list contains no records");
  return events;
}

DiscretizationRule DiscretizationRule::parse(std::string_view text) {
  if (text == "index") return given_index();
  if (text.starts_with("bins:")) {
    std::size_t k = 0;
    auto rest = text.substr(5);
    if (!parse_number(rest, k)) throw ConfigError("invalid bin count in '" + std::string(text) + "'");
    return fixed_count(k);
  }
  throw ConfigError("unknown discretization rule '" + std::string(text) + "'");
}

std::string DiscretizationRule::to_string() const {
  return kind == Kind::kGivenIndex ? "index" : "bins:" + std::to_string(count);
}

Dtdg discretize(std::string name, const std::vector<EdgeEvent>& events,
                const DiscretizationRule& rule) {
  if (events.empty()) throw ConfigError("cannot discretize an empty event list");
  if (rule.kind == DiscretizationRule::Kind::kFixedCount && rule.count < 2) {
    throw ConfigError("fixed-count discretization needs K >= 2");
  }

  std::unordered_map<std::int64_t, NodeId> dense;
  std::vector<std::int64_t> raw_ids;
  auto id_of = [&](std::int64_t raw) {
    auto [it, inserted] = dense.try_emplace(raw, static_cast<NodeId>(raw_ids.size()));
    if (inserted) raw_ids.push_back(raw);
    return it->second;
  };

  std::vector<std::size_t> bin(events.size());
  std::size_t num_snapshots = 0;
  if (rule.kind == DiscretizationRule::Kind::kGivenIndex) {
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double t = events[i].time;
      if (t < 0 || std::floor(t) != t) {
        throw ConfigError("given-index rule needs non-negative integer times, got " +
                          std::to_string(t));
      }
      bin[i] = static_cast<std::size_t>(t);
      num_snapshots = std::max(num_snapshots, bin[i] + 1);
    }
  } else {
    auto [lo, hi] = std::minmax_element(events.begin(), events.end(),
                                        [](const auto& a, const auto& b) { return a.time < b.time; });
    const double t_min = lo->time;
    const double width = (hi->time - t_min) / static_cast<double>(rule.count);
    for (std::size_t i = 0; i < events.size(); ++i) {
      std::size_t b = 0;
      if (width > 0) {
        b = static_cast<std::size_t>(std::floor((events[i].time - t_min) / width));
      }
      bin[i] = std::min(b, rule.count - 1);
    }
    num_snapshots = rule.count;
  }

  std::vector<std::vector<RawEdge>> per_snapshot(num_snapshots);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const NodeId u = id_of(events[i].src);
    const NodeId v = id_of(events[i].dst);
    // A zero weight records the pair but not an edge; the nodes stay in the universe.
    if (events[i].weight && *events[i].weight == 0.0) continue;
    per_snapshot[bin[i]].push_back({u, v, events[i].weight});
  }
  const std::size_t n = raw_ids.size();
  std::vector<Snapshot> snapshots;
  snapshots.reserve(num_snapshots);
  for (std::size_t t = 0; t < num_snapshots; ++t) {
    snapshots.push_back(snapshot_from_edges(t, std::span<const RawEdge>(per_snapshot[t]), n));
  }
  return Dtdg(std::move(name), n, std::move(snapshots), std::move(raw_ids));
}

const std::vector<DatasetSpec>& dataset_registry() {
  using R = DiscretizationRule;
  static const std::vector<DatasetSpec> registry = {
      {"CanParl", "Politics", 734, 74478, 14, "14 years", R::fixed_count(14), true, ""},
      {"USLegis", "Politics", 225, 60396, 12, "12 congresses", R::fixed_count(12), true, ""},
      {"Trade", "Economics", 255, 507497, 32, "32 years", R::fixed_count(32), true, ""},
      {"UNVote", "Politics", 201, 1035742, 72, "72 years", R::fixed_count(72), true, ""},
      {"UCI-Message", "Social", 1899, 59835, 88, "196 days", R::fixed_count(88), true,
       "snapshot boundaries approximated by 88 equal-width bins over 196 days"},
      {"AS733", "Router", 6628, 13512, 30, "86 days", R::fixed_count(30), true, ""},
      {"Enron", "Mail", 184, 790, 11, "3 years", R::fixed_count(11), true, ""},
      {"Colab", "Citations", 315, 943, 10, "9 years", R::fixed_count(10), true, ""},
      {"Bitcoin-OTC", "Trust Networks", 5881, 35592, 136, "5 years", R::fixed_count(136), true, ""},
      {"Bitcoin-Alpha", "Trust Networks", 3783, 24186, 136, "5 years", R::fixed_count(136), true, ""},
      {"Contact", "Proximity", std::nullopt, std::nullopt, std::nullopt, "1 month",
       R::given_index(), false, "no published results; statistics not registered"},
  };
  return registry;
}

const DatasetSpec* find_dataset(std::string_view name) {
  const std::string key = lower(name);
  for (const auto& spec : dataset_registry()) {
    if (lower(spec.name) == key) return &spec;
  }
  return nullptr;
}

bool ValidationReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

ValidationReport validate_against_registry(const Dtdg& d, const DatasetSpec& spec) {
  ValidationReport report;
  report.dataset = spec.name;
  auto check = [&](const char* field, const std::optional<std::size_t>& expected,
                   std::size_t actual) {
    if (!expected) {
      report.notes.push_back(std::string(field) + ": no registered value");
      return;
    }
    report.entries.push_back({field, *expected, actual, *expected == actual});
  };
  check("nodes", spec.expected_nodes, d.num_nodes());
  check("links", spec.expected_links, d.total_links());
  check("snapshots", spec.expected_snapshots, d.num_snapshots());
  if (!spec.approximation_note.empty()) report.notes.push_back(spec.approximation_note);
  return report;
}

Dtdg subsample_top_degree(const Dtdg& d, std::size_t max_nodes) {
  const std::size_t n = d.num_nodes();
  if (max_nodes == 0) throw ConfigError("max_nodes must be positive");
  if (max_nodes >= n) return d;

  std::vector<std::size_t> degree(n, 0);
  for (const auto& s : d.snapshots()) {
    for (const auto& e : s.edges()) {
      ++degree[e.u];
      ++degree[e.v];
    }
  }
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return degree[a] > degree[b]; });
  std::vector<NodeId> keep(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(max_nodes));
  std::sort(keep.begin(), keep.end());

  constexpr NodeId kDropped = UINT32_MAX;
  std::vector<NodeId> remap(n, kDropped);
  std::vector<std::int64_t> raw;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    remap[keep[i]] = static_cast<NodeId>(i);
    raw.push_back(d.raw_ids().empty() ? keep[i] : d.raw_ids()[keep[i]]);
  }

  std::vector<Snapshot> snapshots;
  for (const auto& s : d.snapshots()) {
    std::vector<RawEdge> edges;
    for (std::size_t i = 0; i < s.num_edges(); ++i) {
      const auto& e = s.edges()[i];
      if (remap[e.u] == kDropped || remap[e.v] == kDropped) continue;
      for (std::uint32_t m = 0; m < s.multiplicity()[i]; ++m) {
        std::optional<double> w;
        // keep the summed weight on the first copy only
        if (s.has_weights()) w = m == 0 ? s.weights()[i] : 0.0;
        edges.push_back({remap[e.u], remap[e.v], w});
      }
    }
    snapshots.push_back(snapshot_from_edges(s.t(), std::span<const RawEdge>(edges), keep.size()));
  }
  return Dtdg(d.name(), keep.size(), std::move(snapshots), std::move(raw));
}

}  // namespace tempofield
