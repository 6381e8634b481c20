#include "tempofield/dtdg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "tempofield/error.hpp"

namespace tempofield {

bool Snapshot::contains(NodeId a, NodeId b) const {
  if (a == b) return false;
  const Edge e{std::min(a, b), std::max(a, b)};
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

Snapshot snapshot_from_edges(std::size_t t, std::span<const RawEdge> raw, std::size_t n) {
  struct Merged {
    double weight = 0.0;
    std::uint32_t count = 0;
  };
  std::map<Edge, Merged> merged;
  bool any_weight = false;
  for (const auto& r : raw) {
    if (r.u >= n || r.v >= n) {
      throw OutOfRangeError("edge (" + std::to_string(r.u) + "," + std::to_string(r.v) +
                            ") references a node >= " + std::to_string(n));
    }
    if (r.u == r.v) continue;
    auto& m = merged[Edge{std::min(r.u, r.v), std::max(r.u, r.v)}];
    m.count += 1;
    if (r.weight) {
      any_weight = true;
      m.weight += *r.weight;
    }
  }

  Snapshot s;
  s.t_ = t;
  s.edges_.reserve(merged.size());
  s.multiplicity_.reserve(merged.size());
  if (any_weight) s.weights_.reserve(merged.size());
  for (const auto& [e, m] : merged) {
    s.edges_.push_back(e);
    s.multiplicity_.push_back(m.count);
    if (any_weight) s.weights_.push_back(m.weight);
    s.active_.push_back(e.u);
    s.active_.push_back(e.v);
  }
  std::sort(s.active_.begin(), s.active_.end());
  s.active_.erase(std::unique(s.active_.begin(), s.active_.end()), s.active_.end());
  return s;
}

Snapshot snapshot_from_edges(std::size_t t, std::span<const Edge> raw, std::size_t n) {
  std::vector<RawEdge> r;
  r.reserve(raw.size());
  for (const auto& e : raw) r.push_back({e.u, e.v, std::nullopt});
  return snapshot_from_edges(t, std::span<const RawEdge>(r), n);
}

Dtdg::Dtdg(std::string name, std::size_t num_nodes, std::vector<Snapshot> snapshots,
           std::vector<std::int64_t> raw_ids)
    : name_(std::move(name)),
      num_nodes_(num_nodes),
      snapshots_(std::move(snapshots)),
      raw_ids_(std::move(raw_ids)) {
  for (std::size_t i = 0; i < snapshots_.size(); ++i) {
    if (snapshots_[i].t() != i) {
      throw ConfigError("snapshot " + std::to_string(i) + " carries index " +
                        std::to_string(snapshots_[i].t()));
    }
    for (const auto& e : snapshots_[i].edges()) {
      if (e.v >= num_nodes_) {
        throw OutOfRangeError("snapshot " + std::to_string(i) + " references node " +
                              std::to_string(e.v) + " >= " + std::to_string(num_nodes_));
      }
    }
  }
  if (!raw_ids_.empty() && raw_ids_.size() != num_nodes_) {
    throw ConfigError("raw id table size does not match node count");
  }
}

const Snapshot& Dtdg::snapshot(std::size_t t) const {
  if (t >= snapshots_.size()) {
    throw OutOfRangeError("snapshot index " + std::to_string(t) + " outside 0.." +
                          std::to_string(snapshots_.size()) + ")");
  }
  return snapshots_[t];
}

std::size_t Dtdg::total_links() const {
  std::size_t total = 0;
  for (const auto& s : snapshots_) total += s.num_edges();
  return total;
}

Tau Tau::finite(std::size_t n) {
  if (n == 0) throw ConfigError("window length must be >= 1");
  return Tau{n};
}

Tau Tau::parse(std::string_view text) {
  if (text == "inf" || text == "INF" || text == "Inf" || text == "∞") return infinite();
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc() || ptr != text.data() + text.size() || n == 0) {
    throw ConfigError("invalid window length '" + std::string(text) + "'");
  }
  return Tau{n};
}

std::size_t Tau::value() const {
  if (is_infinite()) throw ConfigError("infinite window has no finite length");
  return n_;
}

std::string Tau::to_string() const { return is_infinite() ? "inf" : std::to_string(n_); }

std::strong_ordering Tau::operator<=>(const Tau& other) const {
  if (is_infinite() || other.is_infinite()) {
    return static_cast<int>(is_infinite()) <=> static_cast<int>(other.is_infinite());
  }
  return n_ <=> other.n_;
}

TemporalWindow window(const Dtdg& d, std::size_t t, Tau tau) {
  if (t >= d.num_snapshots()) {
    throw OutOfRangeError("window end " + std::to_string(t) + " outside a graph of " +
                          std::to_string(d.num_snapshots()) + " snapshots");
  }
  const std::size_t len = tau.is_infinite() ? t + 1 : std::min(tau.value(), t + 1);
  return TemporalWindow(d.snapshots().subspan(t + 1 - len, len), t, tau);
}

std::vector<double> normalized_adjacency(const Snapshot& s, std::size_t n) {
  std::vector<double> degree(n, 1.0);  // self-loop
  for (const auto& e : s.edges()) {
    degree[e.u] += 1.0;
    degree[e.v] += 1.0;
  }
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);

  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = inv_sqrt[i] * inv_sqrt[i];
  for (const auto& e : s.edges()) {
    const double w = inv_sqrt[e.u] * inv_sqrt[e.v];
    a[e.u * n + e.v] = w;
    a[e.v * n + e.u] = w;
  }
  return a;
}

std::vector<std::size_t> SplitSpec::test_steps() const {
  std::vector<std::size_t> steps;
  for (std::size_t t = test_first; t <= test_last; ++t) steps.push_back(t);
  return steps;
}

SplitSpec chronological_split(const Dtdg& d, double train_fraction) {
  const std::size_t T = d.num_snapshots();
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  if (T < 4) throw ConfigError("a split needs at least 4 snapshots, got " + std::to_string(T));
  SplitSpec split;
  split.train_end = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(T - 1)));
  split.test_first = split.train_end + 1;
  split.test_last = T - 2;
  if (split.train_end < 1) throw ConfigError("empty training range");
  if (split.test_first > split.test_last) throw ConfigError("empty test range");
  return split;
}

}  // namespace tempofield
