#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tempofield {

using NodeId = std::uint32_t;

/// Undirected edge, always stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Raw input edge before canonicalization; orientation and weight as given.
struct RawEdge {
  NodeId u = 0;
  NodeId v = 0;
  std::optional<double> weight;
};

/// One static graph G^t over the global node universe. Immutable once built;
/// use snapshot_from_edges() to construct.
class Snapshot {
 public:
  Snapshot() = default;

  std::size_t t() const { return t_; }
  std::span<const Edge> edges() const { return edges_; }
  std::size_t num_edges() const { return edges_.size(); }
  /// Summed raw weights aligned with edges(); empty when no weight was given.
  std::span<const double> weights() const { return weights_; }
  bool has_weights() const { return !weights_.empty(); }
  /// How many raw records merged into each edge, aligned with edges().
  std::span<const std::uint32_t> multiplicity() const { return multiplicity_; }
  std::span<const NodeId> active_nodes() const { return active_; }

  bool contains(NodeId a, NodeId b) const;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;

 private:
  friend Snapshot snapshot_from_edges(std::size_t, std::span<const RawEdge>, std::size_t);

  std::size_t t_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> weights_;
  std::vector<std::uint32_t> multiplicity_;
  std::vector<NodeId> active_;
};

/// Canonicalizes (u<v), drops self-loops, merges duplicates and sums weights.
/// Throws OutOfRangeError when an id is >= n.
Snapshot snapshot_from_edges(std::size_t t, std::span<const RawEdge> raw, std::size_t n);
Snapshot snapshot_from_edges(std::size_t t, std::span<const Edge> raw, std::size_t n);

/// Discrete-time dynamic graph: a fixed node universe and T snapshots indexed
/// 0..T-1.
class Dtdg {
 public:
  Dtdg(std::string name, std::size_t num_nodes, std::vector<Snapshot> snapshots,
       std::vector<std::int64_t> raw_ids = {});

  const std::string& name() const { return name_; }
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_snapshots() const { return snapshots_.size(); }
  std::span<const Snapshot> snapshots() const { return snapshots_; }
  const Snapshot& snapshot(std::size_t t) const;
  /// Raw id of each dense node, empty when the graph was built directly.
  std::span<const std::int64_t> raw_ids() const { return raw_ids_; }
  /// Sum of |edges| over snapshots.
  std::size_t total_links() const;

 private:
  std::string name_;
  std::size_t num_nodes_;
  std::vector<Snapshot> snapshots_;
  std::vector<std::int64_t> raw_ids_;
};

/// Window length: a positive integer or the "all history" sentinel.
class Tau {
 public:
  static Tau finite(std::size_t n);
  static constexpr Tau infinite() { return Tau{0}; }
  /// Accepts a positive integer or "inf" (also "INF", "∞").
  static Tau parse(std::string_view text);

  bool is_infinite() const { return n_ == 0; }
  /// Finite length; throws for the sentinel.
  std::size_t value() const;
  std::string to_string() const;

  bool operator==(const Tau&) const = default;
  /// Finite lengths ascending, the sentinel after every finite length.
  std::strong_ordering operator<=>(const Tau& other) const;

 private:
  constexpr explicit Tau(std::size_t n) : n_(n) {}
  std::size_t n_;
};

/// The snapshots max(0, end-tau+1)..end of a graph. Borrows from the Dtdg,
/// which must outlive the window.
class TemporalWindow {
 public:
  TemporalWindow(std::span<const Snapshot> snapshots, std::size_t end, Tau tau)
      : snapshots_(snapshots), end_(end), tau_(tau) {}

  std::size_t end() const { return end_; }
  std::size_t start() const { return end_ + 1 - snapshots_.size(); }
  Tau tau() const { return tau_; }
  std::size_t size() const { return snapshots_.size(); }
  std::span<const Snapshot> snapshots() const { return snapshots_; }
  const Snapshot& operator[](std::size_t i) const { return snapshots_[i]; }
  const Snapshot& last() const { return snapshots_.back(); }

 private:
  std::span<const Snapshot> snapshots_;
  std::size_t end_;
  Tau tau_;
};

TemporalWindow window(const Dtdg& d, std::size_t t, Tau tau);

/// Symmetric normalization D^-1/2 (A+I) D^-1/2 as a dense row-major n*n array.
std::vector<double> normalized_adjacency(const Snapshot& s, std::size_t n);

/// Chronological train/test split. Each test step t predicts snapshot t+1.
struct SplitSpec {
  std::size_t train_end = 0;   ///< last snapshot index used as a training target
  std::size_t test_first = 0;  ///< first test step
  std::size_t test_last = 0;   ///< last test step (inclusive), T-2

  std::vector<std::size_t> test_steps() const;
};

SplitSpec chronological_split(const Dtdg& d, double train_fraction);

}  // namespace tempofield
