#include "tempofield/synthetic.hpp"

#include <utility>
#include <vector>

#include "tempofield/error.hpp"

namespace tempofield {

Dtdg period_two_graph(std::size_t num_nodes, std::size_t num_snapshots,
                      std::size_t edges_per_set, std::uint64_t layout_seed) {
  std::vector<Edge> pairs;
  for (NodeId u = 0; u < num_nodes; ++u) {
    for (NodeId v = u + 1; v < num_nodes; ++v) pairs.push_back({u, v});
  }
  if (2 * edges_per_set > pairs.size()) {
    throw ConfigError("period-two graph: not enough node pairs for two disjoint sets");
  }
  Rng rng(layout_seed);
  for (std::size_t i = pairs.size(); i > 1; --i) {
    std::swap(pairs[i - 1], pairs[rng.below(i)]);
  }
  const std::vector<Edge> a(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(edges_per_set));
  const std::vector<Edge> b(pairs.begin() + static_cast<std::ptrdiff_t>(edges_per_set),
                            pairs.begin() + static_cast<std::ptrdiff_t>(2 * edges_per_set));
  std::vector<Snapshot> snapshots;
  for (std::size_t t = 0; t < num_snapshots; ++t) {
    snapshots.push_back(snapshot_from_edges(t, std::span<const Edge>(t % 2 == 0 ? a : b), num_nodes));
  }
  return Dtdg("synthetic-period2", num_nodes, std::move(snapshots));
}

Dtdg random_dtdg(std::size_t num_nodes, std::size_t num_snapshots, double p, Rng& rng,
                 std::string name) {
  std::vector<Snapshot> snapshots;
  for (std::size_t t = 0; t < num_snapshots; ++t) {
    std::vector<Edge> edges;
    for (NodeId u = 0; u < num_nodes; ++u) {
      for (NodeId v = u + 1; v < num_nodes; ++v) {
        if (rng.uniform() < p) edges.push_back({u, v});
      }
    }
    snapshots.push_back(snapshot_from_edges(t, std::span<const Edge>(edges), num_nodes));
  }
  return Dtdg(std::move(name), num_nodes, std::move(snapshots));
}

}  // namespace tempofield
