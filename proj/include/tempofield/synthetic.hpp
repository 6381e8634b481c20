#pragma once

#include <cstdint>

#include "tempofield/dtdg.hpp"
#include "tempofield/rng.hpp"

namespace tempofield {

/// Two disjoint edge sets A and B over `num_nodes` nodes, alternating
/// A, B, A, B, ... for `num_snapshots` steps. Each set holds `edges_per_set`
/// pairs drawn from a fixed-seed shuffle, so the graph is fully deterministic.
Dtdg period_two_graph(std::size_t num_nodes = 20, std::size_t num_snapshots = 40,
                      std::size_t edges_per_set = 30, std::uint64_t layout_seed = 2);

/// Independent Erdos-Renyi snapshots with edge probability p.
Dtdg random_dtdg(std::size_t num_nodes, std::size_t num_snapshots, double p, Rng& rng,
                 std::string name = "random");

}  // namespace tempofield
