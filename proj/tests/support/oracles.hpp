#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// tests. Written without the library's own helpers on purpose.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Pair = std::pair<std::uint32_t, std::uint32_t>;

/// Raw edge lists per snapshot, orientation as generated.
using RawGraph = std::vector<std::vector<Pair>>;

/// 1 iff {u, v} is listed (either orientation, self-loops ignored) in any of
/// snapshots max(0, t - tau + 1)..t. tau == 0 means all history.
inline double edgebank(const RawGraph& g, std::size_t t, std::size_t tau, std::uint32_t u,
                       std::uint32_t v) {
  if (u == v) return 0.0;
  const std::size_t first = (tau == 0 || tau > t) ? 0 : t - tau + 1;
  for (std::size_t s = first; s <= t; ++s) {
    for (const auto& [a, b] : g[s]) {
      if ((a == u && b == v) || (a == v && b == u)) return 1.0;
    }
  }
  return 0.0;
}

/// Average precision by enumeration. Items with equal scores are ranked in
/// every possible label arrangement inside their group with equal weight;
/// groups are independent, so the expectation is a sum over groups.
inline double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::map<double, std::pair<int, int>, std::greater<>> groups;  // score -> (size, positives)
  int total_pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto& g = groups[scores[i]];
    g.first += 1;
    g.second += labels[i];
    total_pos += labels[i];
  }
  if (total_pos == 0) throw std::invalid_argument("no positives");
  double expected = 0.0;
  int before = 0;
  int pos_before = 0;
  for (const auto& [score, gp] : groups) {
    const auto [size, pos] = gp;
    if (size > 20) throw std::invalid_argument("tie group too large to enumerate");
    double group_sum = 0.0;
    std::uint64_t arrangements = 0;
    for (std::uint32_t mask = 0; mask < (1u << size); ++mask) {
      if (std::popcount(mask) != pos) continue;
      ++arrangements;
      int seen = 0;
      for (int r = 0; r < size; ++r) {
        if (mask & (1u << r)) {
          ++seen;
          group_sum += static_cast<double>(pos_before + seen) / static_cast<double>(before + r + 1);
        }
      }
    }
    expected += group_sum / static_cast<double>(arrangements);
    before += size;
    pos_before += pos;
  }
  return expected / total_pos;
}

}  // namespace oracle
