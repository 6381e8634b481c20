#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tempofield/dtdg.hpp"

namespace tempofield {

struct EdgeEvent {
  std::int64_t src = 0;
  std::int64_t dst = 0;
  std::optional<double> weight;
  double time = 0.0;
};

/// Column order of a raw edge list, e.g. "src dst weight time". Parsed from
/// the `format` config key; "weight" is optional, unknown names are rejected.
class ColumnLayout {
 public:
  enum class Column { kSrc, kDst, kWeight, kTime, kIgnore };

  static ColumnLayout parse(std::string_view spec);
  static ColumnLayout src_dst_time() { return parse("src dst time"); }
  static ColumnLayout src_dst_weight_time() { return parse("src dst weight time"); }

  const std::vector<Column>& columns() const { return columns_; }
  bool has_weight() const;

 private:
  std::vector<Column> columns_;
};

/// Reads whitespace- or comma-separated edge records. Lines starting with
/// '#' or '%' and blank lines are skipped. Columns beyond the layout are
/// ignored (SNAP files often carry extras).
std::vector<EdgeEvent> parse_edge_list(std::istream& in, const ColumnLayout& layout);

/// How raw timestamps become snapshot indices.
struct DiscretizationRule {
  enum class Kind { kGivenIndex, kFixedCount };
  Kind kind = Kind::kFixedCount;
  std::size_t count = 0;  ///< K for kFixedCount

  static DiscretizationRule given_index() { return {Kind::kGivenIndex, 0}; }
  static DiscretizationRule fixed_count(std::size_t k) { return {Kind::kFixedCount, k}; }
  /// "index" or "bins:K".
  static DiscretizationRule parse(std::string_view text);
  std::string to_string() const;
};

/// Remaps raw ids densely (first appearance order) and bins events into
/// snapshots. Equal-width bins over [t_min, t_max], last bin closed. Events
/// with weight exactly 0 are not edges (negative weights still are).
Dtdg discretize(std::string name, const std::vector<EdgeEvent>& events,
                const DiscretizationRule& rule);

/// Registered dataset statistics.
struct DatasetSpec {
  std::string name;
  std::string domain;
  std::optional<std::size_t> expected_nodes;
  std::optional<std::size_t> expected_links;
  std::optional<std::size_t> expected_snapshots;
  std::string duration;
  DiscretizationRule rule;
  bool has_published_results = true;
  /// Set when the binning is known not to match the published snapshots.
  std::string approximation_note;
};

const std::vector<DatasetSpec>& dataset_registry();
/// Case-insensitive lookup; also accepts the lowercase cache names
/// ("uci-message", "bitcoin-otc", ...).
const DatasetSpec* find_dataset(std::string_view name);

struct ValidationEntry {
  std::string field;
  std::size_t expected = 0;
  std::size_t actual = 0;
  bool pass = false;
};

struct ValidationReport {
  std::string dataset;
  std::vector<ValidationEntry> entries;
  std::vector<std::string> notes;

  bool passed() const;
};

ValidationReport validate_against_registry(const Dtdg& d, const DatasetSpec& spec);

/// Keeps the max_nodes nodes with the highest total degree over all
/// snapshots (ties to the lower id), remapping ids densely in original order.
Dtdg subsample_top_degree(const Dtdg& d, std::size_t max_nodes);

}  // namespace tempofield
