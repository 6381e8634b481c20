#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "tempofield/dtdg.hpp"

namespace tempofield {

/// Canonical dataset cache, a JSON document:
///
///   {
///     "format": "tempofield-dtdg",
///     "version": 1,
///     "name": <string>,
///     "num_nodes": N,
///     "num_snapshots": T,
///     "raw_ids": [<int>, ...],            // dense id -> raw id, may be empty
///     "snapshots": [
///       {"t": 0,
///        "edges": [[u, v], ...],          // u < v, sorted, dense ids
///        "multiplicity": [<int>, ...],    // raw records merged per edge
///        "weights": [<real>, ...]}        // optional, summed raw weights
///     ]
///   }
void write_dataset_cache(std::ostream& out, const Dtdg& d);
Dtdg read_dataset_cache(std::istream& in);

void save_dataset_cache(const std::filesystem::path& path, const Dtdg& d);
Dtdg load_dataset_cache(const std::filesystem::path& path);

/// Default cache location: $TEMPOFIELD_DATA_DIR/<lowercase name>.dtdg.json,
/// or nullopt when the variable is unset.
std::optional<std::filesystem::path> default_cache_path(const std::string& name);

}  // namespace tempofield
