#pragma once

#include <filesystem>
#include <iosfwd>

#include "tempofield/models.hpp"

namespace tempofield {

/// Model checkpoint, a JSON document:
///
///   {
///     "format": "tempofield-checkpoint",
///     "version": 1,
///     "arch": "gclstm",                 // arch_name()
///     "num_nodes": N,
///     "hyper": {"d_in": 32, "hidden": 64, "heads": 4, "kernel": 3,
///               "decoder_hidden": 64, "max_positions": T, "tcn_gated": true},
///     "params": [
///       {"name": "embed", "shape": [rows, cols], "data": [row-major reals]},
///       ...                              // registration order
///     ]
///   }
///
/// Reals are written in shortest round-trip form, so save/load is lossless.
void write_checkpoint(std::ostream& out, const ModelState& m);
ModelState read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const ModelState& m);
ModelState load_checkpoint(const std::filesystem::path& path);

}  // namespace tempofield
