#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tempofield/dtdg.hpp"
#include "tempofield/eval.hpp"
#include "tempofield/models.hpp"

namespace tempofield {

/// Sweep manifest. INI text with sections:
///
///   [datasets]  names = enron, uci-message     path.<name> = file   max_nodes.<name> = N
///   [models]    archs = edgebank, gclstm        d_in hidden heads kernel decoder_hidden
///   [sweep]     grid = auto | 1,2,inf           seeds  master_seed  split  grid_cap
///   [training]  epochs  lr  negatives_per_positive
///   [output]    dir  parallelism  emit_loss  record_wall_time  svg
///
/// Dataset names resolve to an explicit path, else to the cache under
/// TEMPOFIELD_DATA_DIR. "synthetic-period2" is built in.
struct RunConfig {
  std::vector<std::string> datasets;
  std::map<std::string, std::filesystem::path> dataset_paths;
  std::map<std::string, std::size_t> max_nodes;

  std::vector<Arch> archs;
  ModelHyper hyper;

  std::optional<std::vector<Tau>> grid;  ///< nullopt = default grid per dataset
  std::size_t grid_cap = 12;
  std::size_t seeds = 1;
  std::uint64_t master_seed = 0;
  double split = 0.7;

  TrainConfig training;

  std::filesystem::path output_dir = "results";
  std::size_t parallelism = 1;
  bool emit_loss = false;
  bool record_wall_time = false;
  bool svg = false;
};

/// Throws ConfigError on unknown keys, bad values, an empty dataset or arch
/// list, or an invalid explicit grid.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::filesystem::path& path);

inline constexpr const char* kSyntheticDataset = "synthetic-period2";

/// Loads (and subsamples, when max_nodes is set) one configured dataset.
Dtdg load_configured_dataset(const RunConfig& config, const std::string& name);

}  // namespace tempofield
