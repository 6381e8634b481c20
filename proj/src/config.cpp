#include "tempofield/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tempofield/csv.hpp"
#include "tempofield/dataset_io.hpp"
#include "tempofield/error.hpp"
#include "tempofield/ingest.hpp"
#include "tempofield/sweep.hpp"
#include "tempofield/synthetic.hpp"

namespace tempofield {

namespace pt = boost::property_tree;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  const std::string s = boost::to_lower_copy(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

template <typename F>
auto convert(const std::string& key, const std::string& value, F f) {
  try {
    return f(value);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::size_t count_value(const std::string& key, const std::string& v) {
  return convert(key, v, [](const std::string& s) { return parse_count(s); });
}

double real_value(const std::string& key, const std::string& v) {
  return convert(key, v, [](const std::string& s) { return parse_real(s); });
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  RunConfig c;
  const std::set<std::string> sections = {"datasets", "models", "sweep", "training", "output"};
  for (const auto& [name, _] : tree) {
    if (!sections.contains(name)) throw ConfigError("unknown config section [" + name + "]");
  }

  bool have_datasets = false;
  bool have_archs = false;
  if (auto s = tree.get_child_optional("datasets")) {
    for (const auto& [key, node] : *s) {
      const std::string v = node.data();
      const std::string full = "datasets." + key;
      if (key == "names") {
        c.datasets = split_list(v);
        have_datasets = true;
      } else if (key.starts_with("path.")) {
        c.dataset_paths[key.substr(5)] = v;
      } else if (key.starts_with("max_nodes.")) {
        c.max_nodes[key.substr(10)] = count_value(full, v);
      } else {
        throw ConfigError("unknown key " + full);
      }
    }
  }
  if (auto s = tree.get_child_optional("models")) {
    for (const auto& [key, node] : *s) {
      const std::string v = node.data();
      const std::string full = "models." + key;
      if (key == "archs") {
        for (const auto& a : split_list(v)) {
          c.archs.push_back(convert(full, a, [](const std::string& x) { return parse_arch(x); }));
        }
        have_archs = true;
      } else if (key == "d_in") {
        c.hyper.d_in = count_value(full, v);
      } else if (key == "hidden") {
        c.hyper.hidden = count_value(full, v);
      } else if (key == "heads") {
        c.hyper.heads = count_value(full, v);
      } else if (key == "kernel") {
        c.hyper.kernel = count_value(full, v);
      } else if (key == "decoder_hidden") {
        c.hyper.decoder_hidden = count_value(full, v);
      } else if (key == "tcn_gated") {
        c.hyper.tcn_gated = parse_bool(full, v);
      } else {
        throw ConfigError("unknown key " + full);
      }
    }
  }
  if (auto s = tree.get_child_optional("sweep")) {
    for (const auto& [key, node] : *s) {
      const std::string v = node.data();
      const std::string full = "sweep." + key;
      if (key == "grid") {
        if (boost::iequals(boost::trim_copy(v), "auto")) {
          c.grid.reset();
        } else {
          std::vector<Tau> grid;
          for (const auto& t : split_list(v)) {
            grid.push_back(convert(full, t, [](const std::string& x) { return Tau::parse(x); }));
          }
          c.grid = grid;
        }
      } else if (key == "grid_cap") {
        c.grid_cap = count_value(full, v);
      } else if (key == "seeds") {
        c.seeds = count_value(full, v);
      } else if (key == "master_seed") {
        c.master_seed = count_value(full, v);
      } else if (key == "split") {
        c.split = real_value(full, v);
      } else {
        throw ConfigError("unknown key " + full);
      }
    }
  }
  if (auto s = tree.get_child_optional("training")) {
    for (const auto& [key, node] : *s) {
      const std::string v = node.data();
      const std::string full = "training." + key;
      if (key == "epochs") {
        c.training.epochs = count_value(full, v);
      } else if (key == "lr") {
        c.training.learning_rate = real_value(full, v);
      } else if (key == "negatives_per_positive") {
        c.training.negatives_per_positive = count_value(full, v);
      } else {
        throw ConfigError("unknown key " + full);
      }
    }
  }
  if (auto s = tree.get_child_optional("output")) {
    for (const auto& [key, node] : *s) {
      const std::string v = node.data();
      const std::string full = "output." + key;
      if (key == "dir") {
        c.output_dir = v;
      } else if (key == "parallelism") {
        c.parallelism = count_value(full, v);
      } else if (key == "emit_loss") {
        c.emit_loss = parse_bool(full, v);
      } else if (key == "record_wall_time") {
        c.record_wall_time = parse_bool(full, v);
      } else if (key == "svg") {
        c.svg = parse_bool(full, v);
      } else {
        throw ConfigError("unknown key " + full);
      }
    }
  }

  if (!have_datasets || c.datasets.empty()) throw ConfigError("datasets.names is empty");
  if (!have_archs || c.archs.empty()) throw ConfigError("models.archs is empty");
  if (c.seeds == 0) throw ConfigError("sweep.seeds must be positive");
  if (c.parallelism == 0) throw ConfigError("output.parallelism must be positive");
  if (!(c.split > 0.0 && c.split < 1.0)) throw ConfigError("sweep.split must lie in (0, 1)");
  if (c.training.negatives_per_positive == 0) {
    throw ConfigError("training.negatives_per_positive must be positive");
  }
  if (c.grid) validate_tau_grid(*c.grid, std::nullopt);

  std::set<std::string> seen;
  for (const auto& d : c.datasets) {
    if (!seen.insert(d).second) throw ConfigError("dataset listed twice: " + d);
    if (d == kSyntheticDataset || c.dataset_paths.contains(d)) continue;
    if (find_dataset(d) == nullptr) {
      throw ConfigError("dataset '" + d + "' is neither registered nor given a path");
    }
  }
  std::set<Arch> archs;
  for (Arch a : c.archs) {
    if (!archs.insert(a).second) throw ConfigError("arch listed twice: " + std::string(arch_name(a)));
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  return parse_run_config(in);
}

Dtdg load_configured_dataset(const RunConfig& config, const std::string& name) {
  Dtdg d = [&] {
    if (auto it = config.dataset_paths.find(name); it != config.dataset_paths.end()) {
      return load_dataset_cache(it->second);
    }
    if (name == kSyntheticDataset) return period_two_graph();
    auto path = default_cache_path(name);
    if (!path) throw ConfigError("TEMPOFIELD_DATA_DIR is unset; cannot locate " + name);
    if (!std::filesystem::exists(*path)) {
      throw ConfigError("dataset not available: " + path->string());
    }
    return load_dataset_cache(*path);
  }();
  if (auto it = config.max_nodes.find(name); it != config.max_nodes.end()) {
    d = subsample_top_degree(d, it->second);
  }
  // Seeds are keyed on the dataset name, so use the configured one.
  if (d.name() != name) {
    d = Dtdg(name, d.num_nodes(), {d.snapshots().begin(), d.snapshots().end()},
             {d.raw_ids().begin(), d.raw_ids().end()});
  }
  return d;
}

}  // namespace tempofield
