#include "tempofield/dataset_io.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "tempofield/error.hpp"

namespace tempofield {

using nlohmann::json;

void write_dataset_cache(std::ostream& out, const Dtdg& d) {
  json doc;
  doc["format"] = "tempofield-dtdg";
  doc["version"] = 1;
  doc["name"] = d.name();
  doc["num_nodes"] = d.num_nodes();
  doc["num_snapshots"] = d.num_snapshots();
  doc["raw_ids"] = std::vector<std::int64_t>(d.raw_ids().begin(), d.raw_ids().end());
  json snaps = json::array();
  for (const auto& s : d.snapshots()) {
    json edges = json::array();
    for (const auto& e : s.edges()) edges.push_back({e.u, e.v});
    json js = {{"t", s.t()},
               {"edges", std::move(edges)},
               {"multiplicity", std::vector<std::uint32_t>(s.multiplicity().begin(),
                                                           s.multiplicity().end())}};
    if (s.has_weights()) {
      js["weights"] = std::vector<double>(s.weights().begin(), s.weights().end());
    }
    snaps.push_back(std::move(js));
  }
  doc["snapshots"] = std::move(snaps);
  out << doc.dump() << '\n';
}

Dtdg read_dataset_cache(std::istream& in) {
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset cache is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != "tempofield-dtdg") throw ParseError("not a tempofield-dtdg document");
    if (doc.at("version") != 1) throw ParseError("unsupported dataset cache version");
    const auto n = doc.at("num_nodes").get<std::size_t>();
    const auto T = doc.at("num_snapshots").get<std::size_t>();
    const auto& snaps = doc.at("snapshots");
    if (snaps.size() != T) throw ParseError("num_snapshots disagrees with snapshot array");

    std::vector<Snapshot> snapshots;
    snapshots.reserve(T);
    for (const auto& js : snaps) {
      const auto& edges = js.at("edges");
      const auto mult = js.at("multiplicity").get<std::vector<std::uint32_t>>();
      std::vector<double> weights;
      if (js.contains("weights")) weights = js.at("weights").get<std::vector<double>>();
      if (mult.size() != edges.size() || (!weights.empty() && weights.size() != edges.size())) {
        throw ParseError("edge, multiplicity and weight arrays differ in length");
      }
      std::vector<RawEdge> raw;
      for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto u = edges[i].at(0).get<NodeId>();
        const auto v = edges[i].at(1).get<NodeId>();
        for (std::uint32_t m = 0; m < std::max<std::uint32_t>(mult[i], 1); ++m) {
          std::optional<double> w;
          if (!weights.empty()) w = m == 0 ? weights[i] : 0.0;
          raw.push_back({u, v, w});
        }
      }
      snapshots.push_back(
          snapshot_from_edges(js.at("t").get<std::size_t>(), std::span<const RawEdge>(raw), n));
    }
    return Dtdg(doc.at("name").get<std::string>(), n, std::move(snapshots),
                doc.value("raw_ids", std::vector<std::int64_t>{}));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed dataset cache: ") + e.what());
  }
}

void save_dataset_cache(const std::filesystem::path& path, const Dtdg& d) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_dataset_cache(out, d);
}

Dtdg load_dataset_cache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read dataset cache " + path.string());
  return read_dataset_cache(in);
}

std::optional<std::filesystem::path> default_cache_path(const std::string& name) {
  const char* dir = std::getenv("TEMPOFIELD_DATA_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  std::string file = name;
  std::transform(file.begin(), file.end(), file.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return std::filesystem::path(dir) / (file + ".dtdg.json");
}

}  // namespace tempofield
