#include "tempofield/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "tempofield/error.hpp"

namespace tempofield {

using nlohmann::json;

void write_checkpoint(std::ostream& out, const ModelState& m) {
  json doc;
  doc["format"] = "tempofield-checkpoint";
  doc["version"] = 1;
  doc["arch"] = std::string(arch_name(m.arch));
  doc["num_nodes"] = m.num_nodes;
  doc["hyper"] = {{"d_in", m.hyper.d_in},
                  {"hidden", m.hyper.hidden},
                  {"heads", m.hyper.heads},
                  {"kernel", m.hyper.kernel},
                  {"decoder_hidden", m.hyper.decoder_hidden},
                  {"max_positions", m.hyper.max_positions},
                  {"tcn_gated", m.hyper.tcn_gated}};
  json params = json::array();
  for (const auto& [name, t] : m.params.entries()) {
    params.push_back({{"name", name},
                      {"shape", {t.rows(), t.cols()}},
                      {"data", std::vector<double>(t.data().begin(), t.data().end())}});
  }
  doc["params"] = std::move(params);
  out << doc.dump() << '\n';
}

ModelState read_checkpoint(std::istream& in) {
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != "tempofield-checkpoint") throw ParseError("not a tempofield checkpoint");
    if (doc.at("version") != 1) throw ParseError("unsupported checkpoint version");
    ModelState m;
    m.arch = parse_arch(doc.at("arch").get<std::string>());
    m.num_nodes = doc.at("num_nodes").get<std::size_t>();
    const auto& h = doc.at("hyper");
    m.hyper.d_in = h.at("d_in").get<std::size_t>();
    m.hyper.hidden = h.at("hidden").get<std::size_t>();
    m.hyper.heads = h.at("heads").get<std::size_t>();
    m.hyper.kernel = h.at("kernel").get<std::size_t>();
    m.hyper.decoder_hidden = h.at("decoder_hidden").get<std::size_t>();
    m.hyper.max_positions = h.at("max_positions").get<std::size_t>();
    m.hyper.tcn_gated = h.at("tcn_gated").get<bool>();
    for (const auto& jp : doc.at("params")) {
      const auto shape = jp.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2) throw ParseError("parameter shape must have two dimensions");
      m.params.add(jp.at("name").get<std::string>(),
                   Tensor::parameter({shape[0], shape[1]}, jp.at("data").get<std::vector<double>>()));
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ModelState& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_checkpoint(out, m);
}

ModelState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace tempofield
