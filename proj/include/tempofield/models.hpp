#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tempofield/dtdg.hpp"
#include "tempofield/rng.hpp"
#include "tempofield/tensor.hpp"

namespace tempofield {

enum class Arch { kEdgeBank, kEgcn, kGclstm, kDysat, kStgcn };

std::string_view arch_name(Arch arch);
/// Case-insensitive; accepts "edgebank", "egcn", "gclstm", "dysat", "stgcn".
Arch parse_arch(std::string_view name);
bool is_parametric(Arch arch);
const std::vector<Arch>& all_archs();

struct ModelHyper {
  std::size_t d_in = 32;            ///< node embedding width (EGCN uses `hidden`)
  std::size_t hidden = 64;          ///< encoder output width d
  std::size_t heads = 4;            ///< structural attention heads (DySAT)
  std::size_t kernel = 3;           ///< temporal convolution width (STGCN)
  std::size_t decoder_hidden = 64;  ///< hidden units of the edge decoder MLP
  std::size_t max_positions = 0;    ///< DySAT position table length, 0 = num snapshots
  bool tcn_gated = true;            ///< STGCN gated linear units; false = plain linear taps
};

/// Named trainable tensors in registration order.
class ParamSet {
 public:
  void add(std::string name, Tensor value);
  const Tensor& get(std::string_view name) const;
  Tensor& get(std::string_view name);
  bool contains(std::string_view name) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::vector<Tensor> tensors() const;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// Architecture tag, hyperparameters and parameters of one model. Recurrent
/// state (GC-LSTM h/c, evolved EGCN weights, EdgeBank memory) is rebuilt from
/// each window, so it is not carried here.
struct ModelState {
  Arch arch = Arch::kEdgeBank;
  ModelHyper hyper;
  std::size_t num_nodes = 0;
  ParamSet params;

  std::size_t embedding_width() const;
};

/// Builds a model with uniform(-a, a), a = sqrt(6 / (fan_in + fan_out))
/// weights and zero biases, drawn from `rng` in registration order.
ModelState make_model(Arch arch, std::size_t num_nodes, ModelHyper hyper, Rng& rng);

/// Normalized adjacency constants of one graph's snapshots, computed on
/// first use. Snapshots that do not belong to the bound graph are computed
/// fresh on every call.
class AdjacencyCache {
 public:
  explicit AdjacencyCache(const Dtdg& graph);
  Tensor operator()(const Snapshot& s);
  std::size_t num_nodes() const { return n_; }

 private:
  std::span<const Snapshot> owned_;
  std::size_t n_;
  std::vector<Tensor> cache_;
};

/// relu(A_hat H W).
Tensor gcn_layer(const Tensor& a_hat, const Tensor& h, const Tensor& w);

/// Optional diagnostics captured during a forward pass.
struct DysatTrace {
  std::vector<Tensor> structural;  ///< per window step, per head: n x n weights
  Tensor temporal;                 ///< n x |window| weights of the last position
};

struct EgcnTrace {
  std::vector<Tensor> thetas;  ///< evolved weights after each window step
};

Tensor encode_dysat(const ModelState& m, const TemporalWindow& w, AdjacencyCache& adj,
                    DysatTrace* trace = nullptr);
Tensor encode_gclstm(const ModelState& m, const TemporalWindow& w, AdjacencyCache& adj);
Tensor encode_egcn(const ModelState& m, const TemporalWindow& w, AdjacencyCache& adj,
                   EgcnTrace* trace = nullptr);
Tensor encode_stgcn(const ModelState& m, const TemporalWindow& w, AdjacencyCache& adj);

/// Dispatches on m.arch. EdgeBank has no encoder (ConfigError).
Tensor encode(const ModelState& m, const TemporalWindow& w, AdjacencyCache& adj);

/// 1 iff the pair appears in any snapshot of the window.
double edgebank_score(const TemporalWindow& w, NodeId u, NodeId v);

/// Decoder logits for each pair: MLP([z_a | z_b | z_a * z_b]) with
/// (a, b) = (min, max) of the pair, one hidden ReLU layer. Shape |pairs| x 1.
Tensor decode_logits(const ModelState& m, const Tensor& z, std::span<const Edge> pairs);
/// sigmoid of decode_logits for a single pair.
double decode_edge(const ModelState& m, const Tensor& z, NodeId u, NodeId v);

/// Edge probabilities for every pair: encoder + decoder for parametric
/// models, window membership for EdgeBank.
std::vector<double> score_pairs(const ModelState& m, const TemporalWindow& w,
                                std::span<const Edge> pairs, AdjacencyCache& adj);

}  // namespace tempofield
