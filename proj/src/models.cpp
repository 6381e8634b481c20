#include "tempofield/models.hpp"

#include <algorithm>
#include <cmath>

#include "tempofield/error.hpp"

namespace tempofield {

std::string_view arch_name(Arch arch) {
  switch (arch) {
    case Arch::kEdgeBank: return "edgebank";
    case Arch::kEgcn: return "egcn";
    case Arch::kGclstm: return "gclstm";
    case Arch::kDysat: return "dysat";
    case Arch::kStgcn: return "stgcn";
  }
  return "unknown";
}

Arch parse_arch(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Arch a : all_archs()) {
    if (arch_name(a) == key) return a;
  }
  throw ConfigError("unknown architecture '" + std::string(name) + "'");
}

bool is_parametric(Arch arch) { return arch != Arch::kEdgeBank; }

const std::vector<Arch>& all_archs() {
  static const std::vector<Arch> archs = {Arch::kEgcn, Arch::kDysat, Arch::kGclstm, Arch::kStgcn,
                                          Arch::kEdgeBank};
  return archs;
}

void ParamSet::add(std::string name, Tensor value) {
  if (contains(name)) throw ConfigError("parameter '" + name + "' registered twice");
  entries_.emplace_back(std::move(name), std::move(value));
}

const Tensor& ParamSet::get(std::string_view name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw ConfigError("no parameter named '" + std::string(name) + "'");
}

Tensor& ParamSet::get(std::string_view name) {
  return const_cast<Tensor&>(static_cast<const ParamSet&>(*this).get(name));
}

bool ParamSet::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == name; });
}

std::vector<Tensor> ParamSet::tensors() const {
  std::vector<Tensor> out;
  for (const auto& [n, t] : entries_) out.push_back(t);
  return out;
}

std::size_t ModelState::embedding_width() const {
  return arch == Arch::kEgcn ? hyper.hidden : hyper.d_in;
}

namespace {

Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.uniform(-a, a);
  return Tensor::parameter({rows, cols}, std::move(v));
}

Tensor zero_param(std::size_t rows, std::size_t cols) {
  return Tensor::parameter({rows, cols}, std::vector<double>(rows * cols, 0.0));
}

}  // namespace

ModelState make_model(Arch arch, std::size_t num_nodes, ModelHyper hyper, Rng& rng) {
  ModelState m;
  m.arch = arch;
  m.num_nodes = num_nodes;
  m.hyper = hyper;
  if (!is_parametric(arch)) return m;

  const std::size_t h = hyper.hidden;
  if (h == 0 || hyper.d_in == 0 || hyper.decoder_hidden == 0) {
    throw ConfigError("model widths must be positive");
  }
  auto& p = m.params;
  p.add("embed", glorot(num_nodes, m.embedding_width(), rng));

  switch (arch) {
    case Arch::kDysat: {
      if (hyper.heads == 0 || h % hyper.heads != 0) {
        throw ConfigError("hidden size " + std::to_string(h) + " not divisible by " +
                          std::to_string(hyper.heads) + " heads");
      }
      if (hyper.max_positions == 0) throw ConfigError("DySAT needs max_positions > 0");
      const std::size_t dh = h / hyper.heads;
      for (std::size_t k = 0; k < hyper.heads; ++k) {
        const auto s = std::to_string(k);
        p.add("dysat.head" + s + ".W", glorot(hyper.d_in, dh, rng));
        p.add("dysat.head" + s + ".a_src", glorot(dh, 1, rng));
        p.add("dysat.head" + s + ".a_dst", glorot(dh, 1, rng));
      }
      p.add("dysat.pos", glorot(hyper.max_positions, h, rng));
      p.add("dysat.Wq", glorot(h, h, rng));
      p.add("dysat.Wk", glorot(h, h, rng));
      p.add("dysat.Wv", glorot(h, h, rng));
      p.add("dysat.Wo", glorot(h, h, rng));
      break;
    }
    case Arch::kGclstm:
      p.add("gclstm.Wx", glorot(hyper.d_in, 4 * h, rng));
      p.add("gclstm.Wh", glorot(h, 4 * h, rng));
      p.add("gclstm.b", zero_param(1, 4 * h));
      break;
    case Arch::kEgcn:
      p.add("egcn.theta0", glorot(h, h, rng));
      for (const char* gate : {"z", "r", "h"}) {
        const std::string g(gate);
        p.add("egcn.W" + g, glorot(h, h, rng));
        p.add("egcn.U" + g, glorot(h, h, rng));
        p.add("egcn.B" + g, zero_param(h, h));
      }
      break;
    case Arch::kStgcn: {
      if (hyper.kernel == 0) throw ConfigError("STGCN kernel width must be positive");
      const std::size_t out = hyper.tcn_gated ? 2 * h : h;
      p.add("stgcn.tcn1.W", glorot(hyper.kernel * hyper.d_in, out, rng));
      p.add("stgcn.tcn1.b", zero_param(1, out));
      p.add("stgcn.gcn.W", glorot(h, h, rng));
      p.add("stgcn.tcn2.W", glorot(hyper.kernel * h, out, rng));
      p.add("stgcn.tcn2.b", zero_param(1, out));
      break;
    }
    case Arch::kEdgeBank: break;
  }

  p.add("dec.W1", glorot(3 * h, hyper.decoder_hidden, rng));
  p.add("dec.b1", zero_param(1, hyper.decoder_hidden));
  p.add("dec.W2", glorot(hyper.decoder_hidden, 1, rng));
  p.add("dec.b2", zero_param(1, 1));
  return m;
}

AdjacencyCache::AdjacencyCache(const Dtdg& graph)
    : owned_(graph.snapshots()), n_(graph.num_nodes()), cache_(graph.num_snapshots()) {}

Tensor AdjacencyCache::operator()(const Snapshot& s) {
  const bool owned = !owned_.empty() && &s >= owned_.data() && &s < owned_.data() + owned_.size();
  if (!owned) return Tensor::constant({n_, n_}, normalized_adjacency(s, n_));
  auto& slot = cache_[static_cast<std::size_t>(&s - owned_.data())];
  if (!slot.defined()) slot = Tensor::constant({n_, n_}, normalized_adjacency(s, n_));
  return slot;
}

Tensor gcn_layer(const Tensor& a_hat, const Tensor& h, const Tensor& w) {
  return relu(matmul(a_hat, matmul(h, w)));
}

namespace {

void require_window(const TemporalWindow& w) {
  if (w.size() == 0) throw ConfigError("encoder called with an empty window");
}

/// (n x 1) column broadcast across `cols` columns.
Tensor broadcast_col(const Tensor& col, std::size_t cols) {
  return matmul(col, Tensor::ones({1, cols}));
}

/// Row-wise sum, n x 1.
Tensor row_sum(const Tensor& x) { return matmul(x, Tensor::ones({x.cols(), 1})); }

std::vector<unsigned char> support_mask(const Snapshot& s, std::size_t n) {
  std::vector<unsigned char> mask(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) mask[i * n + i] = 1;
  for (const auto& e : s.edges()) {
    mask[e.u * n + e.v] = 1;
    mask[e.v * n + e.u] = 1;
  }
  return mask;
}

}  // namespace

Tensor encode_dysat(const ModelState& m, const TemporalWindow& w, AdjacencyCache& adj,
                    DysatTrace* trace) {
  require_window(w);
  (void)adj;
  const auto& p = m.params;
  const std::size_t n = m.num_nodes;
  const std::size_t h = m.hyper.hidden;
  const Tensor& x = p.get("embed");
  const Tensor& pos = p.get("dysat.pos");

  // Embeddings are shared by all snapshots, so only the attention mask varies.
  std::vector<Tensor> proj, logits_all;
  for (std::size_t hd = 0; hd < m.hyper.heads; ++hd) {
    const auto tag = "dysat.head" + std::to_string(hd);
    proj.push_back(matmul(x, p.get(tag + ".W")));
    const Tensor src = matmul(proj.back(), p.get(tag + ".a_src"));  // n x 1
    const Tensor dst = matmul(proj.back(), p.get(tag + ".a_dst"));  // n x 1
    logits_all.push_back(
        leaky_relu(add(broadcast_col(src, n), transpose(broadcast_col(dst, n))), 0.2));
  }

  std::vector<Tensor> frames;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto mask = support_mask(w[k], n);
    std::vector<Tensor> heads;
    for (std::size_t hd = 0; hd < m.hyper.heads; ++hd) {
      const Tensor alpha = softmax_rows(logits_all[hd], mask);
      if (trace != nullptr) trace->structural.push_back(alpha);
      heads.push_back(elu(matmul(alpha, proj[hd])));
    }
    const std::size_t lag = w.end() - (w.start() + k);
    if (lag >= pos.rows()) {
      throw ConfigError("DySAT position table holds " + std::to_string(pos.rows()) +
                        " lags, window needs lag " + std::to_string(lag));
    }
    frames.push_back(add(concat_cols(heads), slice_rows(pos, lag, 1)));
  }

  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(h));
  const Tensor q = matmul(frames.back(), p.get("dysat.Wq"));
  std::vector<Tensor> logits;
  std::vector<Tensor> values;
  for (const auto& f : frames) {
    logits.push_back(scale(row_sum(mul(q, matmul(f, p.get("dysat.Wk")))), inv_sqrt));
    values.push_back(matmul(f, p.get("dysat.Wv")));
  }
  const Tensor alpha = softmax_rows(concat_cols(logits));  // n x L
  if (trace != nullptr) trace->temporal = alpha;
  Tensor out = mul(broadcast_col(slice_cols(alpha, 0, 1), h), values[0]);
  for (std::size_t k = 1; k < values.size(); ++k) {
    out = add(out, mul(broadcast_col(slice_cols(alpha, k, 1), h), values[k]));
  }
  return matmul(out, p.get("dysat.Wo"));
}

Tensor encode_gclstm(const ModelState& m, const TemporalWindow& w, AdjacencyCache& adj) {
  require_window(w);
  const auto& p = m.params;
  const std::size_t n = m.num_nodes;
  const std::size_t h = m.hyper.hidden;
  const Tensor xw = matmul(p.get("embed"), p.get("gclstm.Wx"));
  const Tensor& wh = p.get("gclstm.Wh");
  const Tensor& b = p.get("gclstm.b");

  Tensor hs = Tensor::zeros({n, h});
  Tensor cs = Tensor::zeros({n, h});
  for (const Snapshot& s : w.snapshots()) {
    const Tensor a = adj(s);
    const Tensor pre = add(add(matmul(a, xw), matmul(a, matmul(hs, wh))), b);
    const Tensor in_gate = sigmoid(slice_cols(pre, 0, h));
    const Tensor forget = sigmoid(slice_cols(pre, h, h));
    const Tensor cand = tanh(slice_cols(pre, 2 * h, h));
    const Tensor out_gate = sigmoid(slice_cols(pre, 3 * h, h));
    cs = add(mul(forget, cs), mul(in_gate, cand));
    hs = mul(out_gate, tanh(cs));
  }
  return hs;
}

Tensor encode_egcn(const ModelState& m, const TemporalWindow& w, AdjacencyCache& adj,
                   EgcnTrace* trace) {
  require_window(w);
  const auto& p = m.params;
  const std::size_t h = m.hyper.hidden;
  Tensor theta = p.get("egcn.theta0");
  Tensor hs = p.get("embed");
  for (const Snapshot& s : w.snapshots()) {
    const auto active = s.active_nodes();
    Tensor pooled;
    if (active.empty()) {
      pooled = mean_rows(hs);
    } else {
      const std::vector<std::size_t> rows(active.begin(), active.end());
      pooled = mean_rows(gather_rows(hs, rows));
    }
    const Tensor summary = broadcast_col(transpose(pooled), h);  // h x h, column j = pooled^T
    auto gate = [&](const char* g, const Tensor& state) {
      const std::string k(g);
      return add(add(matmul(p.get("egcn.W" + k), summary), matmul(p.get("egcn.U" + k), state)),
                 p.get("egcn.B" + k));
    };
    const Tensor update = sigmoid(gate("z", theta));
    const Tensor reset = sigmoid(gate("r", theta));
    const Tensor cand = tanh(gate("h", mul(reset, theta)));
    theta = add(theta, mul(update, sub(cand, theta)));
    if (trace != nullptr) trace->thetas.push_back(theta);
    hs = gcn_layer(adj(s), hs, theta);
  }
  return hs;
}

namespace {

/// Causal temporal convolution at output position k of a frame sequence,
/// treating frames before index 0 as zeros.
Tensor causal_tap(std::span<const Tensor> frames, std::size_t k, std::size_t width,
                  std::size_t channels, std::size_t rows, const Tensor& weight, const Tensor& bias,
                  bool gated) {
  std::vector<Tensor> taps;
  for (std::size_t j = 0; j < width; ++j) {
    const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(k + j) - static_cast<std::ptrdiff_t>(width - 1);
    taps.push_back(idx < 0 ? Tensor::zeros({rows, channels}) : frames[static_cast<std::size_t>(idx)]);
  }
  const Tensor lin = add(matmul(concat_cols(taps), weight), bias);
  if (!gated) return lin;
  const std::size_t half = lin.cols() / 2;
  return mul(slice_cols(lin, 0, half), sigmoid(slice_cols(lin, half, half)));
}

}  // namespace

Tensor encode_stgcn(const ModelState& m, const TemporalWindow& w, AdjacencyCache& adj) {
  require_window(w);
  const auto& p = m.params;
  const std::size_t n = m.num_nodes;
  const std::size_t h = m.hyper.hidden;
  const std::size_t width = m.hyper.kernel;
  const bool gated = m.hyper.tcn_gated;
  const std::size_t L = w.size();
  const std::vector<Tensor> inputs(L, p.get("embed"));

  // Only the last `width` graph frames reach the final output position.
  const std::size_t first = L > width ? L - width : 0;
  std::vector<Tensor> graph_frames(L);
  for (std::size_t k = first; k < L; ++k) {
    const Tensor t1 = causal_tap(inputs, k, width, m.hyper.d_in, n, p.get("stgcn.tcn1.W"),
                                 p.get("stgcn.tcn1.b"), gated);
    graph_frames[k] = gcn_layer(adj(w[k]), t1, p.get("stgcn.gcn.W"));
  }
  return causal_tap(graph_frames, L - 1, width, h, n, p.get("stgcn.tcn2.W"),
                    p.get("stgcn.tcn2.b"), gated);
}

Tensor encode(const ModelState& m, const TemporalWindow& w, AdjacencyCache& adj) {
  switch (m.arch) {
    case Arch::kDysat: return encode_dysat(m, w, adj);
    case Arch::kGclstm: return encode_gclstm(m, w, adj);
    case Arch::kEgcn: return encode_egcn(m, w, adj);
    case Arch::kStgcn: return encode_stgcn(m, w, adj);
    case Arch::kEdgeBank: break;
  }
  throw ConfigError("EdgeBank has no encoder");
}

double edgebank_score(const TemporalWindow& w, NodeId u, NodeId v) {
  for (const Snapshot& s : w.snapshots()) {
    if (s.contains(u, v)) return 1.0;
  }
  return 0.0;
}

Tensor decode_logits(const ModelState& m, const Tensor& z, std::span<const Edge> pairs) {
  std::vector<std::size_t> lo, hi;
  lo.reserve(pairs.size());
  hi.reserve(pairs.size());
  for (const auto& e : pairs) {
    if (e.u >= z.rows() || e.v >= z.rows()) {
      throw OutOfRangeError("decode: pair (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                            ") outside " + std::to_string(z.rows()) + " nodes");
    }
    lo.push_back(std::min(e.u, e.v));
    hi.push_back(std::max(e.u, e.v));
  }
  const Tensor za = gather_rows(z, lo);
  const Tensor zb = gather_rows(z, hi);
  const Tensor feats[] = {za, zb, mul(za, zb)};
  const auto& p = m.params;
  const Tensor hidden = relu(add(matmul(concat_cols(feats), p.get("dec.W1")), p.get("dec.b1")));
  return add(matmul(hidden, p.get("dec.W2")), p.get("dec.b2"));
}

double decode_edge(const ModelState& m, const Tensor& z, NodeId u, NodeId v) {
  const Edge pair{u, v};
  return sigmoid(decode_logits(m, z, std::span<const Edge>(&pair, 1))).item();
}

std::vector<double> score_pairs(const ModelState& m, const TemporalWindow& w,
                                std::span<const Edge> pairs, AdjacencyCache& adj) {
  std::vector<double> scores;
  scores.reserve(pairs.size());
  if (!is_parametric(m.arch)) {
    for (const auto& e : pairs) scores.push_back(edgebank_score(w, e.u, e.v));
    return scores;
  }
  if (pairs.empty()) return scores;
  NoGradScope no_grad;
  const Tensor probs = sigmoid(decode_logits(m, encode(m, w, adj), pairs));
  scores.assign(probs.data().begin(), probs.data().end());
  return scores;
}

}  // namespace tempofield
