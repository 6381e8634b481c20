#include "tempofield/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "tempofield/error.hpp"
#include "tempofield/optim.hpp"

namespace tempofield {

std::vector<Edge> LabeledEdgeSet::pairs() const {
  std::vector<Edge> out(positives);
  out.insert(out.end(), negatives.begin(), negatives.end());
  return out;
}

std::vector<int> LabeledEdgeSet::labels() const {
  std::vector<int> out(positives.size(), 1);
  out.resize(positives.size() + negatives.size(), 0);
  return out;
}

namespace {

std::uint64_t pair_key(NodeId u, NodeId v) { return (std::uint64_t{u} << 32) | v; }

/// Unordered pair with index k in the enumeration (0,1), (0,2), ..., (1,2), ...
Edge pair_at(std::uint64_t k, std::uint64_t n) {
  std::uint64_t u = 0;
  std::uint64_t row = n - 1;
  while (k >= row) {
    k -= row;
    ++u;
    --row;
  }
  return {static_cast<NodeId>(u), static_cast<NodeId>(u + 1 + k)};
}

}  // namespace

std::vector<Edge> sample_negatives(const Snapshot& target, std::size_t count, std::size_t n, Rng& rng) {
  const std::uint64_t total = n < 2 ? 0 : std::uint64_t{n} * (n - 1) / 2;
  const std::uint64_t available = total - target.num_edges();
  if (count > available) {
    throw ProtocolError("snapshot " + std::to_string(target.t()) + " has " +
                        std::to_string(available) + " non-edges, " + std::to_string(count) +
                        " negatives requested");
  }
  std::vector<Edge> out;
  if (count == 0) return out;
  out.reserve(count);

  if (count * 4 >= available) {
    // Dense regime: enumerate the complement and partially shuffle it.
    std::vector<Edge> pool;
    pool.reserve(available);
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (!target.contains(u, v)) pool.push_back({u, v});
      }
    }
    for (std::size_t i = 0; i < count; ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    }
    pool.resize(count);
    return pool;
  }

  std::unordered_set<std::uint64_t> seen;
  while (out.size() < count) {
    const Edge e = pair_at(rng.below(total), n);
    if (target.contains(e.u, e.v)) continue;
    if (seen.insert(pair_key(e.u, e.v)).second) out.push_back(e);
  }
  return out;
}

LabeledEdgeSet make_labeled_set(std::size_t t, const Snapshot& target, std::size_t n, Rng& rng,
                                std::size_t negatives_per_positive) {
  LabeledEdgeSet set;
  set.t = t;
  set.positives.assign(target.edges().begin(), target.edges().end());
  set.negatives = sample_negatives(target, negatives_per_positive * set.positives.size(), n, rng);
  return set;
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("average_precision: " + std::to_string(scores.size()) + " scores for " +
                     std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const auto total_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (total_pos == 0) throw DegenerateInputError("average precision needs at least one positive");

  double sum = 0.0;
  std::size_t before = 0;      // items ranked ahead of the current group
  std::size_t pos_before = 0;  // positives among them
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t a = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1) ++a;
      ++j;
    }
    const std::size_t g = j - i;
    // Slot r (1-based) holds a positive with probability a/g; given that,
    // the expected number of group positives ahead of it is (r-1)(a-1)/(g-1).
    for (std::size_t r = 1; r <= g && a > 0; ++r) {
      const double ahead = g == 1 ? 0.0
                                  : static_cast<double>(r - 1) * static_cast<double>(a - 1) /
                                        static_cast<double>(g - 1);
      const double precision = (static_cast<double>(pos_before) + 1.0 + ahead) /
                               static_cast<double>(before + r);
      sum += static_cast<double>(a) / static_cast<double>(g) * precision;
    }
    before += g;
    pos_before += a;
    i = j;
  }
  return sum / static_cast<double>(total_pos);
}

StepRecord evaluate_step(const ModelState& m, const TemporalWindow& w, const Snapshot& target,
                         AdjacencyCache& adj, Rng& rng, LabeledEdgeSet* labeled) {
  if (target.t() != w.end() + 1) {
    throw ProtocolError("target snapshot " + std::to_string(target.t()) +
                      " does not follow window end " + std::to_string(w.end()));
  }
  StepRecord record{w.end(), std::nullopt};
  if (target.num_edges() == 0) return record;
  LabeledEdgeSet set = make_labeled_set(w.end(), target, m.num_nodes, rng);
  const auto scores = score_pairs(m, w, set.pairs(), adj);
  const auto labels = set.labels();
  record.ap = average_precision(scores, labels);
  if (labeled != nullptr) *labeled = std::move(set);
  return record;
}

std::vector<double> train(ModelState& m, const Dtdg& d, Tau tau, const SplitSpec& split,
                          const TrainConfig& config, Rng& rng) {
  std::vector<double> curve;
  if (!is_parametric(m.arch)) return curve;
  if (split.train_end >= d.num_snapshots()) throw ConfigError("split exceeds the graph");

  AdjacencyCache adj(d);
  Adam opt(m.params.tensors(), AdamConfig{config.learning_rate});
  opt.zero_grad();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    std::size_t steps = 0;
    for (std::size_t t = 0; t + 1 <= split.train_end; ++t) {
      const Snapshot& target = d.snapshot(t + 1);
      if (target.num_edges() == 0) continue;
      const LabeledEdgeSet set =
          make_labeled_set(t, target, d.num_nodes(), rng, config.negatives_per_positive);
      const auto pairs = set.pairs();
      const auto int_labels = set.labels();
      const std::vector<double> labels(int_labels.begin(), int_labels.end());

      Tape tape;
      double loss_value = 0.0;
      {
        TapeScope scope(tape);
        const Tensor z = encode(m, window(d, t, tau), adj);
        const Tensor loss = bce_with_logits(decode_logits(m, z, pairs), labels);
        loss_value = loss.item();
        if (!std::isfinite(loss_value)) {
          throw TrainingError("loss is not finite at epoch " + std::to_string(epoch) + ", step t=" +
                              std::to_string(t));
        }
        tape.backward(loss);
      }
      opt.step();
      total += loss_value;
      ++steps;
    }
    curve.push_back(steps == 0 ? 0.0 : total / static_cast<double>(steps));
  }
  return curve;
}

std::size_t EvalResult::skipped() const {
  return static_cast<std::size_t>(
      std::count_if(per_step.begin(), per_step.end(), [](const auto& s) { return !s.ap; }));
}

EvalResult rolling_evaluate(const ModelState& m, const Dtdg& d, Tau tau, const SplitSpec& split,
                            std::uint64_t eval_seed, AdjacencyCache& adj) {
  EvalResult result;
  result.dataset = d.name();
  result.arch = m.arch;
  result.tau = tau;
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t t : split.test_steps()) {
    Rng rng(SeedKey(eval_seed).add(std::uint64_t{t}).value());
    const StepRecord step = evaluate_step(m, window(d, t, tau), d.snapshot(t + 1), adj, rng);
    if (step.ap) {
      sum += *step.ap;
      ++counted;
    }
    result.per_step.push_back(step);
  }
  if (counted == 0) throw ProtocolError("every test step of " + d.name() + " was skipped");
  result.mean_ap = sum / static_cast<double>(counted);
  return result;
}

std::uint64_t training_seed(const ExperimentSpec& spec, const std::string& dataset) {
  return SeedKey(spec.master_seed)
      .add(dataset)
      .add(arch_name(spec.arch))
      .add(spec.tau.to_string())
      .add(std::uint64_t{spec.seed})
      .value();
}

std::uint64_t evaluation_seed(const ExperimentSpec& spec, const std::string& dataset) {
  return SeedKey(spec.master_seed).add(dataset).add("eval").add(std::uint64_t{spec.seed}).value();
}

ExperimentOutcome run_experiment(const Dtdg& d, const ExperimentSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  const SplitSpec split = chronological_split(d, spec.train_fraction);
  ModelHyper hyper = spec.hyper;
  if (hyper.max_positions == 0) hyper.max_positions = d.num_snapshots();

  Rng rng(training_seed(spec, d.name()));
  ExperimentOutcome out;
  ModelState model = make_model(spec.arch, d.num_nodes(), hyper, rng);
  out.loss_curve = train(model, d, spec.tau, split, spec.training, rng);
  AdjacencyCache adj(d);
  out.result = rolling_evaluate(model, d, spec.tau, split, evaluation_seed(spec, d.name()), adj);
  out.result.seed = spec.seed;
  out.result.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace tempofield
