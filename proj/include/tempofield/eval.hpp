#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tempofield/dtdg.hpp"
#include "tempofield/models.hpp"
#include "tempofield/rng.hpp"

namespace tempofield {

/// Positives of G^{t+1} plus an equal number of sampled non-edges.
struct LabeledEdgeSet {
  std::size_t t = 0;  ///< prediction step (window end)
  std::vector<Edge> positives;
  std::vector<Edge> negatives;

  std::vector<Edge> pairs() const;   ///< positives then negatives
  std::vector<int> labels() const;   ///< 1 for positives, 0 for negatives
};

/// Uniform sample without replacement of `count` unordered non-self-loop
/// pairs absent from `target`. Throws ProtocolError if there are too few.
std::vector<Edge> sample_negatives(const Snapshot& target, std::size_t count, std::size_t n, Rng& rng);

LabeledEdgeSet make_labeled_set(std::size_t t, const Snapshot& target, std::size_t n, Rng& rng,
                                std::size_t negatives_per_positive = 1);

/// Mean over positives of precision at the positive's rank (descending
/// score). Tied scores contribute their expected precision under a uniformly
/// random order inside the tie group. Throws DegenerateInputError without
/// positives.
double average_precision(std::span<const double> scores, std::span<const int> labels);

struct StepRecord {
  std::size_t t = 0;
  std::optional<double> ap;  ///< nullopt when the target snapshot had no edges
};

/// Scores the balanced set for target = snapshot window.end + 1.
StepRecord evaluate_step(const ModelState& m, const TemporalWindow& w, const Snapshot& target,
                         AdjacencyCache& adj, Rng& rng, LabeledEdgeSet* labeled = nullptr);

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
  std::size_t negatives_per_positive = 1;
};

/// Full-batch balanced BCE training over every step t with t + 1 <= train_end.
/// Returns the mean loss of each epoch; empty for EdgeBank.
std::vector<double> train(ModelState& m, const Dtdg& d, Tau tau, const SplitSpec& split,
                          const TrainConfig& config, Rng& rng);

struct EvalResult {
  std::string dataset;
  Arch arch = Arch::kEdgeBank;
  Tau tau = Tau::infinite();
  std::size_t seed = 0;
  std::vector<StepRecord> per_step;
  double mean_ap = 0.0;
  double wall_time_ms = 0.0;

  std::size_t skipped() const;
};

/// Evaluates each test step with its own stream derived from (eval_seed, t).
EvalResult rolling_evaluate(const ModelState& m, const Dtdg& d, Tau tau, const SplitSpec& split,
                            std::uint64_t eval_seed, AdjacencyCache& adj);

/// One (dataset, arch, tau, seed) unit: build, train, evaluate.
struct ExperimentSpec {
  Arch arch = Arch::kEdgeBank;
  Tau tau = Tau::infinite();
  std::size_t seed = 0;
  std::uint64_t master_seed = 0;
  double train_fraction = 0.7;
  ModelHyper hyper;
  TrainConfig training;
};

struct ExperimentOutcome {
  EvalResult result;
  std::vector<double> loss_curve;
};

/// Model init and training draw from a stream keyed by (master, dataset,
/// arch, tau, seed); evaluation negatives from (master, dataset, seed), so
/// every arch and tau of a seed is scored on the same pairs.
ExperimentOutcome run_experiment(const Dtdg& d, const ExperimentSpec& spec);

std::uint64_t training_seed(const ExperimentSpec& spec, const std::string& dataset);
std::uint64_t evaluation_seed(const ExperimentSpec& spec, const std::string& dataset);

}  // namespace tempofield
