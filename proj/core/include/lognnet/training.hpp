#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lognnet/dataset.hpp"
#include "lognnet/network.hpp"

namespace lognnet {

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 0.1;
  std::uint64_t seed = 1;
  std::size_t folds = 5;
  bool stratified = true;
  unsigned jobs = 1;  // fold-level parallelism; never affects results

  void validate() const;
};

/// Class balancing by cyclic duplication and round-robin interleaving.
/// Returns indices into `labels`: each class is extended to the size of the
/// largest class by cycling through its own members in order, then the groups
/// are interleaved, classes ordered by first appearance.
std::vector<std::size_t> balance_indices(std::span<const int> labels);
std::vector<Sample> balance_training_set(std::span<const Sample> samples);

struct HeadGradient {
  Matrix d_hidden;
  Matrix d_output;
  double loss = 0.0;
};

/// Cross-entropy loss of one sample and its gradient with respect to every
/// classifier weight, given the reservoir features S_h.
void compute_head_gradient(const ClassifierWeights& w, std::span<const double> s_h, int label,
                           HeadGradient& out);

/// Mean cross-entropy over `samples`.
double cross_entropy_loss(const LogNNetModel& model, std::span<const Sample> samples);

/// Per-sample SGD over the given sequence, `epochs` passes, head only.
LogNNetModel train(LogNNetModel model, std::span<const Sample> balanced, const TrainConfig& cfg);

struct ConfusionMatrix {
  std::size_t TP = 0, TN = 0, FP = 0, FN = 0;

  std::size_t total() const noexcept { return TP + TN + FP + FN; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct Metrics {
  double accuracy = 0.0;  // percent
  std::array<double, 2> precision{};
  std::array<double, 2> recall{};
  std::array<double, 2> f1{};
  std::array<bool, 2> undefined{};  // class absent from truth and predictions
  ConfusionMatrix confusion;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Class 1 is positive. Labels must be 0 or 1.
Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted);

/// Assigns every sample a fold in [0, K) after a seeded shuffle. Stratified
/// mode deals each class's shuffled members round-robin over the folds.
std::vector<std::size_t> assign_folds(std::span<const int> labels, std::size_t k,
                                      std::uint64_t seed, bool stratified);

struct CrossValidationResult {
  Metrics pooled;                       // over all (truth, prediction) pairs
  double mean_fold_accuracy = 0.0;      // average of per-fold accuracies
  std::vector<double> fold_accuracies;  // percent, one per fold
  std::vector<std::size_t> fold_of_sample;

  friend bool operator==(const CrossValidationResult&, const CrossValidationResult&) = default;
};

CrossValidationResult kfold_evaluate(const Dataset& ds, const NetworkShape& shape,
                                     const GeneratorParams& gen, const FeatureMask& mask,
                                     const TrainConfig& cfg);

/// Trains one model on the whole (masked, balanced) dataset.
LogNNetModel train_full(const Dataset& ds, const NetworkShape& shape, const GeneratorParams& gen,
                        const FeatureMask& mask, const TrainConfig& cfg);

nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const CrossValidationResult& r);
nlohmann::json to_json(const TrainConfig& c);

}  // namespace lognnet
