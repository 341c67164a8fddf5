#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lognnet/chaos.hpp"
#include "lognnet/dataset.hpp"
#include "lognnet/network.hpp"
#include "lognnet/training.hpp"

namespace lognnet {

struct SelectionOptions {
  std::size_t repeats = 1;  // evaluations averaged per subset
  unsigned jobs = 1;        // parallel candidate evaluations
  bool use_cache = true;
};

/// Seed used to score the subset with removed set `removed`. It depends only
/// on the base seed, the subset and the repeat number, so every subset score
/// is a pure function of the subset.
std::uint64_t subset_seed(std::uint64_t base_seed, const FeatureMask& removed,
                          std::size_t repeat = 0);

/// Cross-validated pooled accuracy (percent) with the mask applied.
double evaluate_subset(const Dataset& ds, const NetworkShape& shape, const GeneratorParams& gen,
                       const FeatureMask& mask, const TrainConfig& cfg,
                       std::size_t repeats = 1);

/// Memoizing wrapper around evaluate_subset. Thread-safe.
class SubsetEvaluator {
 public:
  SubsetEvaluator(const Dataset& ds, NetworkShape shape, GeneratorParams gen, TrainConfig cfg,
                  SelectionOptions options = {});

  double accuracy(const FeatureMask& mask);
  std::size_t evaluations() const;

  const SelectionOptions& options() const noexcept { return options_; }
  std::size_t num_features() const noexcept { return ds_.num_features(); }

 private:
  const Dataset& ds_;
  NetworkShape shape_;
  GeneratorParams gen_;
  TrainConfig cfg_;
  SelectionOptions options_;
  mutable std::mutex mutex_;
  std::map<std::vector<std::size_t>, double> cache_;
  std::size_t evaluations_ = 0;
};

/// dA(z) = A(FR) - A(FR + {z}) for every feature not yet removed.
struct StrengthCurve {
  double base_accuracy = 0.0;
  FeatureMask removed;
  std::map<std::size_t, double> dA;
  std::map<std::size_t, double> accuracy_without;  // A(FR + {z})
};

struct EliminationStep {
  StrengthCurve curve;
  std::optional<std::size_t> removed;
  double accuracy_after = 0.0;
};

struct EliminationTrace {
  std::vector<EliminationStep> iterations;
  FeatureMask final_mask;
  std::vector<std::size_t> ranking;
};

StrengthCurve feature_strength_curve(SubsetEvaluator& eval, const FeatureMask& removed);
StrengthCurve feature_strength_curve(const Dataset& ds, const NetworkShape& shape,
                                     const GeneratorParams& gen, const FeatureMask& removed,
                                     const TrainConfig& cfg, const SelectionOptions& options = {});

/// Removes the argmin-dA feature (lowest index on ties) while any dA is
/// negative and more than one feature remains.
EliminationTrace backward_eliminate(SubsetEvaluator& eval);
EliminationTrace backward_eliminate(const Dataset& ds, const NetworkShape& shape,
                                    const GeneratorParams& gen, const TrainConfig& cfg,
                                    const SelectionOptions& options = {});

/// Features by dA descending, ties by ascending index.
std::vector<std::size_t> rank_features(const StrengthCurve& curve);

nlohmann::json to_json(const StrengthCurve& c);
nlohmann::json to_json(const EliminationTrace& t);

/// z,dA,accuracy_without
void write_strength_curve_csv(std::ostream& out, const StrengthCurve& curve);

}  // namespace lognnet
