#include "lognnet/selection.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "lognnet/detail/parallel.hpp"
#include "lognnet/detail/rng.hpp"
#include "lognnet/error.hpp"

namespace lognnet {

std::uint64_t subset_seed(std::uint64_t base_seed, const FeatureMask& removed,
                          std::size_t repeat) {
  // FNV-1a over the width and the sorted removed indices.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  feed(removed.num_features());
  for (auto z : removed.removed()) feed(z);
  return detail::derive_seed(detail::derive_seed(base_seed, h), repeat);
}

double evaluate_subset(const Dataset& ds, const NetworkShape& shape, const GeneratorParams& gen,
                       const FeatureMask& mask, const TrainConfig& cfg, std::size_t repeats) {
  if (repeats < 1) throw Error(ErrorCode::kInvalidParameter, "repeats must be >= 1");
  double sum = 0.0;
  for (std::size_t r = 0; r < repeats; ++r) {
    TrainConfig c = cfg;
    c.seed = subset_seed(cfg.seed, mask, r);
    sum += kfold_evaluate(ds, shape, gen, mask, c).pooled.accuracy;
  }
  return sum / static_cast<double>(repeats);
}

SubsetEvaluator::SubsetEvaluator(const Dataset& ds, NetworkShape shape, GeneratorParams gen,
                                 TrainConfig cfg, SelectionOptions options)
    : ds_(ds), shape_(shape), gen_(gen), cfg_(cfg), options_(options) {}

double SubsetEvaluator::accuracy(const FeatureMask& mask) {
  const auto key = mask.removed();
  if (options_.use_cache) {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  const double a = evaluate_subset(ds_, shape_, gen_, mask, cfg_, options_.repeats);
  std::lock_guard lock(mutex_);
  ++evaluations_;
  if (options_.use_cache) cache_.emplace(key, a);
  return a;
}

std::size_t SubsetEvaluator::evaluations() const {
  std::lock_guard lock(mutex_);
  return evaluations_;
}

StrengthCurve feature_strength_curve(SubsetEvaluator& eval, const FeatureMask& removed) {
  const auto remaining = removed.selected();
  if (remaining.size() < 2) {
    throw Error(ErrorCode::kInvalidParameter, "a strength curve needs at least 2 features left");
  }
  StrengthCurve curve;
  curve.removed = removed;
  curve.base_accuracy = eval.accuracy(removed);

  std::vector<double> acc(remaining.size(), 0.0);
  detail::parallel_for(remaining.size(), eval.options().jobs, [&](std::size_t k) {
    FeatureMask m = removed;
    m.remove(remaining[k]);
    acc[k] = eval.accuracy(m);
  });
  for (std::size_t k = 0; k < remaining.size(); ++k) {
    curve.accuracy_without[remaining[k]] = acc[k];
    curve.dA[remaining[k]] = curve.base_accuracy - acc[k];
  }
  return curve;
}

StrengthCurve feature_strength_curve(const Dataset& ds, const NetworkShape& shape,
                                     const GeneratorParams& gen, const FeatureMask& removed,
                                     const TrainConfig& cfg, const SelectionOptions& options) {
  SubsetEvaluator eval(ds, shape, gen, cfg, options);
  return feature_strength_curve(eval, removed);
}

EliminationTrace backward_eliminate(SubsetEvaluator& eval) {
  const std::size_t nf = eval.num_features();
  if (nf < 2) throw Error(ErrorCode::kInvalidParameter, "elimination needs at least 2 features");

  EliminationTrace trace;
  FeatureMask fr(nf);
  while (fr.num_selected() >= 2) {
    EliminationStep step;
    step.curve = feature_strength_curve(eval, fr);
    step.accuracy_after = step.curve.base_accuracy;

    // std::map iterates in ascending z, so strict < keeps the lowest index.
    auto worst = step.curve.dA.begin();
    for (auto it = step.curve.dA.begin(); it != step.curve.dA.end(); ++it) {
      if (it->second < worst->second) worst = it;
    }
    const bool remove = worst->second < 0.0;
    if (remove) {
      step.removed = worst->first;
      step.accuracy_after = step.curve.accuracy_without.at(worst->first);
      fr.remove(worst->first);
    }
    trace.iterations.push_back(std::move(step));
    if (!remove) break;
  }

  trace.final_mask = fr;
  if (fr.num_selected() == 1) {
    trace.ranking = fr.selected();
  } else {
    trace.ranking = rank_features(trace.iterations.back().curve);
  }
  return trace;
}

EliminationTrace backward_eliminate(const Dataset& ds, const NetworkShape& shape,
                                    const GeneratorParams& gen, const TrainConfig& cfg,
                                    const SelectionOptions& options) {
  SubsetEvaluator eval(ds, shape, gen, cfg, options);
  return backward_eliminate(eval);
}

std::vector<std::size_t> rank_features(const StrengthCurve& curve) {
  if (curve.dA.empty()) throw Error(ErrorCode::kInvalidParameter, "strength curve is empty");
  std::vector<std::pair<std::size_t, double>> items(curve.dA.begin(), curve.dA.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::size_t> out;
  out.reserve(items.size());
  for (const auto& [z, _] : items) out.push_back(z);
  return out;
}

nlohmann::json to_json(const StrengthCurve& c) {
  nlohmann::json values = nlohmann::json::array();
  for (const auto& [z, d] : c.dA) {
    values.push_back({{"z", z}, {"dA", d}, {"accuracy_without", c.accuracy_without.at(z)}});
  }
  return {{"num_features", c.removed.num_selected()},
          {"base_accuracy", c.base_accuracy},
          {"removed", c.removed.removed()},
          {"values", values}};
}

nlohmann::json to_json(const EliminationTrace& t) {
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& s : t.iterations) {
    iterations.push_back({{"curve", to_json(s.curve)},
                          {"removed", s.removed ? nlohmann::json(*s.removed) : nlohmann::json()},
                          {"accuracy_after", s.accuracy_after}});
  }
  return {{"iterations", iterations},
          {"removed", t.final_mask.removed()},
          {"selected", t.final_mask.selected()},
          {"ranking", t.ranking}};
}

void write_strength_curve_csv(std::ostream& out, const StrengthCurve& curve) {
  out << "z,dA,accuracy_without\n";
  char buf[96];
  for (const auto& [z, d] : curve.dA) {
    std::snprintf(buf, sizeof buf, "%zu,%.6g,%.6g\n", z, d, curve.accuracy_without.at(z));
    out << buf;
  }
}

}  // namespace lognnet
