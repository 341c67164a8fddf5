#include "lognnet/training.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "lognnet/detail/parallel.hpp"
#include "lognnet/detail/rng.hpp"
#include "lognnet/error.hpp"

namespace lognnet {

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::kInvalidParameter, "epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidParameter, "learning rate must be positive");
  }
  if (folds < 2) throw Error(ErrorCode::kInvalidParameter, "need at least 2 folds");
}

std::vector<std::size_t> balance_indices(std::span<const int> labels) {
  if (labels.empty()) throw Error(ErrorCode::kBalancing, "cannot balance an empty training set");

  std::vector<int> class_order;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      throw Error(ErrorCode::kBalancing, "negative class label at position " + std::to_string(i));
    }
    auto it = std::find(class_order.begin(), class_order.end(), labels[i]);
    if (it == class_order.end()) {
      class_order.push_back(labels[i]);
      groups.emplace_back();
      it = class_order.end() - 1;
    }
    groups[static_cast<std::size_t>(it - class_order.begin())].push_back(i);
  }

  std::size_t max_count = 0;
  for (const auto& g : groups) max_count = std::max(max_count, g.size());

  std::vector<std::size_t> out;
  out.reserve(max_count * groups.size());
  for (std::size_t k = 0; k < max_count; ++k) {
    for (const auto& g : groups) out.push_back(g[k % g.size()]);
  }
  return out;
}

std::vector<Sample> balance_training_set(std::span<const Sample> samples) {
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const auto& s : samples) labels.push_back(s.label);
  std::vector<Sample> out;
  for (auto i : balance_indices(labels)) out.push_back(samples[i]);
  return out;
}

void compute_head_gradient(const ClassifierWeights& w, std::span<const double> s_h, int label,
                           HeadGradient& out) {
  const std::size_t H = w.hidden.rows;
  const std::size_t M = w.output.rows;
  if (label < 0 || static_cast<std::size_t>(label) >= M) {
    throw Error(ErrorCode::kLabel, "label " + std::to_string(label) + " outside the model's classes");
  }
  std::vector<double> s_h2, s_out;
  head_forward(w, s_h, s_h2, s_out);

  out.loss = -std::log(std::max(s_out[static_cast<std::size_t>(label)], 1e-300));
  // Every entry is overwritten below; only reallocate on a shape change.
  if (out.d_output.rows != M || out.d_output.cols != H + 1) out.d_output = Matrix(M, H + 1);
  if (out.d_hidden.rows != H || out.d_hidden.cols != w.hidden.cols) {
    out.d_hidden = Matrix(H, w.hidden.cols);
  }

  // Softmax + cross-entropy: dL/dz_out = p - onehot.
  std::vector<double> dz(M);
  for (std::size_t m = 0; m < M; ++m) {
    dz[m] = s_out[m] - (static_cast<std::size_t>(label) == m ? 1.0 : 0.0);
    out.d_output(m, 0) = dz[m];
    for (std::size_t h = 0; h < H; ++h) out.d_output(m, h + 1) = dz[m] * s_h2[h];
  }
  for (std::size_t h = 0; h < H; ++h) {
    double back = 0.0;
    for (std::size_t m = 0; m < M; ++m) back += w.output(m, h + 1) * dz[m];
    const double da = back * s_h2[h] * (1.0 - s_h2[h]);
    for (std::size_t k = 0; k < s_h.size(); ++k) out.d_hidden(h, k) = da * s_h[k];
  }
}

double cross_entropy_loss(const LogNNetModel& model, std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : samples) {
    const auto t = forward(model, s.values);
    total -= std::log(std::max(t.S_out.at(static_cast<std::size_t>(s.label)), 1e-300));
  }
  return total / static_cast<double>(samples.size());
}

LogNNetModel train(LogNNetModel model, std::span<const Sample> balanced, const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw Error(ErrorCode::kInvalidParameter, "epochs must be >= 1");
  if (!(cfg.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "learning rate must be positive");
  }
  if (balanced.empty()) throw Error(ErrorCode::kInvalidParameter, "training sequence is empty");

  // W and the divisors are frozen, so S_h is fixed per sample.
  std::vector<std::vector<double>> features;
  features.reserve(balanced.size());
  for (const auto& s : balanced) features.push_back(reservoir_features(model, s.values));

  const double lr = cfg.learning_rate;
  HeadGradient g;
  auto& w = model.weights;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t n = 0; n < balanced.size(); ++n) {
      compute_head_gradient(w, features[n], balanced[n].label, g);
      for (std::size_t k = 0; k < w.hidden.data.size(); ++k) w.hidden.data[k] -= lr * g.d_hidden.data[k];
      for (std::size_t k = 0; k < w.output.data.size(); ++k) w.output.data[k] -= lr * g.d_output.data[k];
    }
  }
  return model;
}

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::kShape, "truth and prediction lists differ in length");
  }
  if (truth.empty()) throw Error(ErrorCode::kInvalidParameter, "no predictions to score");

  Metrics m;
  auto& c = m.confusion;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = predicted[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) {
      throw Error(ErrorCode::kLabel, "metrics require labels in {0, 1}");
    }
    if (t == 1 && p == 1) ++c.TP;
    else if (t == 0 && p == 0) ++c.TN;
    else if (t == 0 && p == 1) ++c.FP;
    else ++c.FN;
  }
  m.accuracy = 100.0 * static_cast<double>(c.TP + c.TN) / static_cast<double>(c.total());

  // Per class: hits, predicted count, true count.
  const std::array<std::array<std::size_t, 3>, 2> per_class{{
      {c.TN, c.TN + c.FN, c.TN + c.FP},
      {c.TP, c.TP + c.FP, c.TP + c.FN},
  }};
  for (std::size_t k = 0; k < 2; ++k) {
    const auto [hits, pred, actual] = per_class[k];
    m.precision[k] = pred ? static_cast<double>(hits) / static_cast<double>(pred) : 0.0;
    m.recall[k] = actual ? static_cast<double>(hits) / static_cast<double>(actual) : 0.0;
    const double s = m.precision[k] + m.recall[k];
    m.f1[k] = s > 0.0 ? 2.0 * m.precision[k] * m.recall[k] / s : 0.0;
    m.undefined[k] = pred == 0 && actual == 0;
  }
  return m;
}

std::vector<std::size_t> assign_folds(std::span<const int> labels, std::size_t k,
                                      std::uint64_t seed, bool stratified) {
  if (k < 2) throw Error(ErrorCode::kFold, "need at least 2 folds");
  if (labels.size() < k) {
    throw Error(ErrorCode::kFold, "cannot split " + std::to_string(labels.size()) +
                                      " samples into " + std::to_string(k) + " folds");
  }
  detail::Rng rng(seed);
  std::vector<std::size_t> fold(labels.size(), 0);

  if (!stratified) {
    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span(order));
    for (std::size_t pos = 0; pos < order.size(); ++pos) fold[order[pos]] = pos % k;
    return fold;
  }

  const int max_label = *std::max_element(labels.begin(), labels.end());
  std::size_t offset = 0;
  for (int c = 0; c <= max_label; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(i);
    }
    if (members.size() < k) {
      throw Error(ErrorCode::kFold, "class " + std::to_string(c) + " has " +
                                        std::to_string(members.size()) +
                                        " members, fewer than " + std::to_string(k) +
                                        " folds (use non-stratified folds)");
    }
    rng.shuffle(std::span(members));
    for (std::size_t pos = 0; pos < members.size(); ++pos) fold[members[pos]] = (offset + pos) % k;
    offset = (offset + members.size()) % k;
  }
  return fold;
}

namespace {

constexpr std::uint64_t kShuffleStream = 0x5eedf01dULL;

std::vector<Sample> masked_subset(const Dataset& ds, const FeatureMask& mask,
                                  const std::vector<std::size_t>& idx) {
  std::vector<Sample> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(apply_mask(ds.samples[i], mask));
  return out;
}

void check_compatible(const Dataset& ds, const NetworkShape& shape, const FeatureMask& mask) {
  shape.validate();
  if (shape.N != ds.num_features()) {
    throw Error(ErrorCode::kShape, "network expects " + std::to_string(shape.N) +
                                       " inputs, dataset has " +
                                       std::to_string(ds.num_features()) + " features");
  }
  if (mask.num_features() != ds.num_features()) {
    throw Error(ErrorCode::kShape, "feature mask width differs from the dataset");
  }
  for (const auto& s : ds.samples) {
    if (s.has_missing()) {
      throw Error(ErrorCode::kImputation, "dataset has missing values; impute before training");
    }
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= shape.M) {
      throw Error(ErrorCode::kLabel, "label outside the network's classes");
    }
  }
}

}  // namespace

CrossValidationResult kfold_evaluate(const Dataset& ds, const NetworkShape& shape,
                                     const GeneratorParams& gen, const FeatureMask& mask,
                                     const TrainConfig& cfg) {
  cfg.validate();
  check_compatible(ds, shape, mask);
  const std::size_t K = cfg.folds;

  std::vector<int> labels;
  labels.reserve(ds.size());
  for (const auto& s : ds.samples) labels.push_back(s.label);

  CrossValidationResult result;
  result.fold_of_sample =
      assign_folds(labels, K, detail::derive_seed(cfg.seed, kShuffleStream), cfg.stratified);

  // The reservoir is identical for every fold.
  const ReservoirMatrix reservoir = fill_reservoir(gen, shape.N, shape.P);

  std::vector<int> predicted(ds.size(), 0);
  result.fold_accuracies.assign(K, 0.0);

  detail::parallel_for(K, cfg.jobs, [&](std::size_t f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      (result.fold_of_sample[i] == f ? test_idx : train_idx).push_back(i);
    }
    if (train_idx.empty() || test_idx.empty()) {
      throw Error(ErrorCode::kFold, "fold " + std::to_string(f) + " is empty");
    }
    const auto train_set = masked_subset(ds, mask, train_idx);
    auto model = init_model(shape, gen, normalization_divisors(train_set, mask),
                            detail::derive_seed(cfg.seed, f), false);
    model.reservoir = reservoir;
    model = train(std::move(model), balance_training_set(train_set), cfg);

    std::size_t correct = 0;
    for (auto i : test_idx) {
      const auto s = apply_mask(ds.samples[i], mask);
      predicted[i] = static_cast<int>(predict(model, s.values));
      if (predicted[i] == s.label) ++correct;
    }
    result.fold_accuracies[f] =
        100.0 * static_cast<double>(correct) / static_cast<double>(test_idx.size());
  });

  result.pooled = compute_metrics(labels, predicted);
  double sum = 0.0;
  for (double a : result.fold_accuracies) sum += a;
  result.mean_fold_accuracy = sum / static_cast<double>(K);
  return result;
}

LogNNetModel train_full(const Dataset& ds, const NetworkShape& shape, const GeneratorParams& gen,
                        const FeatureMask& mask, const TrainConfig& cfg) {
  check_compatible(ds, shape, mask);
  if (ds.samples.empty()) throw Error(ErrorCode::kInvalidParameter, "dataset is empty");
  const auto masked = apply_mask(ds, mask);
  auto model = init_model(shape, gen, normalization_divisors(masked, mask), cfg.seed);
  return train(std::move(model), balance_training_set(masked.samples), cfg);
}

nlohmann::json to_json(const Metrics& m) {
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t k = 0; k < 2; ++k) {
    per_class.push_back({{"class", k},
                         {"precision", m.precision[k]},
                         {"recall", m.recall[k]},
                         {"f1", m.f1[k]},
                         {"undefined", m.undefined[k]}});
  }
  return {{"accuracy", m.accuracy},
          {"per_class", per_class},
          {"confusion",
           {{"TP", m.confusion.TP}, {"TN", m.confusion.TN}, {"FP", m.confusion.FP},
            {"FN", m.confusion.FN}}}};
}

nlohmann::json to_json(const CrossValidationResult& r) {
  auto j = to_json(r.pooled);
  j["accuracy_pooled"] = r.pooled.accuracy;
  j["accuracy_mean_of_folds"] = r.mean_fold_accuracy;
  j["fold_accuracies"] = r.fold_accuracies;
  j.erase("accuracy");
  return j;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed},
          {"folds", c.folds},
          {"stratified", c.stratified}};
}

}  // namespace lognnet
