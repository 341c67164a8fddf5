#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "lognnet/detail/rng.hpp"
#include "lognnet/error.hpp"
#include "lognnet/training.hpp"
#include "support/synthetic.hpp"

using namespace lognnet;

TEST(Balance, TenObjectExample) {
  // d3, d8 and d9 form the minority class.
  const std::vector<int> labels{0, 0, 1, 0, 0, 0, 0, 1, 1, 0};
  const std::vector<std::size_t> expected{0, 2, 1, 7, 3, 8, 4, 2, 5, 7, 6, 8, 9, 2};
  EXPECT_EQ(balance_indices(labels), expected);
}

TEST(Balance, FirstAppearanceDecidesClassOrder) {
  const std::vector<int> labels{1, 0, 0};
  EXPECT_EQ(balance_indices(labels), (std::vector<std::size_t>{0, 1, 0, 2}));
}

TEST(Balance, AlreadyBalancedIsInterleavedOnly) {
  const std::vector<int> labels{0, 0, 1, 1};
  EXPECT_EQ(balance_indices(labels), (std::vector<std::size_t>{0, 2, 1, 3}));
}

TEST(Balance, SingleClassIsIdentity) {
  const std::vector<int> labels{1, 1, 1};
  EXPECT_EQ(balance_indices(labels), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Balance, EmptyInputRejected) {
  EXPECT_THROW(balance_indices({}), Error);
}

TEST(Balance, SamplesCarryThrough) {
  auto ds = synth::dataset_from_rows({{1}, {2}, {3}}, {0, 0, 1});
  auto out = balance_training_set(ds.samples);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0].values[0], 1);
  EXPECT_EQ(out[1].values[0], 3);
  EXPECT_EQ(out[2].values[0], 2);
  EXPECT_EQ(out[3].values[0], 3);
}

namespace {

double head_loss(const ClassifierWeights& w, const std::vector<double>& s_h, int label) {
  std::vector<double> h2, out;
  head_forward(w, s_h, h2, out);
  return -std::log(out[static_cast<std::size_t>(label)]);
}

}  // namespace

TEST(Gradient, MatchesCentralDifferences) {
  detail::Rng rng(77);
  HeadGradient g;
  for (int draw = 0; draw < 20; ++draw) {
    auto m = init_model({3, 4, 3, 2}, table4_rbv1(), {1, 1, 1}, 100 + draw);
    std::vector<double> d{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto s_h = reservoir_features(m, d);
    const int label = static_cast<int>(rng.below(2));
    compute_head_gradient(m.weights, s_h, label, g);
    EXPECT_NEAR(g.loss, head_loss(m.weights, s_h, label), 1e-12);

    auto check = [&](Matrix ClassifierWeights::*which, const Matrix& grad) {
      for (std::size_t k = 0; k < grad.data.size(); ++k) {
        auto w = m.weights;
        const double h = 1e-5;
        (w.*which).data[k] += h;
        const double up = head_loss(w, s_h, label);
        (w.*which).data[k] -= 2 * h;
        const double down = head_loss(w, s_h, label);
        const double fd = (up - down) / (2 * h);
        const double scale = std::max(std::abs(fd) + std::abs(grad.data[k]), 1e-8);
        EXPECT_LT(std::abs(fd - grad.data[k]) / scale, 1e-4);
      }
    };
    check(&ClassifierWeights::hidden, g.d_hidden);
    check(&ClassifierWeights::output, g.d_output);
  }
}

TEST(Train, LossDecreases) {
  auto ds = synth::separable_dataset(100, 2, 4);
  auto div = normalization_divisors(ds, FeatureMask(3));
  auto m = init_model({3, 20, 10, 2}, table4_rbv1(), div, 3);
  auto balanced = balance_training_set(ds.samples);
  const double before = cross_entropy_loss(m, balanced);
  TrainConfig cfg;
  cfg.epochs = 20;
  auto trained = train(m, balanced, cfg);
  EXPECT_LT(cross_entropy_loss(trained, balanced), before);
}

TEST(Train, SingleSampleIsLearned) {
  auto ds = synth::dataset_from_rows({{0.3, 0.9}}, {1});
  auto m = init_model({2, 5, 4, 2}, table4_rbv2(), {1, 1}, 8);
  TrainConfig cfg;
  cfg.epochs = 200;
  auto trained = train(m, ds.samples, cfg);
  EXPECT_EQ(predict(trained, ds.samples[0].values), 1u);
  EXPECT_GT(forward(trained, ds.samples[0].values).S_out[1], 0.9);
}

TEST(Train, RejectsZeroEpochs) {
  auto ds = synth::dataset_from_rows({{1.0}}, {0});
  auto m = init_model({1, 2, 2, 2}, table4_rbv1(), {1}, 1);
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(train(m, ds.samples, cfg), Error);
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Metrics, AllCorrect) {
  std::vector<int> y{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  auto m = compute_metrics(y, y);
  EXPECT_EQ(m.accuracy, 100.0);
  for (int c = 0; c < 2; ++c) {
    EXPECT_EQ(m.precision[c], 1.0);
    EXPECT_EQ(m.recall[c], 1.0);
    EXPECT_EQ(m.f1[c], 1.0);
  }
}

TEST(Metrics, HandCountedExample) {
  std::vector<int> truth{1, 1, 0, 0}, pred{1, 0, 0, 0};
  auto m = compute_metrics(truth, pred);
  EXPECT_EQ(m.confusion, (ConfusionMatrix{1, 2, 0, 1}));
  EXPECT_EQ(m.accuracy, 75.0);
  EXPECT_EQ(m.precision[1], 1.0);
  EXPECT_EQ(m.recall[1], 0.5);
  EXPECT_NEAR(m.f1[1], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.precision[0], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(m.recall[0], 1.0);
  EXPECT_NEAR(m.f1[0], 0.8, 1e-15);
}

TEST(Metrics, AbsentClassIsFlagged) {
  std::vector<int> zeros{0, 0, 0};
  auto m = compute_metrics(zeros, zeros);
  EXPECT_TRUE(m.undefined[1]);
  EXPECT_FALSE(m.undefined[0]);
  EXPECT_EQ(m.precision[1], 0.0);
  EXPECT_EQ(m.recall[1], 0.0);
  EXPECT_EQ(m.f1[1], 0.0);
}

TEST(Metrics, BadInputRejected) {
  std::vector<int> a{0, 1}, b{0}, c{0, 2};
  EXPECT_THROW(compute_metrics(a, b), Error);
  EXPECT_THROW(compute_metrics(a, c), Error);
}

TEST(Folds, StratifiedPartition) {
  std::vector<int> labels(37, 0);
  for (std::size_t i = 0; i < 12; ++i) labels[i * 3] = 1;
  auto f = assign_folds(labels, 5, 9, true);
  ASSERT_EQ(f.size(), labels.size());
  std::array<std::array<int, 2>, 5> counts{};
  for (std::size_t i = 0; i < f.size(); ++i) {
    ASSERT_LT(f[i], 5u);
    ++counts[f[i]][static_cast<std::size_t>(labels[i])];
  }
  for (const auto& c : counts) {
    EXPECT_GE(c[1], 2);
    EXPECT_LE(c[1], 3);
    EXPECT_GE(c[0], 5);
    EXPECT_LE(c[0], 5 + 1);
  }
  EXPECT_EQ(assign_folds(labels, 5, 9, true), f);
  EXPECT_NE(assign_folds(labels, 5, 10, true), f);
}

TEST(Folds, SmallClassNeedsNonStratified) {
  std::vector<int> labels{0, 0, 0, 0, 1, 1};
  EXPECT_THROW(assign_folds(labels, 3, 1, true), Error);
  auto f = assign_folds(labels, 3, 1, false);
  std::vector<int> per(3, 0);
  for (auto x : f) ++per[x];
  EXPECT_EQ(per, (std::vector<int>{2, 2, 2}));
}

TEST(KFold, EverySampleTestedOnce) {
  auto ds = synth::separable_dataset(40, 1, 2);
  TrainConfig cfg;
  cfg.epochs = 3;
  auto r = kfold_evaluate(ds, {2, 8, 4, 2}, table4_rbv1(), FeatureMask(2), cfg);
  EXPECT_EQ(r.pooled.confusion.total(), 40u);
  EXPECT_EQ(r.fold_of_sample.size(), 40u);
  EXPECT_EQ(r.fold_accuracies.size(), 5u);
  std::set<std::size_t> seen(r.fold_of_sample.begin(), r.fold_of_sample.end());
  EXPECT_EQ(seen.size(), 5u);
  double mean = 0;
  for (double a : r.fold_accuracies) mean += a / 5.0;
  EXPECT_NEAR(r.mean_fold_accuracy, mean, 1e-12);
}

TEST(KFold, LeaveOneOut) {
  auto ds = synth::dataset_from_rows({{0.1}, {0.2}, {0.3}, {0.7}, {0.8}, {0.9}},
                                       {0, 0, 0, 1, 1, 1});
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.folds = 6;
  cfg.stratified = false;
  auto r = kfold_evaluate(ds, {1, 4, 3, 2}, table4_rbv2(), FeatureMask(1), cfg);
  EXPECT_EQ(r.pooled.confusion.total(), 6u);
  std::vector<std::size_t> folds = r.fold_of_sample;
  std::sort(folds.begin(), folds.end());
  EXPECT_EQ(folds, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(KFold, DeterministicAndJobIndependent) {
  auto ds = synth::separable_dataset(60, 2, 6);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.seed = 21;
  auto a = kfold_evaluate(ds, {3, 10, 5, 2}, table4_rbv1(), FeatureMask(3), cfg);
  auto b = kfold_evaluate(ds, {3, 10, 5, 2}, table4_rbv1(), FeatureMask(3), cfg);
  cfg.jobs = 4;
  auto c = kfold_evaluate(ds, {3, 10, 5, 2}, table4_rbv1(), FeatureMask(3), cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(KFold, SeparableSetWithTruncatedModulo) {
  auto ds = synth::separable_dataset(200, 3, 1);
  TrainConfig cfg;
  cfg.epochs = 30;
  auto gen = table4_rbv1();
  gen.modulo = ModuloConvention::kTruncated;
  auto r = kfold_evaluate(ds, {4, 50, 20, 2}, gen, FeatureMask(4), cfg);
  EXPECT_EQ(synth::best_cut_accuracy(ds, 1), 100.0);
  EXPECT_GE(r.pooled.accuracy, 95.0);
}

TEST(KFold, SeparableSetWithDefaultModulo) {
  // The non-negative reservoir learns this set more slowly; at 30 epochs it
  // sits near 92% rather than above 95%.
  auto ds = synth::separable_dataset(200, 3, 1);
  TrainConfig cfg;
  cfg.epochs = 30;
  auto r = kfold_evaluate(ds, {4, 50, 20, 2}, table4_rbv1(), FeatureMask(4), cfg);
  EXPECT_GE(r.pooled.accuracy, 80.0);
}

TEST(KFold, MaskedFeatureCannotHelp) {
  auto ds = synth::separable_dataset(100, 1, 8);
  TrainConfig cfg;
  cfg.epochs = 10;
  auto r = kfold_evaluate(ds, {2, 10, 5, 2}, table4_rbv1(), FeatureMask::from_removed(2, {1}),
                          cfg);
  EXPECT_LT(r.pooled.accuracy, 75.0);
}

TEST(KFold, MissingValuesRejected) {
  auto ds = synth::separable_dataset(20, 1, 1);
  ds.samples[0].missing = {true, false};
  EXPECT_THROW(kfold_evaluate(ds, {2, 4, 2, 2}, table4_rbv1(), FeatureMask(2), TrainConfig{}),
               Error);
}

TEST(TrainFull, FitsSeparableSet) {
  auto ds = synth::separable_dataset(100, 1, 3);
  TrainConfig cfg;
  cfg.epochs = 50;
  auto gen = table4_rbv1();
  gen.modulo = ModuloConvention::kTruncated;
  auto m = train_full(ds, {2, 20, 10, 2}, gen, FeatureMask(2), cfg);
  std::size_t correct = 0;
  for (const auto& s : ds.samples)
    correct += static_cast<int>(predict(m, s.values)) == s.label ? 1 : 0;
  EXPECT_GE(correct, 90u);
}
