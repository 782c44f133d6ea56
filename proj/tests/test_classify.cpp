#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "twkit/classify.hpp"
#include "twkit/codec.hpp"
#include "twkit/rng.hpp"
#include "twkit/split.hpp"
#include "twkit/synth.hpp"
#include "support.hpp"

using namespace twkit;

namespace {

double train_accuracy(const Classifier& c, const Eigen::MatrixXd& x, const std::vector<std::size_t>& y) {
  const auto p = c.predict(x);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ok += p[i] == y[i] ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(y.size());
}

// Two Gaussian blobs at (+-2, +-2) with unit spread: linearly separable.
void blobs(std::size_t n, std::uint64_t seed, Eigen::MatrixXd& x, std::vector<std::size_t>& y) {
  Rng rng(seed);
  x.resize(static_cast<Eigen::Index>(2 * n), 2);
  y.clear();
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const double c = i < n ? -2.0 : 2.0;
    x(static_cast<Eigen::Index>(i), 0) = c + 0.4 * rng.normal();
    x(static_cast<Eigen::Index>(i), 1) = c + 0.4 * rng.normal();
    y.push_back(i < n ? 0 : 1);
  }
}

}  // namespace

TEST(Gini, ClosedForms) {
  EXPECT_EQ(gini(std::vector<double>{10, 0}), 0.0);
  EXPECT_EQ(gini(std::vector<double>{5, 5}), 0.5);
  EXPECT_EQ(gini(std::vector<double>{1, 1, 1, 1}), 0.75);
  EXPECT_THROW(gini(std::vector<double>{0, 0}), std::invalid_argument);
  EXPECT_EQ(gini(std::vector<double>{3, 7, 1}), gini(std::vector<double>{7, 1, 3}));
  EXPECT_GT(gini(std::vector<double>{4, 4, 4}), gini(std::vector<double>{5, 4, 3}));
}

TEST(Tree, ThresholdAtMidpoint) {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 4, 5;
  const std::vector<std::size_t> y{0, 0, 1, 1};
  const auto t = DecisionTree::train(x, y, 2, {}, 1);
  ASSERT_EQ(t.nodes().size(), 3u);
  EXPECT_EQ(t.nodes()[0].feature, 0);
  EXPECT_EQ(t.nodes()[0].threshold, 3.0);
  EXPECT_EQ(t.depth(), 1u);
  EXPECT_EQ(argmax_rows(t.predict_proba(x)), y);
}

TEST(Tree, PureDataIsSingleLeaf) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 3);
  const std::vector<std::size_t> y(6, 1);
  const auto t = DecisionTree::train(x, y, 3, {}, 1);
  EXPECT_EQ(t.nodes().size(), 1u);
  EXPECT_TRUE(t.nodes()[0].is_leaf());
}

TEST(Tree, FitsXorOfOneHotFeatures) {
  // The first split has zero Gini gain on XOR; the tree must still split.
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 0, 1, 1, 0, 1, 1;
  const std::vector<std::size_t> y{0, 1, 1, 0};
  const auto t = DecisionTree::train(x, y, 2, {}, 1);
  EXPECT_EQ(t.depth(), 2u);
  EXPECT_EQ(argmax_rows(t.predict_proba(x)), y);
  EXPECT_EQ(t.nodes()[0].feature, 0);  // tie goes to the lowest feature
}

TEST(Tree, RespectsDepthAndLeafSize) {
  Rng rng(3);
  Eigen::MatrixXd x(60, 3);
  std::vector<std::size_t> y;
  for (Eigen::Index i = 0; i < 60; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = rng.uniform();
    y.push_back(rng.below(3));
  }
  TreeConfig c;
  c.max_depth = 3;
  EXPECT_LE(DecisionTree::train(x, y, 3, c, 1).depth(), 3u);
  c = {};
  c.min_samples_leaf = 5;
  for (const auto& n : DecisionTree::train(x, y, 3, c, 1).nodes()) {
    EXPECT_GE(n.samples, 5u);
    if (!n.is_leaf()) {
      const auto& nodes = DecisionTree::train(x, y, 3, c, 1).nodes();
      EXPECT_EQ(nodes[static_cast<std::size_t>(n.left)].samples + nodes[static_cast<std::size_t>(n.right)].samples,
                n.samples);
    }
  }
}

TEST(Forest, DegenerateForestEqualsTree) {
  Eigen::MatrixXd x;
  std::vector<std::size_t> y;
  blobs(20, 4, x, y);
  ForestConfig fc;
  fc.n_trees = 1;
  fc.bootstrap = false;
  fc.tree.feature_subset_size = 2;
  const auto f = Forest::train(x, y, 2, fc, 77);
  TreeConfig tc;
  tc.feature_subset_size = 2;
  EXPECT_TRUE(f.trees()[0] == DecisionTree::train(x, y, 2, tc, Forest::tree_seed(77, 0)));
}

TEST(Forest, DeterministicAndSubsetSize) {
  const auto t = synthesize_corpus(default_synthesis_spec(), 300, 3);
  const auto enc = encode(t, Codec::fit_features(t));
  const auto y = t.labels();
  ForestConfig fc;
  fc.n_trees = 10;
  const auto a = Forest::train(enc.values, y, 7, fc, 5);
  const auto b = Forest::train(enc.values, y, 7, fc, 5);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.feature_subset_size(), static_cast<std::size_t>(std::ceil(std::sqrt(enc.values.cols()))));
  const auto p = a.predict_proba(enc.values);
  for (Eigen::Index r = 0; r < p.rows(); ++r) EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-9);
}

TEST(Forest, VotingTieBreaksToLowestClass) {
  Eigen::MatrixXd p(1, 2);
  p << 0.5, 0.5;
  EXPECT_EQ(argmax_rows(p)[0], 0u);
}

TEST(Forest, ImportanceNormalizedAndFavorsSignal) {
  Rng rng(9);
  Eigen::MatrixXd x(400, 2);
  std::vector<std::size_t> y;
  for (Eigen::Index i = 0; i < 400; ++i) {
    x(i, 0) = rng.uniform();
    x(i, 1) = rng.uniform();
    y.push_back(x(i, 0) > 0.5 ? 1 : 0);
  }
  ForestConfig fc;
  fc.n_trees = 20;
  const auto imp = Forest::train(x, y, 2, fc, 2).column_importance();
  EXPECT_NEAR(imp[0] + imp[1], 1.0, 1e-12);
  EXPECT_GT(imp[0], imp[1]);
  EXPECT_GE(imp[1], 0.0);

  Eigen::MatrixXd one = x.col(0);
  const auto single = Forest::train(one, y, 2, fc, 2).column_importance();
  ASSERT_EQ(single.size(), 1u);
  EXPECT_NEAR(single[0], 1.0, 1e-12);
}

TEST(Forest, TrainAccuracyAtLeastMeanTreeAccuracy) {
  const auto t = synthesize_corpus(default_synthesis_spec(), 600, 21);
  const auto enc = encode(t, Codec::fit_features(t));
  const auto y = t.labels();
  ForestConfig fc;
  fc.n_trees = 25;
  const auto f = Forest::train(enc.values, y, 7, fc, 4);
  auto acc = [&](const std::vector<std::size_t>& p) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < y.size(); ++i) ok += p[i] == y[i] ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(y.size());
  };
  double mean_tree = 0.0;
  for (const auto& tree : f.trees()) mean_tree += acc(argmax_rows(tree.predict_proba(enc.values)));
  mean_tree /= static_cast<double>(f.trees().size());
  EXPECT_GE(acc(f.predict(enc.values)), mean_tree);
}

TEST(Forest, SyntheticCorpusAccuracy) {
  const auto t = synthesize_corpus(default_synthesis_spec(), 1087, 7);
  const auto [train, test] = split_stratified(t, 0.2, 1);
  const auto codec = Codec::fit_features(train);
  const auto f = Forest::train(encode(train, codec).values, train.labels(), 7, {}, 3);
  const auto pred = f.predict(encode(test, codec).values);
  const auto truth = test.labels();
  std::size_t ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) ok += pred[i] == truth[i] ? 1 : 0;
  EXPECT_GE(static_cast<double>(ok) / static_cast<double>(truth.size()), 0.95);
}

TEST(Importance, AggregatesOneHotColumnsToAttributes) {
  const auto t = synthesize_corpus(default_synthesis_spec(), 400, 2);
  const auto codec = Codec::fit_features(t);
  ForestConfig fc;
  fc.n_trees = 10;
  const auto f = Forest::train(encode(t, codec).values, t.labels(), 7, fc, 1);
  const auto imp = attribute_importance(f.column_importance(), codec);
  EXPECT_EQ(imp.size(), 10u);
  double total = 0.0;
  for (std::size_t i = 0; i < imp.size(); ++i) {
    total += imp[i].weight;
    if (i > 0) EXPECT_GE(imp[i - 1].weight, imp[i].weight);
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Companions, SeparableBlobsFitExactly) {
  Eigen::MatrixXd x;
  std::vector<std::size_t> y;
  blobs(50, 12, x, y);
  for (const auto& name : benchmark_classifiers()) {
    auto c = make_classifier(name, 3);
    c->fit(x, y, 2);
    EXPECT_EQ(train_accuracy(*c, x, y), 1.0) << name;
    const auto p = c->predict_proba(x);
    for (Eigen::Index r = 0; r < p.rows(); ++r) EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-9) << name;
  }
}

TEST(Companions, Deterministic) {
  Eigen::MatrixXd x;
  std::vector<std::size_t> y;
  blobs(30, 5, x, y);
  for (const auto& name : benchmark_classifiers()) {
    auto a = make_classifier(name, 8);
    auto b = make_classifier(name, 8);
    a->fit(x, y, 2);
    b->fit(x, y, 2);
    EXPECT_EQ(a->predict_proba(x), b->predict_proba(x)) << name;
  }
}

TEST(Companions, LogRegBiasVanishesOnSymmetricData) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 1, 2, 0.5, -1, -1, -2, -0.5;
  const std::vector<std::size_t> y{1, 1, 0, 0};
  LogisticRegression lr;
  lr.fit(x, y, 2);
  EXPECT_NEAR(lr.bias()(0), 0.0, 1e-3);
  EXPECT_NEAR(lr.bias()(1), 0.0, 1e-3);
}

TEST(Companions, RejectSingleClass) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 2);
  const std::vector<std::size_t> y(5, 0);
  for (const auto& name : {"LR", "MLP", "SVM"}) {
    EXPECT_THROW(make_classifier(name, 1)->fit(x, y, 2), std::invalid_argument) << name;
  }
  EXPECT_THROW(make_classifier("knn", 1), std::invalid_argument);
}

TEST(Metrics, PerfectPredictions) {
  const std::vector<std::size_t> truth{0, 1, 2, 1};
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(4, 3);
  for (std::size_t i = 0; i < 4; ++i) s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(truth[i])) = 1.0;
  const auto m = compute_metrics(truth, s, truth, {"a", "b", "c"});
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.macro_auc, 1.0);
  for (const auto& c : m.per_class) EXPECT_EQ(c.f1, 1.0);
}

TEST(Metrics, NeverPredictedClassIsDefinedZero) {
  const std::vector<std::size_t> truth{0, 0, 1, 2};
  const std::vector<std::size_t> pred{0, 0, 0, 2};
  const Eigen::MatrixXd s = Eigen::MatrixXd::Constant(4, 3, 1.0 / 3);
  const auto m = compute_metrics(pred, s, truth, {"a", "b", "c"});
  EXPECT_EQ(m.per_class[1].precision, 0.0);
  EXPECT_EQ(m.per_class[1].recall, 0.0);
  EXPECT_EQ(m.per_class[1].f1, 0.0);
  EXPECT_EQ(m.accuracy, 0.75);
}

TEST(Metrics, ConfusionInvariants) {
  Rng rng(6);
  const std::size_t n = 150;
  std::vector<std::size_t> truth, pred;
  Eigen::MatrixXd s(static_cast<Eigen::Index>(n), 4);
  for (std::size_t i = 0; i < n; ++i) {
    truth.push_back(rng.below(4));
    pred.push_back(rng.below(4));
    for (Eigen::Index c = 0; c < 4; ++c) s(static_cast<Eigen::Index>(i), c) = rng.uniform();
  }
  const auto m = compute_metrics(pred, s, truth, {"a", "b", "c", "d"});
  std::size_t trace = 0;
  for (std::size_t c = 0; c < 4; ++c) {
    const auto row = std::accumulate(m.confusion[c].begin(), m.confusion[c].end(), std::size_t{0});
    EXPECT_EQ(row, m.per_class[c].support);
    trace += m.confusion[c][c];
    const auto& pc = m.per_class[c];
    const double h = pc.precision + pc.recall == 0 ? 0 : 2 * pc.precision * pc.recall / (pc.precision + pc.recall);
    EXPECT_EQ(pc.f1, h);
  }
  EXPECT_EQ(m.accuracy, static_cast<double>(trace) / static_cast<double>(n));
  EXPECT_THROW(compute_metrics(std::vector<std::size_t>{0}, s, truth, {"a", "b", "c", "d"}), std::invalid_argument);
}

TEST(Metrics, AbsentClassExcludedFromMacroAuc) {
  const std::vector<std::size_t> truth{0, 1, 0, 1};
  Eigen::MatrixXd s(4, 3);
  s << 0.9, 0.1, 0, 0.2, 0.8, 0, 0.7, 0.3, 0, 0.4, 0.6, 0;
  Warnings w;
  const auto m = compute_metrics(argmax_rows(s), s, truth, {"a", "b", "c"}, &w);
  EXPECT_EQ(m.macro_auc, 1.0);
  EXPECT_TRUE(std::isnan(m.per_class[2].auc));
  ASSERT_EQ(w.size(), 1u);
}

TEST(Auc, BinaryExample) {
  const std::vector<double> s{0.9, 0.8, 0.3};
  const std::vector<std::uint8_t> pos{1, 0, 1};
  EXPECT_EQ(rank_auc(s, pos), 0.5);
}

TEST(Auc, MatchesBruteForceWithTies) {
  Rng rng(123);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<double> s(n);
    std::vector<std::uint8_t> pos(n);
    const bool coarse = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = coarse ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform();
      pos[i] = rng.bernoulli(0.4) ? 1 : 0;
    }
    pos[0] = 1;
    pos[1] = 0;
    EXPECT_NEAR(rank_auc(s, pos), check::brute_auc(s, pos), 1e-12);
  }
}
