#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "twkit/codec.hpp"
#include "twkit/error.hpp"
#include "twkit/nn.hpp"

namespace twkit {

/// 1 - sum (c_i / n)^2. Throws std::invalid_argument on negative or all-zero counts.
double gini(std::span<const double> counts);

struct TreeConfig {
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t feature_subset_size = 0;  // 0 = all features
};

/// Flat-array tree node. Leaves have feature == -1. Samples with
/// x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double impurity_decrease = 0.0;  // weighted: n_t/N * (g_t - n_l/n_t g_l - n_r/n_t g_r)
  std::size_t samples = 0;
  std::vector<double> counts;

  bool is_leaf() const { return feature < 0; }
};

/// CART classification tree on a dense feature matrix, Gini criterion.
class DecisionTree {
 public:
  /// `samples` lists training rows (repeats allowed, as in a bootstrap
  /// draw); empty means every row once. Split ties go to the lowest feature
  /// index, then the lowest threshold.
  static DecisionTree train(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t n_classes,
                            const TreeConfig& config, std::uint64_t seed,
                            std::span<const std::size_t> samples = {});

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t class_count() const { return n_classes_; }
  std::size_t feature_count() const { return n_features_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  /// Leaf class frequencies for one row.
  Eigen::VectorXd predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const;

  /// Per-column impurity decrease normalized to sum 1 (all zero for a
  /// single-leaf tree).
  std::vector<double> feature_importance() const;

  bool operator==(const DecisionTree& other) const;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t n_classes_ = 0;
  std::size_t n_features_ = 0;
};

struct ForestConfig {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  TreeConfig tree;  // tree.feature_subset_size 0 = ceil(sqrt(d))
};

class Forest {
 public:
  static Forest train(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t n_classes,
                      const ForestConfig& config, std::uint64_t seed);
  static std::uint64_t tree_seed(std::uint64_t seed, std::size_t index);

  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::size_t feature_subset_size() const { return subset_; }
  std::size_t class_count() const { return n_classes_; }

  /// Mean of the trees' leaf distributions.
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const;
  std::vector<std::size_t> predict(const Eigen::MatrixXd& x) const;

  /// Mean of per-tree normalized impurity decrease, normalized to sum 1.
  std::vector<double> column_importance() const;

  bool operator==(const Forest& other) const { return trees_ == other.trees_ && subset_ == other.subset_; }

 private:
  std::vector<DecisionTree> trees_;
  std::size_t subset_ = 0;
  std::size_t n_classes_ = 0;
};

struct AttributeImportance {
  std::string attribute;
  double weight = 0.0;
};

/// Column importances summed back to their codec attribute, sorted by
/// descending weight (ties by schema order).
std::vector<AttributeImportance> attribute_importance(std::span<const double> column_importance, const Codec& codec);

/// Row-wise argmax, ties to the lowest index.
std::vector<std::size_t> argmax_rows(const Eigen::MatrixXd& scores);

/// Shared interface of the benchmark classifiers.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string name() const = 0;
  virtual void fit(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t n_classes) = 0;
  virtual Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const = 0;
  std::vector<std::size_t> predict(const Eigen::MatrixXd& x) const { return argmax_rows(predict_proba(x)); }
};

/// Multinomial softmax regression by full-batch gradient descent from zero.
class LogisticRegression : public Classifier {
 public:
  struct Config {
    std::size_t iterations = 500;
    double learning_rate = 0.5;
    double l2 = 1e-4;
  };
  LogisticRegression() = default;
  explicit LogisticRegression(Config c) : config_(c) {}
  std::string name() const override { return "LR"; }
  void fit(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t n_classes) override;
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const override;
  const Eigen::MatrixXd& weights() const { return w_; }
  const Eigen::VectorXd& bias() const { return b_; }

 private:
  Config config_;
  Eigen::MatrixXd w_;
  Eigen::VectorXd b_;
};

class TreeClassifier : public Classifier {
 public:
  explicit TreeClassifier(std::uint64_t seed, TreeConfig c = {}) : seed_(seed), config_(c) {}
  std::string name() const override { return "DT"; }
  void fit(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t n_classes) override;
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const override { return tree_.predict_proba(x); }
  const DecisionTree& tree() const { return tree_; }

 private:
  std::uint64_t seed_;
  TreeConfig config_;
  DecisionTree tree_;
};

class ForestClassifier : public Classifier {
 public:
  explicit ForestClassifier(std::uint64_t seed, ForestConfig c = {}) : seed_(seed), config_(c) {}
  std::string name() const override { return "RF"; }
  void fit(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t n_classes) override;
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const override { return forest_.predict_proba(x); }
  const Forest& forest() const { return forest_; }

 private:
  std::uint64_t seed_;
  ForestConfig config_;
  Forest forest_;
};

/// One hidden layer (relu) with a softmax head, trained with Adam.
class MlpClassifier : public Classifier {
 public:
  struct Config {
    std::size_t hidden = 64;
    TrainConfig train{200, 32, 1e-2, 0};
  };
  explicit MlpClassifier(std::uint64_t seed) : seed_(seed) {}
  MlpClassifier(std::uint64_t seed, Config c) : seed_(seed), config_(c) {}
  std::string name() const override { return "MLP"; }
  void fit(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t n_classes) override;
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const override;
  const Mlp& network() const { return net_; }

 private:
  std::uint64_t seed_;
  Config config_;
  Mlp net_;
};

/// One-vs-rest linear SVM trained by Pegasos stochastic subgradient descent
/// on the L2-regularized hinge loss. Probabilities come from a per-class
/// Platt sigmoid fitted on training margins, renormalized across classes.
class LinearSvm : public Classifier {
 public:
  struct Config {
    double lambda = 1e-3;
    std::size_t epochs = 40;
  };
  explicit LinearSvm(std::uint64_t seed) : seed_(seed) {}
  LinearSvm(std::uint64_t seed, Config c) : seed_(seed), config_(c) {}
  std::string name() const override { return "SVM"; }
  void fit(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t n_classes) override;
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const override;
  Eigen::MatrixXd margins(const Eigen::MatrixXd& x) const;

 private:
  std::uint64_t seed_;
  Config config_;
  Eigen::MatrixXd w_;  // d x k
  Eigen::VectorXd b_;
  Eigen::VectorXd platt_a_, platt_b_;
};

/// Benchmark classifier names, in report order.
const std::vector<std::string>& benchmark_classifiers();

/// "LR", "DT", "RF", "MLP" or "SVM" (case-insensitive).
std::unique_ptr<Classifier> make_classifier(const std::string& name, std::uint64_t seed);

/// Throws std::invalid_argument unless y holds at least two distinct classes.
void require_two_classes(std::span<const std::size_t> y, std::size_t n_classes);

struct ClassMetrics {
  std::string cls;
  std::size_t support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;  // NaN when the class has no positives or no negatives in truth
};

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double macro_auc = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]

  nlohmann::json to_json() const;
};

/// ROC AUC of `scores` for the positive set by the Mann-Whitney rank
/// statistic with averaged tied ranks. NaN without both classes.
double rank_auc(std::span<const double> scores, std::span<const std::uint8_t> positive);

/// Per-class one-vs-rest precision/recall/F1 (0 when undefined) and macro
/// AUC over the classes present in `truth`; absent classes are reported to
/// `warnings` and left out of the mean.
Metrics compute_metrics(std::span<const std::size_t> predicted, const Eigen::MatrixXd& scores,
                        std::span<const std::size_t> truth, const std::vector<std::string>& classes,
                        Warnings* warnings = nullptr);

/// Per-class precision/recall/F1/AUC as an aligned text block.
std::string format_metrics(const Metrics& m, const std::string& title);

}  // namespace twkit
