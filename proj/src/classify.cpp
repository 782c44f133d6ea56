#include "twkit/classify.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "twkit/rng.hpp"

namespace twkit {

double gini(std::span<const double> counts) {
  double n = 0.0;
  for (double c : counts) {
    if (c < 0.0) throw std::invalid_argument("gini: negative count");
    n += c;
  }
  if (!(n > 0.0)) throw std::invalid_argument("gini: all counts are zero");
  double s = 0.0;
  for (double c : counts) s += (c / n) * (c / n);
  return 1.0 - s;
}

namespace {

constexpr double kTieTolerance = 1e-12;

double gini_of(const std::vector<double>& counts, double n) {
  if (n <= 0.0) return 0.0;
  double s = 0.0;
  for (double c : counts) s += c * c;
  return 1.0 - s / (n * n);
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t k, const TreeConfig& cfg,
              std::uint64_t seed, std::size_t total)
      : x_(x), y_(y), k_(k), cfg_(cfg), rng_(seed), total_(static_cast<double>(total)) {}

  int build(std::vector<std::size_t>& idx, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::vector<double> counts(k_, 0.0);
    for (auto i : idx) counts[y_[i]] += 1.0;
    const double n = static_cast<double>(idx.size());
    const double impurity = gini_of(counts, n);
    nodes_[id].samples = idx.size();
    nodes_[id].counts = counts;

    const std::size_t min_leaf = std::max<std::size_t>(1, cfg_.min_samples_leaf);
    if (impurity <= 0.0 || (cfg_.max_depth != 0 && depth >= cfg_.max_depth) || idx.size() < 2 * min_leaf) {
      return id;
    }
    auto candidates = varying_features(idx);
    if (candidates.empty()) return id;
    if (cfg_.feature_subset_size != 0 && cfg_.feature_subset_size < candidates.size()) {
      rng_.shuffle(candidates);
      candidates.resize(cfg_.feature_subset_size);
      std::sort(candidates.begin(), candidates.end());
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_child = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order = idx;
    std::vector<double> left(k_);
    for (std::size_t f : candidates) {
      const auto col = static_cast<Eigen::Index>(f);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return x_(a, col) < x_(b, col); });
      std::fill(left.begin(), left.end(), 0.0);
      for (std::size_t p = 0; p + 1 < order.size(); ++p) {
        left[y_[order[p]]] += 1.0;
        const double lo = x_(order[p], col);
        const double hi = x_(order[p + 1], col);
        if (!(lo < hi)) continue;
        const std::size_t n_left = p + 1;
        const std::size_t n_right = order.size() - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;
        double sl = 0.0;
        double sr = 0.0;
        for (std::size_t c = 0; c < k_; ++c) {
          sl += left[c] * left[c];
          const double r = counts[c] - left[c];
          sr += r * r;
        }
        const double nl = static_cast<double>(n_left);
        const double nr = static_cast<double>(n_right);
        // n_l * gini_l + n_r * gini_r
        const double child = (nl - sl / nl) + (nr - sr / nr);
        if (child < best_child - kTieTolerance) {
          best_child = child;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (lo + hi);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> li;
    std::vector<std::size_t> ri;
    for (auto i : idx) (x_(i, best_feature) <= best_threshold ? li : ri).push_back(i);
    nodes_[id].feature = best_feature;
    nodes_[id].threshold = best_threshold;
    nodes_[id].impurity_decrease = std::max(0.0, (n * impurity - best_child) / total_);
    std::vector<std::size_t>().swap(idx);
    const int l = build(li, depth + 1);
    const int r = build(ri, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  std::vector<TreeNode> take() { return std::move(nodes_); }

 private:
  std::vector<std::size_t> varying_features(const std::vector<std::size_t>& idx) const {
    std::vector<std::size_t> out;
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      const double first = x_(idx.front(), f);
      for (auto i : idx) {
        if (x_(i, f) != first) {
          out.push_back(static_cast<std::size_t>(f));
          break;
        }
      }
    }
    return out;
  }

  const Eigen::MatrixXd& x_;
  std::span<const std::size_t> y_;
  std::size_t k_;
  TreeConfig cfg_;
  Rng rng_;
  double total_;
  std::vector<TreeNode> nodes_;
};

void check_training_data(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t n_classes) {
  if (x.rows() == 0) throw std::invalid_argument("classifier: no training rows");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw std::invalid_argument("classifier: x/y length mismatch");
  for (auto v : y) {
    if (v >= n_classes) throw std::invalid_argument("classifier: label out of range");
  }
}

Eigen::MatrixXd one_hot(std::span<const std::size_t> y, std::size_t k) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < y.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(y[i])) = 1.0;
  return m;
}

}  // namespace

DecisionTree DecisionTree::train(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t n_classes,
                                 const TreeConfig& config, std::uint64_t seed, std::span<const std::size_t> samples) {
  check_training_data(x, y, n_classes);
  std::vector<std::size_t> idx;
  if (samples.empty()) {
    idx.resize(y.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  } else {
    idx.assign(samples.begin(), samples.end());
  }
  TreeBuilder builder(x, y, n_classes, config, seed, idx.size());
  builder.build(idx, 0);
  DecisionTree t;
  t.nodes_ = builder.take();
  t.n_classes_ = n_classes;
  t.n_features_ = static_cast<std::size_t>(x.cols());
  return t;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

Eigen::VectorXd DecisionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  if (static_cast<std::size_t>(row.size()) != n_features_) throw std::invalid_argument("tree: row width mismatch");
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    i = static_cast<std::size_t>(row(nodes_[i].feature) <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right);
  }
  const auto& c = nodes_[i].counts;
  Eigen::VectorXd p(static_cast<Eigen::Index>(c.size()));
  const double n = static_cast<double>(nodes_[i].samples);
  for (std::size_t k = 0; k < c.size(); ++k) p(static_cast<Eigen::Index>(k)) = c[k] / n;
  return p;
}

Eigen::MatrixXd DecisionTree::predict_proba(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(n_classes_));
  for (Eigen::Index r = 0; r < x.rows(); ++r) out.row(r) = predict_row(x.row(r)).transpose();
  return out;
}

std::vector<double> DecisionTree::feature_importance() const {
  std::vector<double> imp(n_features_, 0.0);
  for (const auto& n : nodes_) {
    if (!n.is_leaf()) imp[static_cast<std::size_t>(n.feature)] += n.impurity_decrease;
  }
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : imp) v /= total;
  }
  return imp;
}

bool DecisionTree::operator==(const DecisionTree& o) const {
  if (nodes_.size() != o.nodes_.size() || n_classes_ != o.n_classes_) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& a = nodes_[i];
    const auto& b = o.nodes_[i];
    if (a.feature != b.feature || a.threshold != b.threshold || a.left != b.left || a.right != b.right ||
        a.samples != b.samples || a.counts != b.counts) {
      return false;
    }
  }
  return true;
}

std::uint64_t Forest::tree_seed(std::uint64_t seed, std::size_t index) {
  return derive_seed(seed, "tree/" + std::to_string(index));
}

Forest Forest::train(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t n_classes,
                     const ForestConfig& config, std::uint64_t seed) {
  check_training_data(x, y, n_classes);
  if (config.n_trees < 1) throw std::invalid_argument("forest: n_trees must be >= 1");
  const auto d = static_cast<std::size_t>(x.cols());
  Forest f;
  f.n_classes_ = n_classes;
  f.subset_ = config.tree.feature_subset_size != 0
                  ? config.tree.feature_subset_size
                  : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  if (f.subset_ > d) throw std::invalid_argument("forest: feature_subset_size exceeds feature count");
  TreeConfig tc = config.tree;
  tc.feature_subset_size = f.subset_;
  const std::size_t n = y.size();
  std::vector<std::size_t> sample(n);
  for (std::size_t t = 0; t < config.n_trees; ++t) {
    const auto ts = tree_seed(seed, t);
    if (config.bootstrap) {
      Rng rng(derive_seed(ts, "bootstrap"));
      for (auto& s : sample) s = rng.below(n);
      f.trees_.push_back(DecisionTree::train(x, y, n_classes, tc, ts, sample));
    } else {
      f.trees_.push_back(DecisionTree::train(x, y, n_classes, tc, ts));
    }
  }
  return f;
}

Eigen::MatrixXd Forest::predict_proba(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.rows(), static_cast<Eigen::Index>(n_classes_));
  for (const auto& t : trees_) p += t.predict_proba(x);
  return p / static_cast<double>(trees_.size());
}

std::vector<std::size_t> Forest::predict(const Eigen::MatrixXd& x) const { return argmax_rows(predict_proba(x)); }

std::vector<double> Forest::column_importance() const {
  std::vector<double> imp(trees_.empty() ? 0 : trees_.front().feature_count(), 0.0);
  for (const auto& t : trees_) {
    const auto ti = t.feature_importance();
    for (std::size_t i = 0; i < imp.size(); ++i) imp[i] += ti[i];
  }
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : imp) v /= total;
  }
  return imp;
}

std::vector<AttributeImportance> attribute_importance(std::span<const double> column_importance, const Codec& codec) {
  if (column_importance.size() != codec.width()) throw std::invalid_argument("importance: width does not match codec");
  std::vector<AttributeImportance> out;
  for (const auto& g : codec.groups()) {
    double w = 0.0;
    for (std::size_t k = 0; k < g.width; ++k) w += column_importance[g.offset + k];
    out.push_back({g.name, w});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
  return out;
}

std::vector<std::size_t> argmax_rows(const Eigen::MatrixXd& scores) {
  std::vector<std::size_t> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(r, c) > scores(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<std::size_t>(best);
  }
  return out;
}

void require_two_classes(std::span<const std::size_t> y, std::size_t n_classes) {
  for (auto v : y) {
    if (v >= n_classes) throw std::invalid_argument("classifier: label out of range");
    if (v != y.front()) return;
  }
  throw std::invalid_argument("classifier: training data holds a single class");
}

void LogisticRegression::fit(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t k) {
  check_training_data(x, y, k);
  require_two_classes(y, k);
  const auto kk = static_cast<Eigen::Index>(k);
  const Eigen::MatrixXd target = one_hot(y, k);
  const double n = static_cast<double>(x.rows());
  w_ = Eigen::MatrixXd::Zero(x.cols(), kk);
  b_ = Eigen::VectorXd::Zero(kk);
  for (std::size_t it = 0; it < config_.iterations; ++it) {
    Eigen::MatrixXd z = x * w_;
    z.rowwise() += b_.transpose();
    const Eigen::MatrixXd diff = softmax_rows(z) - target;
    w_ -= config_.learning_rate * ((x.transpose() * diff) / n + config_.l2 * w_);
    b_ -= config_.learning_rate * (diff.colwise().sum().transpose() / n);
  }
  if (!w_.allFinite() || !b_.allFinite()) throw TrainingFault("LR: non-finite parameters");
}

Eigen::MatrixXd LogisticRegression::predict_proba(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd z = x * w_;
  z.rowwise() += b_.transpose();
  return softmax_rows(z);
}

void TreeClassifier::fit(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t k) {
  tree_ = DecisionTree::train(x, y, k, config_, seed_);
}

void ForestClassifier::fit(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t k) {
  forest_ = Forest::train(x, y, k, config_, seed_);
}

void MlpClassifier::fit(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t k) {
  check_training_data(x, y, k);
  require_two_classes(y, k);
  config_.train.validate();
  net_ = Mlp({static_cast<std::size_t>(x.cols()), config_.hidden, k}, Activation::relu, Activation::identity,
             derive_seed(seed_, "init"));
  AdamConfig ac;
  ac.learning_rate = config_.train.learning_rate;
  AdamState state(net_, ac);
  Rng rng(derive_seed(seed_, "batches"));
  std::vector<std::size_t> labels;
  for (std::size_t epoch = 0; epoch < config_.train.epochs; ++epoch) {
    const auto batches = minibatches(y.size(), config_.train.batch_size, rng);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      labels.clear();
      for (auto i : batches[b]) labels.push_back(y[i]);
      ForwardCache cache;
      const auto loss = softmax_cross_entropy(net_.forward(gather_rows(x, batches[b]), cache), labels);
      require_finite(std::isfinite(loss.value), "MLP classifier", epoch, b);
      adam_step(net_, net_.backward(cache, loss.gradient), state);
    }
  }
}

Eigen::MatrixXd MlpClassifier::predict_proba(const Eigen::MatrixXd& x) const { return softmax_rows(net_.predict(x)); }

namespace {

// Platt scaling: fit P(y=1|f) = 1 / (1 + exp(a f + b)) by Newton's method
// with backtracking on the regularized targets.
std::pair<double, double> fit_platt(const Eigen::VectorXd& f, const std::vector<bool>& pos) {
  double n_pos = 0.0;
  for (bool p : pos) n_pos += p ? 1.0 : 0.0;
  const double n_neg = static_cast<double>(pos.size()) - n_pos;
  const double hi = (n_pos + 1.0) / (n_pos + 2.0);
  const double lo = 1.0 / (n_neg + 2.0);
  double a = 0.0;
  double b = std::log((n_neg + 1.0) / (n_pos + 1.0));
  auto objective = [&](double aa, double bb) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      const double t = pos[static_cast<std::size_t>(i)] ? hi : lo;
      const double z = f(i) * aa + bb;
      v += z >= 0 ? t * z + std::log1p(std::exp(-z)) : (t - 1.0) * z + std::log1p(std::exp(z));
    }
    return v;
  };
  double fval = objective(a, b);
  for (int it = 0; it < 100; ++it) {
    double h11 = 1e-12, h22 = 1e-12, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      const double t = pos[static_cast<std::size_t>(i)] ? hi : lo;
      const double z = f(i) * a + b;
      const double p = z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
      const double q = 1.0 - p;
      const double d2 = p * q;
      h11 += f(i) * f(i) * d2;
      h22 += d2;
      h21 += f(i) * d2;
      const double d1 = t - p;
      g1 += f(i) * d1;
      g2 += d1;
    }
    if (std::fabs(g1) < 1e-5 && std::fabs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    bool moved = false;
    while (step >= 1e-10) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        moved = true;
        break;
      }
      step /= 2.0;
    }
    if (!moved) break;
  }
  return {a, b};
}

}  // namespace

void LinearSvm::fit(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t k) {
  check_training_data(x, y, k);
  require_two_classes(y, k);
  const Eigen::Index d = x.cols();
  const auto kk = static_cast<Eigen::Index>(k);
  const std::size_t n = y.size();
  w_ = Eigen::MatrixXd::Zero(d, kk);
  b_ = Eigen::VectorXd::Zero(kk);
  platt_a_ = Eigen::VectorXd::Zero(kk);
  platt_b_ = Eigen::VectorXd::Zero(kk);
  const double radius = 1.0 / std::sqrt(config_.lambda);
  for (std::size_t c = 0; c < k; ++c) {
    Rng rng(derive_seed(seed_, "class/" + std::to_string(c)));
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);  // last entry is the bias weight
    Eigen::VectorXd xi(d + 1);
    double t = 0.0;
    for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
      for (auto i : shuffled_indices(n, rng)) {
        t += 1.0;
        const double eta = 1.0 / (config_.lambda * t);
        xi.head(d) = x.row(static_cast<Eigen::Index>(i)).transpose();
        xi(d) = 1.0;
        const double label = y[i] == c ? 1.0 : -1.0;
        const double margin = label * w.dot(xi);
        w *= 1.0 - eta * config_.lambda;
        if (margin < 1.0) w += eta * label * xi;
        const double norm = w.norm();
        if (norm > radius) w *= radius / norm;
      }
    }
    if (!w.allFinite()) throw TrainingFault("SVM: non-finite weights");
    w_.col(static_cast<Eigen::Index>(c)) = w.head(d);
    b_(static_cast<Eigen::Index>(c)) = w(d);
  }
  const Eigen::MatrixXd m = margins(x);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<bool> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = y[i] == c;
    const auto [a, b] = fit_platt(m.col(static_cast<Eigen::Index>(c)), pos);
    platt_a_(static_cast<Eigen::Index>(c)) = a;
    platt_b_(static_cast<Eigen::Index>(c)) = b;
  }
}

Eigen::MatrixXd LinearSvm::margins(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd m = x * w_;
  m.rowwise() += b_.transpose();
  return m;
}

Eigen::MatrixXd LinearSvm::predict_proba(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd m = margins(x);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    m.col(c) = (1.0 / (1.0 + (m.col(c).array() * platt_a_(c) + platt_b_(c)).exp())).matrix();
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double s = m.row(r).sum();
    if (s > 0.0) {
      m.row(r) /= s;
    } else {
      m.row(r).setConstant(1.0 / static_cast<double>(m.cols()));
    }
  }
  return m;
}

const std::vector<std::string>& benchmark_classifiers() {
  static const std::vector<std::string> names{"LR", "DT", "RF", "MLP", "SVM"};
  return names;
}

std::unique_ptr<Classifier> make_classifier(const std::string& name, std::uint64_t seed) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (n == "LR") return std::make_unique<LogisticRegression>();
  if (n == "DT") return std::make_unique<TreeClassifier>(seed);
  if (n == "RF") return std::make_unique<ForestClassifier>(seed);
  if (n == "MLP") return std::make_unique<MlpClassifier>(seed);
  if (n == "SVM") return std::make_unique<LinearSvm>(seed);
  throw std::invalid_argument("unknown classifier '" + name + "'");
}

double rank_auc(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw std::invalid_argument("rank_auc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t p = i; p <= j; ++p) {
      if (positive[order[p]]) {
        rank_sum += avg;
        n_pos += 1.0;
      }
    }
    i = j + 1;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

Metrics compute_metrics(std::span<const std::size_t> predicted, const Eigen::MatrixXd& scores,
                        std::span<const std::size_t> truth, const std::vector<std::string>& classes,
                        Warnings* warnings) {
  const std::size_t n = truth.size();
  const std::size_t k = classes.size();
  if (predicted.size() != n || static_cast<std::size_t>(scores.rows()) != n ||
      static_cast<std::size_t>(scores.cols()) != k) {
    throw std::invalid_argument("compute_metrics: length mismatch");
  }
  Metrics m;
  m.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (truth[i] >= k || predicted[i] >= k) throw std::invalid_argument("compute_metrics: class out of range");
    ++m.confusion[truth[i]][predicted[i]];
    if (truth[i] == predicted[i]) ++correct;
  }
  m.accuracy = n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
  double auc_sum = 0.0;
  double f1_sum = 0.0;
  std::size_t auc_count = 0;
  std::size_t f1_count = 0;
  std::vector<double> col(n);
  std::vector<std::uint8_t> pos(n);
  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics cm;
    cm.cls = classes[c];
    std::size_t predicted_c = 0;
    for (std::size_t t = 0; t < k; ++t) predicted_c += m.confusion[t][c];
    for (std::size_t p = 0; p < k; ++p) cm.support += m.confusion[c][p];
    const double tp = static_cast<double>(m.confusion[c][c]);
    cm.precision = predicted_c == 0 ? 0.0 : tp / static_cast<double>(predicted_c);
    cm.recall = cm.support == 0 ? 0.0 : tp / static_cast<double>(cm.support);
    cm.f1 = cm.precision + cm.recall == 0.0 ? 0.0 : 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      pos[i] = truth[i] == c;
    }
    cm.auc = rank_auc(col, pos);
    if (std::isnan(cm.auc)) {
      warn(warnings, "class " + classes[c] + (cm.support == 0 ? " is absent from" : " is the only class in") +
                         " the test set; excluded from macro AUC");
    } else {
      auc_sum += cm.auc;
      ++auc_count;
    }
    if (cm.support > 0 || predicted_c > 0) {
      f1_sum += cm.f1;
      ++f1_count;
    }
    m.per_class.push_back(cm);
  }
  m.macro_auc = auc_count == 0 ? std::numeric_limits<double>::quiet_NaN() : auc_sum / static_cast<double>(auc_count);
  m.macro_f1 = f1_count == 0 ? 0.0 : f1_sum / static_cast<double>(f1_count);
  return m;
}

nlohmann::json Metrics::to_json() const {
  nlohmann::json j;
  j["accuracy"] = accuracy;
  j["macro_f1"] = macro_f1;
  j["macro_auc"] = macro_auc;
  j["per_class"] = nlohmann::json::array();
  for (const auto& c : per_class) {
    j["per_class"].push_back({{"class", c.cls},
                              {"support", c.support},
                              {"precision", c.precision},
                              {"recall", c.recall},
                              {"f1", c.f1},
                              {"auc", std::isnan(c.auc) ? nlohmann::json(nullptr) : nlohmann::json(c.auc)}});
  }
  j["confusion"] = confusion;
  return j;
}

std::string format_metrics(const Metrics& m, const std::string& title) {
  std::ostringstream out;
  out << title << "\n";
  out << std::left << std::setw(8) << "class" << std::right << std::setw(9) << "support" << std::setw(8) << "Pre"
      << std::setw(8) << "Re" << std::setw(8) << "F1" << "\n";
  out << std::fixed << std::setprecision(2);
  for (const auto& c : m.per_class) {
    out << std::left << std::setw(8) << c.cls << std::right << std::setw(9) << c.support << std::setw(8)
        << c.precision << std::setw(8) << c.recall << std::setw(8) << c.f1 << "\n";
  }
  out << "accuracy " << m.accuracy << "  macro F1 " << m.macro_f1 << "  AUC " << m.macro_auc << "\n";
  return out.str();
}

}  // namespace twkit
