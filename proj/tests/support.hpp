#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "twkit/nn.hpp"
#include "twkit/rng.hpp"

namespace twkit::check {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t parameters = 0;
};

// Relative error |a - n| / max(|a|, |n|, floor); the floor keeps entries
// whose true gradient is ~0 from dominating through roundoff.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), floor});
}

using LossFn = std::function<LossResult(const Eigen::MatrixXd&)>;

// Compares Mlp::backward against central differences on every weight, every
// bias and every input entry.
inline GradCheckResult grad_check(Mlp& mlp, const Eigen::MatrixXd& x, const LossFn& loss, double eps = 1e-5) {
  ForwardCache cache;
  const auto out = mlp.forward(x, cache);
  const auto g = mlp.backward(cache, loss(out).gradient);
  GradCheckResult r;
  auto probe = [&](double& slot, double analytic, const auto& evaluate) {
    const double saved = slot;
    slot = saved + eps;
    const double up = evaluate();
    slot = saved - eps;
    const double down = evaluate();
    slot = saved;
    r.max_relative_error = std::max(r.max_relative_error, relative_error(analytic, (up - down) / (2 * eps)));
    ++r.parameters;
  };
  auto eval_params = [&] { return loss(mlp.predict(x)).value; };
  for (std::size_t l = 0; l < mlp.layer_count(); ++l) {
    auto& w = mlp.weights(l);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) probe(w(i, j), g.weights[l](i, j), eval_params);
    }
    auto& b = mlp.biases(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) probe(b(i), g.biases[l](i), eval_params);
  }
  Eigen::MatrixXd xin = x;
  auto eval_input = [&] { return loss(mlp.predict(xin)).value; };
  for (Eigen::Index i = 0; i < xin.rows(); ++i) {
    for (Eigen::Index j = 0; j < xin.cols(); ++j) probe(xin(i, j), g.input(i, j), eval_input);
  }
  return r;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = -1.0,
                                     double hi = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

struct GradCheckCase {
  std::string description;
  double max_relative_error = 0.0;
};

// The randomized configurations shared by the unit and acceptance suites:
// shapes, activations and losses vary with the case index.
inline GradCheckCase random_grad_check_case(std::size_t index, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "gradcheck/" + std::to_string(index)));
  const std::size_t depth = 2 + rng.below(3);
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < depth; ++i) sizes.push_back(2 + rng.below(6));
  const Activation hidden[] = {Activation::relu, Activation::tanh, Activation::sigmoid};
  const Activation h = hidden[index % 3];
  const std::size_t kind = index % 4;
  Activation out = Activation::identity;
  std::vector<Block> blocks;
  if (kind == 1) out = Activation::sigmoid;
  if (kind == 2) {
    out = Activation::block_softmax;
    if (sizes.back() < 3) sizes.back() = 3;
    blocks.push_back({0, 2});
    if (sizes.back() >= 5) blocks.push_back({2, sizes.back() - 3});
  }
  Mlp mlp(sizes, h, out, rng.bits(), blocks);
  for (std::size_t l = 0; l < mlp.layer_count(); ++l) {
    mlp.biases(l) = random_matrix(mlp.biases(l).size(), 1, rng, -0.5, 0.5);
  }
  const auto n = static_cast<Eigen::Index>(3 + rng.below(5));
  const Eigen::MatrixXd x = random_matrix(n, static_cast<Eigen::Index>(sizes.front()), rng);
  const auto width = static_cast<Eigen::Index>(sizes.back());
  LossFn loss;
  std::string loss_name;
  if (kind == 0) {
    const Eigen::MatrixXd y = random_matrix(n, width, rng);
    Eigen::MatrixXd mask = random_matrix(n, width, rng, 0.0, 1.0).unaryExpr([](double v) { return v < 0.7 ? 1.0 : 0.0; });
    loss = [y, mask](const Eigen::MatrixXd& p) { return mse(p, y, &mask); };
    loss_name = "masked mse";
  } else if (kind == 1 || kind == 2) {
    const Eigen::MatrixXd y = random_matrix(n, width, rng, 0.0, 1.0).unaryExpr([](double v) { return v < 0.5 ? 1.0 : 0.0; });
    loss = [y](const Eigen::MatrixXd& p) { return binary_cross_entropy(p, y); };
    loss_name = "bce";
  } else {
    std::vector<std::size_t> labels;
    for (Eigen::Index i = 0; i < n; ++i) labels.push_back(rng.below(sizes.back()));
    loss = [labels](const Eigen::MatrixXd& p) { return softmax_cross_entropy(p, labels); };
    loss_name = "softmax ce";
  }
  const auto r = grad_check(mlp, x, loss);
  std::string shape;
  for (std::size_t s : sizes) shape += (shape.empty() ? "" : "x") + std::to_string(s);
  return {shape + " " + to_string(h) + "/" + to_string(out) + " " + loss_name, r.max_relative_error};
}

// Pairwise ROC AUC: the share of (positive, negative) pairs ranked correctly,
// ties counting one half.
inline double brute_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& pos) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!pos[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (pos[j]) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

// Chi-square by expanding the grid into single observations and counting
// marginals from them. Empty rows and columns contribute nothing.
inline double brute_chi_square(const std::vector<std::vector<double>>& grid) {
  std::vector<std::pair<std::size_t, std::size_t>> obs;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid[i].size(); ++j) {
      for (int k = 0; k < static_cast<int>(grid[i][j]); ++k) obs.emplace_back(i, j);
    }
  }
  const double n = static_cast<double>(obs.size());
  double chi2 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid[i].size(); ++j) {
      double in_row = 0.0, in_col = 0.0, both = 0.0;
      for (const auto& [a, b] : obs) {
        in_row += a == i ? 1.0 : 0.0;
        in_col += b == j ? 1.0 : 0.0;
        both += a == i && b == j ? 1.0 : 0.0;
      }
      if (in_row == 0.0 || in_col == 0.0) continue;
      const double expected = in_row * in_col / n;
      chi2 += (both - expected) * (both - expected) / expected;
    }
  }
  return chi2;
}

// Random integer count grid of the given shape with entries in [0, max].
inline std::vector<std::vector<double>> random_grid(std::size_t r, std::size_t c, Rng& rng, std::size_t max = 12) {
  std::vector<std::vector<double>> g(r, std::vector<double>(c));
  for (auto& row : g) {
    for (auto& v : row) v = static_cast<double>(rng.below(max + 1));
  }
  return g;
}

}  // namespace twkit::check
