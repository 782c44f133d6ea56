#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "twkit/error.hpp"
#include "twkit/nn.hpp"

using namespace twkit;

TEST(Mlp, ShapesChain) {
  Mlp m({4, 8, 1}, Activation::relu, Activation::sigmoid, 3);
  ASSERT_EQ(m.layer_count(), 2u);
  EXPECT_EQ(m.weights(0).rows(), 4);
  EXPECT_EQ(m.weights(0).cols(), 8);
  EXPECT_EQ(m.weights(1).rows(), 8);
  EXPECT_EQ(m.weights(1).cols(), 1);
  EXPECT_EQ(m.biases(0).size(), 8);
  EXPECT_EQ(m.biases(1).size(), 1);
  EXPECT_EQ(m.parameter_count(), 4u * 8 + 8 + 8 + 1);
}

TEST(Mlp, InitIsDeterministicAndXavierBounded) {
  Mlp a({6, 10, 3}, Activation::tanh, Activation::identity, 11);
  Mlp b({6, 10, 3}, Activation::tanh, Activation::identity, 11);
  Mlp c({6, 10, 3}, Activation::tanh, Activation::identity, 12);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  for (std::size_t l = 0; l < a.layer_count(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(a.weights(l).rows() + a.weights(l).cols()));
    EXPECT_LE(a.weights(l).cwiseAbs().maxCoeff(), bound);
    EXPECT_EQ(a.biases(l).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Mlp, RejectsBadSizes) {
  EXPECT_THROW(Mlp({4}, Activation::relu, Activation::identity, 0), std::invalid_argument);
  EXPECT_THROW(Mlp({4, 0, 1}, Activation::relu, Activation::identity, 0), std::invalid_argument);
  EXPECT_THROW(Mlp({}, Activation::relu, Activation::identity, 0), std::invalid_argument);
}

TEST(Mlp, ZeroWeightsSigmoidGivesHalf) {
  Mlp m({3, 4, 2}, Activation::relu, Activation::sigmoid, 1);
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    m.weights(l).setZero();
    m.biases(l).setZero();
  }
  const auto y = m.predict(Eigen::MatrixXd::Random(5, 3));
  for (Eigen::Index i = 0; i < y.size(); ++i) EXPECT_EQ(y(i), 0.5);
}

TEST(Mlp, IdentityLayerPassesInputThrough) {
  Mlp m({3, 3}, Activation::relu, Activation::identity, 1);
  m.weights(0).setIdentity();
  Eigen::MatrixXd x(2, 3);
  x << 1, -2, 3, 0.5, 0, -7;
  EXPECT_EQ(m.predict(x), x);
}

TEST(Mlp, BlockSoftmaxUniformLogits) {
  Mlp m({2, 4}, Activation::relu, Activation::block_softmax, 1, {{0, 3}});
  m.weights(0).setZero();
  const auto y = m.predict(Eigen::MatrixXd::Ones(1, 2));
  EXPECT_NEAR(y(0, 0), 1.0 / 3, 1e-15);
  EXPECT_NEAR(y(0, 1), 1.0 / 3, 1e-15);
  EXPECT_NEAR(y(0, 2), 1.0 / 3, 1e-15);
  EXPECT_EQ(y(0, 3), 0.5);  // column outside any block is sigmoid
}

TEST(Mlp, ForwardRejectsWidthMismatch) {
  Mlp m({3, 2}, Activation::relu, Activation::identity, 1);
  EXPECT_THROW(m.predict(Eigen::MatrixXd::Zero(1, 4)), std::invalid_argument);
}

TEST(Backward, MatchesFiniteDifferences575) {
  Rng rng(5);
  Mlp m({5, 7, 3}, Activation::tanh, Activation::identity, 9);
  const Eigen::MatrixXd x = check::random_matrix(6, 5, rng);
  const Eigen::MatrixXd y = check::random_matrix(6, 3, rng);
  const auto r = check::grad_check(m, x, [&](const Eigen::MatrixXd& p) { return mse(p, y); });
  EXPECT_LT(r.max_relative_error, 1e-4);
  EXPECT_EQ(r.parameters, m.parameter_count() + 30u);
}

TEST(Backward, RandomConfigurations) {
  for (std::size_t i = 0; i < 24; ++i) {
    const auto c = check::random_grad_check_case(i, 2024);
    EXPECT_LT(c.max_relative_error, 1e-4) << c.description;
  }
}

TEST(Backward, ZeroOutputGradientGivesZeroGradients) {
  Mlp m({4, 6, 2}, Activation::relu, Activation::sigmoid, 2);
  ForwardCache cache;
  const auto out = m.forward(Eigen::MatrixXd::Random(3, 4), cache);
  const auto g = m.backward(cache, Eigen::MatrixXd::Zero(out.rows(), out.cols()));
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    EXPECT_EQ(g.weights[l].cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(g.biases[l].cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Backward, ScalesLinearlyWithLoss) {
  Mlp m({4, 6, 2}, Activation::tanh, Activation::sigmoid, 2);
  ForwardCache cache;
  const auto out = m.forward(Eigen::MatrixXd::Random(3, 4), cache);
  const Eigen::MatrixXd y = Eigen::MatrixXd::Ones(3, 2) * 0.3;
  const auto loss = mse(out, y);
  const auto g1 = m.backward(cache, loss.gradient);
  const auto g2 = m.backward(cache, 2.0 * loss.gradient);
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    EXPECT_EQ(g2.weights[l], 2.0 * g1.weights[l]);
    EXPECT_EQ(g2.biases[l], 2.0 * g1.biases[l]);
  }
}

TEST(Backward, RejectsCacheShapeMismatch) {
  Mlp m({4, 2}, Activation::relu, Activation::identity, 2);
  ForwardCache cache;
  m.forward(Eigen::MatrixXd::Zero(3, 4), cache);
  EXPECT_THROW(m.backward(cache, Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);
}

TEST(Adam, ConstantGradientDescends) {
  Mlp m({1, 1}, Activation::relu, Activation::identity, 1);
  m.weights(0)(0, 0) = 0.0;
  AdamState s(m, {});
  auto g = m.zero_gradients();
  g.weights[0](0, 0) = 0.7;
  for (int i = 0; i < 50; ++i) adam_step(m, g, s);
  EXPECT_LT(m.weights(0)(0, 0), 0.0);
  EXPECT_EQ(s.step(), 50);
}

TEST(Adam, ZeroGradientOnlyAdvancesStep) {
  Mlp m({3, 2}, Activation::relu, Activation::identity, 1);
  const Mlp before = m;
  AdamState s(m, {});
  adam_step(m, m.zero_gradients(), s);
  EXPECT_TRUE(m == before);
  EXPECT_EQ(s.step(), 1);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // m1 = (1-b1) g, v1 = (1-b2) g^2; after bias correction the step is
  // lr * g / (|g| + eps), i.e. lr * sign(g) up to eps/|g|.
  Mlp m({2, 2}, Activation::relu, Activation::identity, 1);
  const Mlp before = m;
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  AdamState s(m, cfg);
  auto g = m.zero_gradients();
  g.weights[0] << 0.3, -2.0, 1e-3, 5.0;
  adam_step(m, g, s);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const double gi = g.weights[0](i);
    const double expected = -cfg.learning_rate * gi / (std::fabs(gi) + cfg.epsilon);
    EXPECT_NEAR(m.weights(0)(i) - before.weights(0)(i), expected, 1e-12);
  }
}

TEST(Adam, NonFiniteGradientIsATrainingFault) {
  Mlp m({2, 2}, Activation::relu, Activation::identity, 1);
  AdamState s(m, {});
  auto g = m.zero_gradients();
  g.biases[0](1) = std::nan("");
  EXPECT_THROW(adam_step(m, g, s), TrainingFault);
}

TEST(Loss, BceClosedForm) {
  const auto r = binary_cross_entropy(Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::MatrixXd::Ones(1, 1));
  EXPECT_NEAR(r.value, std::log(2.0), 1e-12);
}

TEST(Loss, BceClampsProbabilities) {
  const auto r = binary_cross_entropy(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1));
  EXPECT_NEAR(r.value, -std::log(kProbabilityClamp), 1e-9);
  EXPECT_TRUE(std::isfinite(r.gradient(0, 0)));
}

TEST(Loss, BceWithEmptyWeightMaskIsZero) {
  const Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 3);
  const auto r = binary_cross_entropy(Eigen::MatrixXd::Constant(2, 3, 0.2), Eigen::MatrixXd::Ones(2, 3), &w);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.gradient.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Loss, MseSelfIsZero) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 4);
  const Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(3, 4);
  EXPECT_EQ(mse(x, x, &mask).value, 0.0);
}

TEST(Loss, MaskedMseCountsOnlyMaskedEntries) {
  Eigen::MatrixXd x(1, 2), y(1, 2), mask(1, 2);
  x << 1, 0;
  y << 0, 0;
  mask << 0, 1;
  EXPECT_EQ(mse(x, y, &mask).value, 0.0);
}

TEST(Loss, ShapeMismatchThrows) {
  EXPECT_THROW(mse(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
  EXPECT_THROW(binary_cross_entropy(Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Zero(2, 2)),
               std::invalid_argument);
  const std::vector<std::size_t> labels{0};
  EXPECT_THROW(softmax_cross_entropy(Eigen::MatrixXd::Zero(2, 2), labels), std::invalid_argument);
}

TEST(Loss, SoftmaxCrossEntropyUniform) {
  const std::vector<std::size_t> labels{2, 0};
  const auto r = softmax_cross_entropy(Eigen::MatrixXd::Zero(2, 4), labels);
  EXPECT_NEAR(r.value, std::log(4.0), 1e-12);
  EXPECT_NEAR(r.gradient(0, 2), (0.25 - 1.0) / 2, 1e-15);
}

TEST(Training, MinibatchesKeepRemainder) {
  Rng rng(4);
  const auto batches = minibatches(10, 4, rng);
  ASSERT_EQ(batches.size(), 3u);
  EXPECT_EQ(batches[2].size(), 2u);
  std::vector<int> seen(10, 0);
  for (const auto& b : batches) {
    for (auto i : b) ++seen[i];
  }
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(Training, ConfigValidation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.epochs = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.learning_rate = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

namespace {

Mlp fit_xor(std::uint64_t seed) {
  Eigen::MatrixXd x(4, 2), y(4, 1);
  x << 0, 0, 0, 1, 1, 0, 1, 1;
  y << 0, 1, 1, 0;
  Mlp m({2, 8, 1}, Activation::tanh, Activation::sigmoid, seed);
  AdamConfig cfg;
  cfg.learning_rate = 0.05;
  AdamState s(m, cfg);
  Rng rng(seed);
  for (int epoch = 0; epoch < 400; ++epoch) {
    for (const auto& batch : minibatches(4, 3, rng)) {
      ForwardCache cache;
      const Eigen::MatrixXd xb = gather_rows(x, batch);
      const Eigen::MatrixXd yb = gather_rows(y, batch);
      const auto loss = binary_cross_entropy(m.forward(xb, cache), yb);
      adam_step(m, m.backward(cache, loss.gradient), s);
    }
  }
  return m;
}

}  // namespace

TEST(Training, LearnsXorDeterministically) {
  const Mlp a = fit_xor(8);
  const Mlp b = fit_xor(8);
  EXPECT_TRUE(a == b);
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 0, 1, 1, 0, 1, 1;
  const auto p = a.predict(x);
  EXPECT_LT(p(0), 0.5);
  EXPECT_GT(p(1), 0.5);
  EXPECT_GT(p(2), 0.5);
  EXPECT_LT(p(3), 0.5);
}

TEST(Checkpoint, JsonRoundTrip) {
  Mlp m({5, 4, 6}, Activation::relu, Activation::block_softmax, 17, {{0, 3}, {3, 2}});
  m.biases(0)(1) = 0.1 + 0.2;
  const auto back = Mlp::from_json(nlohmann::json::parse(m.to_json().dump()));
  EXPECT_TRUE(back == m);
}

TEST(Checkpoint, RejectsWrongShape) {
  Mlp m({2, 2}, Activation::relu, Activation::identity, 1);
  auto j = m.to_json();
  j["weights"][0].push_back(1.0);
  EXPECT_THROW(Mlp::from_json(j), DataError);
  j = m.to_json();
  j["version"] = 2;
  EXPECT_THROW(Mlp::from_json(j), DataError);
}
