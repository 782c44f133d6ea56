#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "twkit/block.hpp"
#include "twkit/rng.hpp"

namespace twkit {

/// Layer activations. `block_softmax` is an output-only activation: an
/// independent softmax over each declared block, sigmoid on all columns not
/// covered by a block.
enum class Activation { identity, relu, tanh, sigmoid, block_softmax };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Parameter gradients of an Mlp, plus the gradient w.r.t. the batch input.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::MatrixXd input;

  Gradients& operator*=(double s);
  Gradients& operator+=(const Gradients& other);
  bool all_finite() const;
};

/// Activations recorded by forward() for use by backward().
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;   // input of each layer
  std::vector<Eigen::MatrixXd> outputs;  // post-activation output of each layer
};

/// Dense feed-forward network operating on row-major batches (n x d_in).
/// Layer l maps X -> act(X W_l + b_l) with W_l of shape in x out.
class Mlp {
 public:
  Mlp() = default;

  /// Xavier-uniform weights (|w| <= sqrt(6 / (fan_in + fan_out))) and zero
  /// biases, deterministic per seed.
  Mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output, std::uint64_t seed,
      std::vector<Block> output_blocks = {});

  std::size_t input_width() const { return sizes_.front(); }
  std::size_t output_width() const { return sizes_.back(); }
  std::size_t layer_count() const { return weights_.size(); }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  const std::vector<Block>& output_blocks() const { return blocks_; }

  const Eigen::MatrixXd& weights(std::size_t l) const { return weights_.at(l); }
  Eigen::MatrixXd& weights(std::size_t l) { return weights_.at(l); }
  const Eigen::VectorXd& biases(std::size_t l) const { return biases_.at(l); }
  Eigen::VectorXd& biases(std::size_t l) { return biases_.at(l); }

  Eigen::MatrixXd predict(const Eigen::MatrixXd& batch) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch, ForwardCache& cache) const;

  /// Exact reverse-mode gradients given dLoss/dOutput for the cached batch.
  Gradients backward(const ForwardCache& cache, const Eigen::MatrixXd& output_gradient) const;

  bool all_finite() const;
  std::size_t parameter_count() const;
  Gradients zero_gradients() const;

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

  bool operator==(const Mlp& other) const;

 private:
  void apply_activation(Activation a, Eigen::MatrixXd& z) const;
  void activation_backward(Activation a, const Eigen::MatrixXd& y, Eigen::MatrixXd& g) const;

  std::vector<std::size_t> sizes_;
  Activation hidden_ = Activation::relu;
  Activation output_ = Activation::identity;
  std::vector<Block> blocks_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment accumulators shaped like an Mlp's parameters.
class AdamState {
 public:
  AdamState(const Mlp& mlp, AdamConfig config);

  long step() const { return step_; }
  const AdamConfig& config() const { return config_; }

 private:
  friend void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state);
  AdamConfig config_;
  long step_ = 0;
  std::vector<Eigen::MatrixXd> m_w_, v_w_;
  std::vector<Eigen::VectorXd> m_b_, v_b_;
};

/// Bias-corrected Adam update. Throws TrainingFault on a non-finite gradient.
void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state);

/// Probabilities are clamped to [kProbabilityClamp, 1 - kProbabilityClamp]
/// before taking logs.
inline constexpr double kProbabilityClamp = 1e-7;

struct LossResult {
  double value = 0.0;
  Eigen::MatrixXd gradient;  // dLoss/dInput, same shape as the prediction
};

/// Mean binary cross-entropy over entries with nonzero weight (all entries
/// when `weights` is null). An all-zero weight matrix yields loss 0 and a
/// zero gradient.
LossResult binary_cross_entropy(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y,
                                const Eigen::MatrixXd* weights = nullptr);

/// Mean squared error over mask-1 entries (all entries when `mask` is null).
LossResult mse(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd* mask = nullptr);

/// Row-mean softmax cross-entropy of logits against integer labels; the
/// gradient is w.r.t. the logits.
LossResult softmax_cross_entropy(const Eigen::MatrixXd& logits, std::span<const std::size_t> labels);

/// Row-wise softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Seeded shuffle of 0..n-1 cut into batches; the remainder batch is kept.
std::vector<std::vector<std::size_t>> minibatches(std::size_t n, std::size_t batch_size, Rng& rng);

/// Rows of `m` selected by index.
Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows);

/// Throws TrainingFault naming the model, epoch and batch unless `ok`.
void require_finite(bool ok, const std::string& what, std::size_t epoch, std::size_t batch);

}  // namespace twkit
