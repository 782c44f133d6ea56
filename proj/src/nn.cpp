#include "twkit/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "twkit/error.hpp"

namespace twkit {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::block_softmax: return "block_softmax";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "block_softmax") return Activation::block_softmax;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

Gradients& Gradients::operator*=(double s) {
  for (auto& w : weights) w *= s;
  for (auto& b : biases) b *= s;
  input *= s;
  return *this;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    biases[l] += other.biases[l];
  }
  return *this;
}

bool Gradients::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output, std::uint64_t seed,
         std::vector<Block> output_blocks)
    : sizes_(std::move(layer_sizes)), hidden_(hidden), output_(output), blocks_(std::move(output_blocks)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least two layer sizes");
  for (std::size_t s : sizes_) {
    if (s == 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
  }
  if (hidden_ == Activation::block_softmax) {
    throw std::invalid_argument("Mlp: block_softmax is an output activation");
  }
  for (const auto& b : blocks_) {
    if (b.width == 0 || b.offset + b.width > sizes_.back()) {
      throw std::invalid_argument("Mlp: output block outside the output layer");
    }
  }
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(sizes_[l]);
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    Eigen::MatrixXd w(in, out);
    for (Eigen::Index i = 0; i < in; ++i) {
      for (Eigen::Index j = 0; j < out; ++j) w(i, j) = rng.uniform(-bound, bound);
    }
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(out));
  }
}

void Mlp::apply_activation(Activation a, Eigen::MatrixXd& z) const {
  switch (a) {
    case Activation::identity: return;
    case Activation::relu: z = z.cwiseMax(0.0); return;
    case Activation::tanh: z = z.array().tanh().matrix(); return;
    case Activation::sigmoid: z = (1.0 / (1.0 + (-z.array()).exp())).matrix(); return;
    case Activation::block_softmax: {
      std::vector<bool> in_block(static_cast<std::size_t>(z.cols()), false);
      for (const auto& b : blocks_) {
        const auto off = static_cast<Eigen::Index>(b.offset);
        const auto w = static_cast<Eigen::Index>(b.width);
        auto blk = z.middleCols(off, w);
        Eigen::VectorXd mx = blk.rowwise().maxCoeff();
        Eigen::MatrixXd e = (blk.colwise() - mx).array().exp().matrix();
        Eigen::VectorXd sum = e.rowwise().sum();
        blk = (e.array().colwise() / sum.array()).matrix();
        for (std::size_t k = b.offset; k < b.offset + b.width; ++k) in_block[k] = true;
      }
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        if (!in_block[static_cast<std::size_t>(c)]) {
          z.col(c) = (1.0 / (1.0 + (-z.col(c).array()).exp())).matrix();
        }
      }
      return;
    }
  }
}

void Mlp::activation_backward(Activation a, const Eigen::MatrixXd& y, Eigen::MatrixXd& g) const {
  switch (a) {
    case Activation::identity: return;
    case Activation::relu: g = (y.array() > 0.0).select(g, 0.0); return;
    case Activation::tanh: g = (g.array() * (1.0 - y.array().square())).matrix(); return;
    case Activation::sigmoid: g = (g.array() * y.array() * (1.0 - y.array())).matrix(); return;
    case Activation::block_softmax: {
      std::vector<bool> in_block(static_cast<std::size_t>(y.cols()), false);
      for (const auto& b : blocks_) {
        const auto off = static_cast<Eigen::Index>(b.offset);
        const auto w = static_cast<Eigen::Index>(b.width);
        const auto s = y.middleCols(off, w);
        auto gb = g.middleCols(off, w);
        Eigen::VectorXd dot = (gb.array() * s.array()).rowwise().sum();
        gb = (s.array() * (gb.colwise() - dot).array()).matrix();
        for (std::size_t k = b.offset; k < b.offset + b.width; ++k) in_block[k] = true;
      }
      for (Eigen::Index c = 0; c < y.cols(); ++c) {
        if (!in_block[static_cast<std::size_t>(c)]) {
          g.col(c) = (g.col(c).array() * y.col(c).array() * (1.0 - y.col(c).array())).matrix();
        }
      }
      return;
    }
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& batch, ForwardCache& cache) const {
  if (static_cast<std::size_t>(batch.cols()) != input_width()) {
    throw std::invalid_argument("Mlp::forward: batch width " + std::to_string(batch.cols()) +
                                " != input width " + std::to_string(input_width()));
  }
  cache.inputs.clear();
  cache.outputs.clear();
  Eigen::MatrixXd x = batch;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    cache.inputs.push_back(x);
    Eigen::MatrixXd z = x * weights_[l];
    z.rowwise() += biases_[l].transpose();
    apply_activation(l + 1 == weights_.size() ? output_ : hidden_, z);
    cache.outputs.push_back(z);
    x = std::move(z);
  }
  return x;
}

Eigen::MatrixXd Mlp::predict(const Eigen::MatrixXd& batch) const {
  ForwardCache cache;
  return forward(batch, cache);
}

Gradients Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& output_gradient) const {
  const std::size_t L = weights_.size();
  if (cache.outputs.size() != L) throw std::invalid_argument("Mlp::backward: cache from another network");
  if (output_gradient.rows() != cache.outputs.back().rows() ||
      output_gradient.cols() != cache.outputs.back().cols()) {
    throw std::invalid_argument("Mlp::backward: output gradient shape mismatch");
  }
  Gradients g;
  g.weights.resize(L);
  g.biases.resize(L);
  Eigen::MatrixXd delta = output_gradient;
  for (std::size_t l = L; l-- > 0;) {
    activation_backward(l + 1 == L ? output_ : hidden_, cache.outputs[l], delta);
    g.weights[l] = cache.inputs[l].transpose() * delta;
    g.biases[l] = delta.colwise().sum().transpose();
    delta = delta * weights_[l].transpose();
  }
  g.input = std::move(delta);
  return g;
}

bool Mlp::all_finite() const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  }
  return true;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(weights_[l].rows(), weights_[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(biases_[l].size()));
  }
  return g;
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json j;
  j["format"] = "twkit-mlp";
  j["version"] = 1;
  j["layer_sizes"] = sizes_;
  j["hidden_activation"] = to_string(hidden_);
  j["output_activation"] = to_string(output_);
  j["output_blocks"] = nlohmann::json::array();
  for (const auto& b : blocks_) j["output_blocks"].push_back({b.offset, b.width});
  j["weights"] = nlohmann::json::array();
  j["biases"] = nlohmann::json::array();
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(weights_[l].size()));
    for (Eigen::Index i = 0; i < weights_[l].rows(); ++i) {
      for (Eigen::Index k = 0; k < weights_[l].cols(); ++k) flat.push_back(weights_[l](i, k));
    }
    j["weights"].push_back(flat);
    j["biases"].push_back(std::vector<double>(biases_[l].data(), biases_[l].data() + biases_[l].size()));
  }
  return j;
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "twkit-mlp" || j.value("version", 0) != 1) {
    throw DataError("checkpoint: not a version-1 twkit-mlp document");
  }
  Mlp m;
  m.sizes_ = j.at("layer_sizes").get<std::vector<std::size_t>>();
  m.hidden_ = activation_from_string(j.at("hidden_activation").get<std::string>());
  m.output_ = activation_from_string(j.at("output_activation").get<std::string>());
  for (const auto& b : j.at("output_blocks")) m.blocks_.push_back(Block{b.at(0).get<std::size_t>(), b.at(1).get<std::size_t>()});
  const auto& ws = j.at("weights");
  const auto& bs = j.at("biases");
  if (m.sizes_.size() < 2 || ws.size() + 1 != m.sizes_.size() || bs.size() != ws.size()) {
    throw DataError("checkpoint: layer count mismatch");
  }
  for (std::size_t l = 0; l + 1 < m.sizes_.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(m.sizes_[l]);
    const auto out = static_cast<Eigen::Index>(m.sizes_[l + 1]);
    const auto flat = ws[l].get<std::vector<double>>();
    const auto bias = bs[l].get<std::vector<double>>();
    if (flat.size() != static_cast<std::size_t>(in * out) || bias.size() != static_cast<std::size_t>(out)) {
      throw DataError("checkpoint: parameter shape mismatch in layer " + std::to_string(l));
    }
    Eigen::MatrixXd w(in, out);
    for (Eigen::Index i = 0; i < in; ++i) {
      for (Eigen::Index k = 0; k < out; ++k) w(i, k) = flat[static_cast<std::size_t>(i * out + k)];
    }
    m.weights_.push_back(std::move(w));
    m.biases_.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), out));
  }
  return m;
}

bool Mlp::operator==(const Mlp& other) const {
  if (sizes_ != other.sizes_ || hidden_ != other.hidden_ || output_ != other.output_ ||
      !(blocks_ == other.blocks_)) {
    return false;
  }
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) return false;
  }
  return true;
}

AdamState::AdamState(const Mlp& mlp, AdamConfig config) : config_(config) {
  if (!(config_.learning_rate > 0.0)) throw std::invalid_argument("Adam: learning rate must be > 0");
  for (std::size_t l = 0; l < mlp.layer_count(); ++l) {
    m_w_.push_back(Eigen::MatrixXd::Zero(mlp.weights(l).rows(), mlp.weights(l).cols()));
    v_w_.push_back(m_w_.back());
    m_b_.push_back(Eigen::VectorXd::Zero(mlp.biases(l).size()));
    v_b_.push_back(m_b_.back());
  }
}

void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state) {
  if (grads.weights.size() != mlp.layer_count() || state.m_w_.size() != mlp.layer_count()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  if (!grads.all_finite()) throw TrainingFault("adam_step: non-finite gradient");
  const auto& c = state.config_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t l = 0; l < mlp.layer_count(); ++l) {
    state.m_w_[l] = c.beta1 * state.m_w_[l] + (1.0 - c.beta1) * grads.weights[l];
    state.v_w_[l] = c.beta2 * state.v_w_[l] + (1.0 - c.beta2) * grads.weights[l].cwiseAbs2();
    state.m_b_[l] = c.beta1 * state.m_b_[l] + (1.0 - c.beta1) * grads.biases[l];
    state.v_b_[l] = c.beta2 * state.v_b_[l] + (1.0 - c.beta2) * grads.biases[l].cwiseAbs2();
    mlp.weights(l).array() -= c.learning_rate * (state.m_w_[l].array() / correction1) /
                              ((state.v_w_[l].array() / correction2).sqrt() + c.epsilon);
    mlp.biases(l).array() -= c.learning_rate * (state.m_b_[l].array() / correction1) /
                             ((state.v_b_[l].array() / correction2).sqrt() + c.epsilon);
  }
}

namespace {

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

LossResult binary_cross_entropy(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y,
                                const Eigen::MatrixXd* weights) {
  require_same_shape(p, y, "binary_cross_entropy");
  if (weights != nullptr) require_same_shape(p, *weights, "binary_cross_entropy");
  LossResult r{0.0, Eigen::MatrixXd::Zero(p.rows(), p.cols())};
  const double count = weights == nullptr ? static_cast<double>(p.size()) : weights->sum();
  if (!(count > 0.0)) return r;
  double total = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double w = weights == nullptr ? 1.0 : (*weights)(i, j);
      if (w == 0.0) continue;
      const double q = std::clamp(p(i, j), kProbabilityClamp, 1.0 - kProbabilityClamp);
      const double t = y(i, j);
      total += -w * (t * std::log(q) + (1.0 - t) * std::log(1.0 - q));
      r.gradient(i, j) = w * (q - t) / (q * (1.0 - q)) / count;
    }
  }
  r.value = total / count;
  return r;
}

LossResult mse(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd* mask) {
  require_same_shape(x, y, "mse");
  if (mask != nullptr) require_same_shape(x, *mask, "mse");
  LossResult r{0.0, Eigen::MatrixXd::Zero(x.rows(), x.cols())};
  const double count = mask == nullptr ? static_cast<double>(x.size()) : mask->sum();
  if (!(count > 0.0)) return r;
  Eigen::MatrixXd diff = x - y;
  if (mask != nullptr) diff = diff.cwiseProduct(*mask);
  r.value = diff.squaredNorm() / count;
  r.gradient = 2.0 * diff / count;
  return r;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::VectorXd mx = logits.rowwise().maxCoeff();
  Eigen::MatrixXd e = (logits.colwise() - mx).array().exp().matrix();
  Eigen::VectorXd sum = e.rowwise().sum();
  return (e.array().colwise() / sum.array()).matrix();
}

LossResult softmax_cross_entropy(const Eigen::MatrixXd& logits, std::span<const std::size_t> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw std::invalid_argument("softmax_cross_entropy: shape mismatch");
  }
  LossResult r{0.0, softmax_rows(logits)};
  const auto n = static_cast<double>(labels.size());
  if (labels.empty()) return r;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const auto col = static_cast<Eigen::Index>(labels[i]);
    if (col >= logits.cols()) throw std::invalid_argument("softmax_cross_entropy: label out of range");
    r.value -= std::log(std::max(r.gradient(row, col), kProbabilityClamp));
    r.gradient(row, col) -= 1.0;
  }
  r.value /= n;
  r.gradient /= n;
  return r;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
}

std::vector<std::vector<std::size_t>> minibatches(std::size_t n, std::size_t batch_size, Rng& rng) {
  const auto order = shuffled_indices(n, rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

void require_finite(bool ok, const std::string& what, std::size_t epoch, std::size_t batch) {
  if (!ok) {
    throw TrainingFault(what + ": non-finite value at epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(batch));
  }
}

}  // namespace twkit
