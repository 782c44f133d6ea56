#include "twkit/impute.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "twkit/classify.hpp"
#include "twkit/missing.hpp"
#include "twkit/rng.hpp"
#include "twkit/split.hpp"

namespace twkit {

Table impute_sta(const Table& table) {
  const auto& schema = table.schema();
  std::vector<Cell> fill(table.width());
  for (std::size_t c = 0; c < table.width(); ++c) {
    if (table.missing_count(c) == 0) continue;
    const auto& attr = schema.at(c);
    if (table.missing_count(c) == table.size()) {
      throw DataError("impute: column '" + attr.name + "' has no observed values");
    }
    if (attr.is_categorical()) {
      std::vector<std::size_t> counts(attr.level_count(), 0);
      for (const auto& row : table.rows()) {
        if (!row[c].is_missing()) ++counts[row[c].level()];
      }
      const auto best = std::max_element(counts.begin(), counts.end()) - counts.begin();
      fill[c] = Cell::level(static_cast<std::size_t>(best));
    } else {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& row : table.rows()) {
        if (!row[c].is_missing()) {
          sum += row[c].number();
          ++n;
        }
      }
      fill[c] = Cell::number(sum / static_cast<double>(n));
    }
  }
  Table out = table;
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t c = 0; c < table.width(); ++c) {
      if (table.at(r, c).is_missing()) out.set(r, c, fill[c]);
    }
  }
  return out;
}

namespace {

// Design matrix of every attribute except `target`, restricted to columns
// that vary over `rows`, plus a trailing intercept column.
Eigen::MatrixXd mice_design(const Table& current, std::size_t target, const std::vector<std::size_t>& fit_rows,
                            Warnings* warnings, std::size_t round) {
  std::vector<std::size_t> attrs;
  for (std::size_t c = 0; c < current.width(); ++c) {
    if (c == target) continue;
    bool varies = false;
    const Cell& first = current.at(fit_rows.front(), c);
    for (auto r : fit_rows) {
      if (!(current.at(r, c) == first)) {
        varies = true;
        break;
      }
    }
    if (varies) {
      attrs.push_back(c);
    } else if (round == 0) {
      warn(warnings, "mice: predictor '" + current.schema().at(c).name + "' is constant; dropped from the '" +
                         current.schema().at(target).name + "' regression");
    }
  }
  const auto codec = Codec::fit(current, attrs);
  const auto enc = encode(current, codec);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < enc.values.cols(); ++j) {
    const double v = enc.values(static_cast<Eigen::Index>(fit_rows.front()), j);
    for (auto r : fit_rows) {
      if (enc.values(static_cast<Eigen::Index>(r), j) != v) {
        keep.push_back(j);
        break;
      }
    }
  }
  Eigen::MatrixXd x(enc.values.rows(), static_cast<Eigen::Index>(keep.size()) + 1);
  for (std::size_t j = 0; j < keep.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = enc.values.col(keep[j]);
  x.col(x.cols() - 1).setOnes();
  return x;
}

// L2-penalized binary logistic regression by Newton's method; the intercept
// (last column) is not penalized.
Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge) {
  const Eigen::Index d = x.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d, ridge);
  penalty(d - 1) = 0.0;
  for (int it = 0; it < 30; ++it) {
    const Eigen::VectorXd p = (1.0 / (1.0 + (-(x * beta).array()).exp())).matrix();
    const Eigen::VectorXd w = (p.array() * (1.0 - p.array())).max(1e-10).matrix();
    const Eigen::VectorXd g = x.transpose() * (p - y) + penalty.cwiseProduct(beta);
    Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
    h.diagonal() += penalty + Eigen::VectorXd::Constant(d, 1e-9);
    const Eigen::VectorXd step = h.ldlt().solve(g);
    beta -= step;
    if (!beta.allFinite()) throw TrainingFault("mice: logistic fit diverged");
    if (step.cwiseAbs().maxCoeff() < 1e-8) break;
  }
  return beta;
}

}  // namespace

Table impute_mice(const Table& table, const MiceConfig& config, std::uint64_t seed, Warnings* warnings) {
  if (config.rounds < 1) throw std::invalid_argument("mice: rounds must be >= 1");
  const auto& schema = table.schema();
  std::vector<std::size_t> incomplete;
  for (std::size_t c = 0; c < table.width(); ++c) {
    if (table.missing_count(c) > 0) incomplete.push_back(c);
  }
  Table current = impute_sta(table);
  if (incomplete.empty()) return current;
  Rng rng(derive_seed(seed, "mice"));
  for (std::size_t round = 0; round < config.rounds; ++round) {
    for (std::size_t target : incomplete) {
      const auto& attr = schema.at(target);
      std::vector<std::size_t> fit_rows;
      std::vector<std::size_t> fill_rows;
      for (std::size_t r = 0; r < table.size(); ++r) {
        (table.at(r, target).is_missing() ? fill_rows : fit_rows).push_back(r);
      }
      const Eigen::MatrixXd x = mice_design(current, target, fit_rows, warnings, round);
      Eigen::MatrixXd xf(static_cast<Eigen::Index>(fit_rows.size()), x.cols());
      for (std::size_t i = 0; i < fit_rows.size(); ++i) {
        xf.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(fit_rows[i]));
      }
      if (attr.is_numeric()) {
        Eigen::VectorXd y(xf.rows());
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < fit_rows.size(); ++i) {
          y(static_cast<Eigen::Index>(i)) = table.at(fit_rows[i], target).number();
          lo = std::min(lo, y(static_cast<Eigen::Index>(i)));
          hi = std::max(hi, y(static_cast<Eigen::Index>(i)));
        }
        const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xf);
        const Eigen::VectorXd beta = cod.solve(y);
        const double rss = (xf * beta - y).squaredNorm();
        const double dof = static_cast<double>(xf.rows()) - static_cast<double>(cod.rank());
        const double sigma = dof > 0.0 ? std::sqrt(rss / dof) : 0.0;
        for (auto r : fill_rows) {
          double v = x.row(static_cast<Eigen::Index>(r)).dot(beta);
          if (config.stochastic) v += sigma * rng.normal();
          current.set(r, target, Cell::number(std::clamp(v, lo, hi)));
        }
      } else {
        const std::size_t levels = attr.level_count();
        std::vector<std::size_t> observed_count(levels, 0);
        for (auto r : fit_rows) ++observed_count[table.at(r, target).level()];
        Eigen::MatrixXd prob = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fill_rows.size()),
                                                     static_cast<Eigen::Index>(levels));
        std::size_t present = 0;
        for (std::size_t l = 0; l < levels; ++l) present += observed_count[l] > 0 ? 1 : 0;
        for (std::size_t l = 0; l < levels; ++l) {
          if (observed_count[l] == 0) continue;
          Eigen::VectorXd column;
          if (present == 1) {
            column = Eigen::VectorXd::Ones(prob.rows());
          } else {
            Eigen::VectorXd y(xf.rows());
            for (std::size_t i = 0; i < fit_rows.size(); ++i) {
              y(static_cast<Eigen::Index>(i)) = table.at(fit_rows[i], target).level() == l ? 1.0 : 0.0;
            }
            const Eigen::VectorXd beta = fit_logistic(xf, y, config.ridge);
            column.resize(prob.rows());
            for (std::size_t i = 0; i < fill_rows.size(); ++i) {
              const double z = x.row(static_cast<Eigen::Index>(fill_rows[i])).dot(beta);
              column(static_cast<Eigen::Index>(i)) = 1.0 / (1.0 + std::exp(-z));
            }
          }
          prob.col(static_cast<Eigen::Index>(l)) = column;
        }
        for (std::size_t i = 0; i < fill_rows.size(); ++i) {
          const auto row = static_cast<Eigen::Index>(i);
          std::size_t level = 0;
          if (config.stochastic) {
            std::vector<double> w(levels);
            for (std::size_t l = 0; l < levels; ++l) w[l] = prob(row, static_cast<Eigen::Index>(l));
            level = rng.categorical(w);
          } else {
            level = argmax_rows(prob.row(row))[0];
          }
          current.set(fill_rows[i], target, Cell::level(level));
        }
      }
    }
  }
  return current;
}

void GainConfig::validate() const {
  train.validate();
  if (!(hint_rate > 0.0 && hint_rate < 1.0)) throw std::invalid_argument("gain: hint_rate must be in (0, 1)");
  if (!(alpha >= 0.0)) throw std::invalid_argument("gain: alpha must be >= 0");
}

nlohmann::json GainModel::to_json() const {
  return {{"format", "twkit-gain"},
          {"version", 1},
          {"hint_rate", hint_rate},
          {"alpha", alpha},
          {"seed", seed},
          {"codec", codec.to_json()},
          {"generator", generator.to_json()},
          {"discriminator", discriminator.to_json()}};
}

GainModel GainModel::from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "twkit-gain" || j.value("version", 0) != 1) {
    throw DataError("gain model: not a version-1 twkit-gain document");
  }
  GainModel m;
  m.hint_rate = j.at("hint_rate").get<double>();
  m.alpha = j.at("alpha").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.codec = Codec::from_json(j.at("codec"));
  m.generator = Mlp::from_json(j.at("generator"));
  m.discriminator = Mlp::from_json(j.at("discriminator"));
  return m;
}

namespace {

Eigen::MatrixXd concat_cols(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

Eigen::MatrixXd noise_fill(const Eigen::MatrixXd& x, const Eigen::MatrixXd& m, Rng& rng) {
  Eigen::MatrixXd out = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double z = rng.uniform(0.0, 0.01);
      if (m(i, j) == 0.0) out(i, j) = z;
    }
  }
  return out;
}

// Hint bits drawn per attribute cell and broadcast over its columns.
Eigen::MatrixXd hint_bits(const Codec& codec, Eigen::Index rows, double rate, Rng& rng) {
  Eigen::MatrixXd b(rows, static_cast<Eigen::Index>(codec.width()));
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (const auto& g : codec.groups()) {
      const double bit = rng.bernoulli(rate) ? 1.0 : 0.0;
      b.row(i).segment(static_cast<Eigen::Index>(g.offset), static_cast<Eigen::Index>(g.width)).setConstant(bit);
    }
  }
  return b;
}

}  // namespace

GainModel train_gain(const EncodedMatrix& data, const GainConfig& config, std::uint64_t seed, GainTrace* trace) {
  config.validate();
  if (data.values.rows() != data.mask.rows() || data.values.cols() != data.mask.cols()) {
    throw std::invalid_argument("gain: mask shape does not match the encoded data");
  }
  if (data.values.rows() == 0) throw std::invalid_argument("gain: no rows");
  if (data.values.minCoeff() < 0.0 || data.values.maxCoeff() > 1.0) {
    throw std::invalid_argument("gain: encoded values must lie in [0, 1]");
  }
  const std::size_t d = data.codec.width();
  GainModel model;
  model.codec = data.codec;
  model.hint_rate = config.hint_rate;
  model.alpha = config.alpha;
  model.seed = seed;
  model.generator = Mlp({2 * d, d, d, d}, Activation::relu, Activation::block_softmax, derive_seed(seed, "gain/G"),
                        data.codec.categorical_blocks());
  model.discriminator = Mlp({2 * d, d, d, d}, Activation::relu, Activation::sigmoid, derive_seed(seed, "gain/D"));
  AdamConfig ac;
  ac.learning_rate = config.train.learning_rate;
  AdamState g_state(model.generator, ac);
  AdamState d_state(model.discriminator, ac);
  Rng rng(derive_seed(seed, "gain/train"));
  const auto n = static_cast<std::size_t>(data.values.rows());
  const auto di = static_cast<Eigen::Index>(d);

  for (std::size_t epoch = 0; epoch < config.train.epochs; ++epoch) {
    const auto batches = minibatches(n, config.train.batch_size, rng);
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Eigen::MatrixXd x = gather_rows(data.values, batches[bi]);
      const Eigen::MatrixXd m = gather_rows(data.mask, batches[bi]);
      const Eigen::MatrixXd inv = (1.0 - m.array()).matrix();
      const Eigen::MatrixXd xt = noise_fill(x, m, rng);
      const Eigen::MatrixXd b = hint_bits(model.codec, x.rows(), config.hint_rate, rng);
      const Eigen::MatrixXd h = (b.array() * m.array() + 0.5 * (1.0 - b.array())).matrix();
      const Eigen::MatrixXd g_in = concat_cols(xt, m);
      const Eigen::MatrixXd d_weight = (1.0 - b.array()).matrix();

      // Discriminator step.
      {
        const Eigen::MatrixXd gbar = model.generator.predict(g_in);
        const Eigen::MatrixXd xhat = (x.array() * m.array() + gbar.array() * inv.array()).matrix();
        ForwardCache cache;
        const Eigen::MatrixXd dp = model.discriminator.forward(concat_cols(xhat, h), cache);
        const auto loss = binary_cross_entropy(dp, m, &d_weight);
        require_finite(std::isfinite(loss.value), "gain discriminator", epoch, bi);
        auto grads = model.discriminator.backward(cache, loss.gradient);
        require_finite(grads.all_finite(), "gain discriminator", epoch, bi);
        adam_step(model.discriminator, grads, d_state);
        if (trace != nullptr) trace->discriminator_loss.push_back(loss.value);
      }

      // Generator step: fool D on missing entries, reconstruct observed ones.
      {
        ForwardCache g_cache;
        const Eigen::MatrixXd gbar = model.generator.forward(g_in, g_cache);
        const Eigen::MatrixXd xhat = (x.array() * m.array() + gbar.array() * inv.array()).matrix();
        ForwardCache d_cache;
        const Eigen::MatrixXd dp = model.discriminator.forward(concat_cols(xhat, h), d_cache);
        const Eigen::MatrixXd hidden_missing = inv.cwiseProduct(d_weight);
        const auto adv = binary_cross_entropy(dp, Eigen::MatrixXd::Ones(dp.rows(), dp.cols()), &hidden_missing);
        const auto rec = mse(gbar, x, &m);
        require_finite(std::isfinite(adv.value) && std::isfinite(rec.value), "gain generator", epoch, bi);
        const auto d_grads = model.discriminator.backward(d_cache, adv.gradient);
        const Eigen::MatrixXd d_xhat = d_grads.input.leftCols(di);
        const Eigen::MatrixXd g_out = (d_xhat.array() * inv.array()).matrix() + config.alpha * rec.gradient;
        auto grads = model.generator.backward(g_cache, g_out);
        require_finite(grads.all_finite(), "gain generator", epoch, bi);
        adam_step(model.generator, grads, g_state);
        if (trace != nullptr) trace->reconstruction_loss.push_back(rec.value);
      }
    }
  }
  return model;
}

Eigen::MatrixXd gain_generate(const GainModel& model, const EncodedMatrix& data, std::uint64_t seed) {
  if (!(data.codec == model.codec)) throw DataError("gain: codec does not match the trained model");
  Rng rng(seed);
  const Eigen::MatrixXd xt = noise_fill(data.values, data.mask, rng);
  return model.generator.predict(concat_cols(xt, data.mask));
}

double gain_reconstruction_error(const GainModel& model, const EncodedMatrix& data, std::uint64_t seed) {
  return mse(gain_generate(model, data, seed), data.values, &data.mask).value;
}

Table impute_gain(const GainModel& model, const EncodedMatrix& data, const Table& original) {
  if (static_cast<std::size_t>(data.values.rows()) != original.size()) {
    throw std::invalid_argument("gain: encoded rows do not match the table");
  }
  const Eigen::MatrixXd gbar = gain_generate(model, data, derive_seed(model.seed, "gain/impute"));
  const Table generated = decode_values(gbar, model.codec, original.schema_ptr());
  Table out = original;
  for (std::size_t r = 0; r < original.size(); ++r) {
    for (const auto& g : model.codec.groups()) {
      if (original.at(r, g.attribute).is_missing()) out.set(r, g.attribute, generated.at(r, g.attribute));
    }
  }
  return out;
}

Table impute_gain(const GainModel& model, const Table& table) {
  model.codec.check_compatible(table.schema());
  return impute_gain(model, encode(table, model.codec), table);
}

ImputerRegistry ImputerRegistry::with_defaults(const MiceConfig& mice, const GainConfig& gain) {
  ImputerRegistry r;
  r.add("sta", [](const Table& t, std::uint64_t, Warnings*) { return impute_sta(t); });
  r.add("mice", [mice](const Table& t, std::uint64_t seed, Warnings* w) { return impute_mice(t, mice, seed, w); });
  r.add("gain", [gain](const Table& t, std::uint64_t seed, Warnings*) {
    const auto enc = encode(t);
    const auto model = train_gain(enc, gain, seed);
    return impute_gain(model, enc, t);
  });
  return r;
}

void ImputerRegistry::add(const std::string& name, Imputer imputer) {
  if (name.empty() || !imputer) throw std::invalid_argument("imputer registry: empty name or method");
  methods_[name] = std::move(imputer);
}

const Imputer& ImputerRegistry::get(const std::string& name) const {
  auto it = methods_.find(name);
  if (it == methods_.end()) throw std::invalid_argument("unknown imputation method '" + name + "'");
  return it->second;
}

std::vector<std::string> ImputerRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : methods_) out.push_back(k);
  return out;
}

ClassifierScore score_classifier(const std::string& classifier, const Table& train, const Table& test,
                                 std::uint64_t seed, Warnings* warnings) {
  const auto codec = Codec::fit_features(train);
  const auto xtr = encode(train, codec).values;
  const auto xte = encode(test, codec).values;
  auto model = make_classifier(classifier, seed);
  model->fit(xtr, train.labels(), train.schema().class_count());
  const auto proba = model->predict_proba(xte);
  const auto m = compute_metrics(argmax_rows(proba), proba, test.labels(), train.schema().class_tokens(), warnings);
  return {100.0 * m.accuracy, 100.0 * m.macro_f1, m.macro_auc};
}

DiffReport evaluate_imputation(const Table& complete, const EvalConfig& config, const ImputerRegistry& registry,
                               Warnings* warnings) {
  std::vector<std::size_t> cols;
  for (const auto& f : config.features) cols.push_back(complete.schema().require(f));
  if (!complete.complete()) throw std::invalid_argument("evaluate_imputation: input table has missing cells");
  DiffReport report;
  report.rows = complete.size();
  report.rate = config.rate;
  report.seed = config.seed;
  report.features = config.features;
  report.classifiers = config.classifiers;

  const auto split = stratified_split_indices(complete, config.test_fraction, derive_seed(config.seed, "split"));
  auto clf_seed = [&](const std::string& name) { return derive_seed(config.seed, "clf/" + name); };
  auto score_all = [&](const Table& t) {
    const auto train = t.subset(split.train);
    const auto test = t.subset(split.test);
    std::vector<ClassifierScore> s;
    for (const auto& c : config.classifiers) s.push_back(score_classifier(c, train, test, clf_seed(c), warnings));
    return s;
  };
  report.pristine = score_all(complete);

  const auto holed = inject_missing(complete, config.features, config.rate, derive_seed(config.seed, "missing")).first;
  Warnings quiet;
  for (const auto& method : config.methods) {
    Table imputed = method == "oracle"
                        ? complete
                        : registry.get(method)(holed, derive_seed(config.seed, "impute/" + method), warnings);
    if (imputed.size() != complete.size() || !imputed.complete()) {
      throw DataError("imputation method '" + method + "' left missing cells or changed the row count");
    }
    MethodDiff md;
    md.method = method;
    md.scores = score_all(imputed);
    for (std::size_t i = 0; i < md.scores.size(); ++i) {
      const auto& p = report.pristine[i];
      const auto& s = md.scores[i];
      ClassifierScore d{std::fabs(p.accuracy - s.accuracy), std::fabs(p.f1 - s.f1), std::fabs(p.auc - s.auc)};
      md.avg_accuracy_diff += d.accuracy;
      md.avg_f1_diff += d.f1;
      md.avg_auc_diff += d.auc;
      md.diffs.push_back(d);
    }
    const double k = static_cast<double>(md.diffs.size());
    if (k > 0) {
      md.avg_accuracy_diff /= k;
      md.avg_f1_diff /= k;
      md.avg_auc_diff /= k;
    }
    report.methods.push_back(std::move(md));
  }
  return report;
}

const MethodDiff& DiffReport::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.method == name) return m;
  }
  throw std::invalid_argument("report has no method '" + name + "'");
}

namespace {

nlohmann::json score_json(const ClassifierScore& s) {
  return {{"accuracy", s.accuracy}, {"f1", s.f1}, {"auc", s.auc}};
}

}  // namespace

nlohmann::json DiffReport::to_json() const {
  nlohmann::json j;
  j["rows"] = rows;
  j["rate"] = rate;
  j["seed"] = seed;
  j["features"] = features;
  j["classifiers"] = classifiers;
  j["units"] = {{"accuracy", "percentage points"}, {"f1", "percentage points (macro F1)"}, {"auc", "raw (macro AUC)"}};
  j["pristine"] = nlohmann::json::object();
  for (std::size_t i = 0; i < classifiers.size(); ++i) j["pristine"][classifiers[i]] = score_json(pristine[i]);
  j["methods"] = nlohmann::json::array();
  for (const auto& m : methods) {
    nlohmann::json mj;
    mj["method"] = m.method;
    mj["avg_accuracy_diff"] = m.avg_accuracy_diff;
    mj["avg_f1_diff"] = m.avg_f1_diff;
    mj["avg_auc_diff"] = m.avg_auc_diff;
    for (std::size_t i = 0; i < classifiers.size(); ++i) {
      mj["imputed"][classifiers[i]] = score_json(m.scores[i]);
      mj["diffs"][classifiers[i]] = score_json(m.diffs[i]);
    }
    j["methods"].push_back(mj);
  }
  return j;
}

std::string DiffReport::to_text() const {
  std::ostringstream out;
  out << "Imputation benchmark: " << rows << " rows, " << std::fixed << std::setprecision(0) << rate * 100.0
      << "% MCAR over";
  for (const auto& f : features) out << ' ' << f;
  out << "\n";
  out << std::left << std::setw(10) << "method" << std::right << std::setw(14) << "avg acc diff" << std::setw(14)
      << "avg F1 diff" << std::setw(14) << "avg AUC diff" << "\n";
  out << std::setprecision(3);
  for (const auto& m : methods) {
    std::string name = m.method;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    out << std::left << std::setw(10) << name << std::right << std::setw(14) << m.avg_accuracy_diff << std::setw(14)
        << m.avg_f1_diff << std::setw(14) << m.avg_auc_diff << "\n";
  }
  return out.str();
}

}  // namespace twkit
