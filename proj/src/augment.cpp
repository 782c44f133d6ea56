#include "twkit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "twkit/rng.hpp"

namespace twkit {

namespace {

Eigen::MatrixXd concat_cols(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

Eigen::MatrixXd one_hot_rows(std::span<const std::size_t> labels, std::size_t classes) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                              static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
  }
  return out;
}

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = rng.normal();
  }
  return out;
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

double smotenc_penalty(const Table& rows) {
  const auto& schema = rows.schema();
  std::vector<double> sds;
  for (auto c : schema.feature_indices()) {
    if (!schema.at(c).is_numeric()) continue;
    std::vector<double> values;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows.at(r, c).is_missing()) values.push_back(rows.at(r, c).number());
    }
    sds.push_back(sample_sd(values));
  }
  if (sds.empty()) return 0.0;
  std::sort(sds.begin(), sds.end());
  const std::size_t m = sds.size();
  return m % 2 == 1 ? sds[m / 2] : 0.5 * (sds[m / 2 - 1] + sds[m / 2]);
}

double smotenc_distance(const Row& a, const Row& b, const Schema& schema, double penalty) {
  if (a.size() != schema.size() || b.size() != schema.size()) {
    throw std::invalid_argument("smotenc: row width does not match the schema");
  }
  double sum = 0.0;
  for (auto c : schema.feature_indices()) {
    if (a[c].is_missing() || b[c].is_missing()) {
      throw DataError("smotenc: attribute '" + schema.at(c).name + "' has a missing cell");
    }
    if (schema.at(c).is_numeric()) {
      const double d = a[c].number() - b[c].number();
      sum += d * d;
    } else if (a[c].level() != b[c].level()) {
      sum += penalty * penalty;
    }
  }
  return std::sqrt(sum);
}

std::vector<Row> smotenc_generate(const Table& table, std::size_t cls, std::size_t n_new, std::size_t k,
                                  std::uint64_t seed, Warnings* warnings) {
  const auto& schema = table.schema();
  if (cls >= schema.class_count()) throw std::invalid_argument("smotenc: unknown class index");
  if (k < 1) throw std::invalid_argument("smotenc: k must be >= 1");
  const Table members = table.rows_of_class(cls);
  const std::string token = schema.label().categories[cls].token;
  if (n_new == 0) return {};
  if (members.size() < 2) {
    throw DataError("smotenc: class '" + token + "' has " + std::to_string(members.size()) +
                    " member(s); at least 2 are needed to interpolate");
  }
  if (k > members.size() - 1) {
    k = members.size() - 1;
    warn(warnings, "smotenc: class '" + token + "' has " + std::to_string(members.size()) +
                       " members; k lowered to " + std::to_string(k));
  }
  const double penalty = smotenc_penalty(members);
  const std::size_t m = members.size();

  std::vector<std::vector<std::size_t>> neighbours(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) d.emplace_back(smotenc_distance(members.row(i), members.row(j), schema, penalty), j);
    }
    std::sort(d.begin(), d.end());
    for (std::size_t j = 0; j < k; ++j) neighbours[i].push_back(d[j].second);
  }

  Rng rng(seed);
  std::vector<Row> out;
  out.reserve(n_new);
  for (std::size_t n = 0; n < n_new; ++n) {
    const std::size_t r = rng.below(m);
    const std::size_t s = neighbours[r][rng.below(k)];
    const double u = rng.uniform();
    const Row& a = members.row(r);
    const Row& b = members.row(s);
    Row row = a;
    for (auto c : schema.feature_indices()) {
      const auto& attr = schema.at(c);
      if (attr.is_numeric()) {
        row[c] = Cell::number(a[c].number() + u * (b[c].number() - a[c].number()));
        continue;
      }
      std::vector<std::size_t> votes(attr.level_count(), 0);
      for (auto j : neighbours[r]) ++votes[members.at(j, c).level()];
      const auto top = std::max_element(votes.begin(), votes.end());
      const bool tie = std::count(votes.begin(), votes.end(), *top) > 1;
      row[c] = Cell::level(tie ? a[c].level() : static_cast<std::size_t>(top - votes.begin()));
    }
    row[schema.label_index()] = Cell::level(cls);
    out.push_back(std::move(row));
  }
  return out;
}

void CganConfig::validate() const {
  train.validate();
  if (noise_dim < 1) throw std::invalid_argument("cgan: noise_dim must be >= 1");
  if (hidden < 1) throw std::invalid_argument("cgan: hidden width must be >= 1");
  if (!(moment_weight >= 0.0) || !(semantic_weight >= 0.0)) {
    throw std::invalid_argument("cgan: loss weights must be >= 0");
  }
}

nlohmann::json TableCganModel::to_json() const {
  return {{"format", "twkit-cgan"},
          {"version", 1},
          {"noise_dim", noise_dim},
          {"classes", classes},
          {"codec", codec.to_json()},
          {"generator", generator.to_json()},
          {"discriminator", discriminator.to_json()},
          {"classifier", classifier.to_json()}};
}

TableCganModel TableCganModel::from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "twkit-cgan" || j.value("version", 0) != 1) {
    throw DataError("cgan model: not a version-1 twkit-cgan document");
  }
  TableCganModel m;
  m.noise_dim = j.at("noise_dim").get<std::size_t>();
  m.classes = j.at("classes").get<std::size_t>();
  m.codec = Codec::from_json(j.at("codec"));
  m.generator = Mlp::from_json(j.at("generator"));
  m.discriminator = Mlp::from_json(j.at("discriminator"));
  m.classifier = Mlp::from_json(j.at("classifier"));
  if (m.generator.input_width() != m.noise_dim + m.classes || m.generator.output_width() != m.codec.width()) {
    throw DataError("cgan model: network shapes do not match the codec");
  }
  return m;
}

TableCganModel train_table_cgan(const EncodedMatrix& encoded, std::span<const std::size_t> labels,
                                std::size_t classes, const CganConfig& config, std::uint64_t seed,
                                CganTrace* trace) {
  config.validate();
  const auto n = static_cast<std::size_t>(encoded.values.rows());
  if (n == 0) throw std::invalid_argument("cgan: no rows");
  if (labels.size() != n) throw std::invalid_argument("cgan: label count does not match the rows");
  if (classes < 2) throw std::invalid_argument("cgan: need at least 2 classes");
  for (auto y : labels) {
    if (y >= classes) throw std::invalid_argument("cgan: label out of range");
  }
  if (!encoded.values.allFinite() || encoded.values.minCoeff() < 0.0 || encoded.values.maxCoeff() > 1.0) {
    throw std::invalid_argument("cgan: encoded values must lie in [0, 1]");
  }
  const std::size_t d = encoded.codec.width();
  const std::size_t h = config.hidden;
  TableCganModel model;
  model.codec = encoded.codec;
  model.noise_dim = config.noise_dim;
  model.classes = classes;
  model.generator = Mlp({config.noise_dim + classes, h, h, d}, Activation::tanh, Activation::block_softmax,
                        derive_seed(seed, "cgan/G"), encoded.codec.categorical_blocks());
  model.discriminator = Mlp({d + classes, h, h, 1}, Activation::tanh, Activation::sigmoid, derive_seed(seed, "cgan/D"));
  model.classifier = Mlp({d, h, h, classes}, Activation::tanh, Activation::identity, derive_seed(seed, "cgan/C"));

  AdamConfig ac;
  ac.learning_rate = config.train.learning_rate;
  AdamState g_state(model.generator, ac);
  AdamState d_state(model.discriminator, ac);
  AdamState c_state(model.classifier, ac);
  Rng rng(derive_seed(seed, "cgan/train"));
  const auto di = static_cast<Eigen::Index>(d);

  // Per-class feature means of the whole training set: the moment targets.
  Eigen::MatrixXd class_mean = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(classes), di);
  std::vector<double> class_rows(classes, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    class_mean.row(static_cast<Eigen::Index>(labels[r])) += encoded.values.row(static_cast<Eigen::Index>(r));
    class_rows[labels[r]] += 1.0;
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (class_rows[c] > 0.0) class_mean.row(static_cast<Eigen::Index>(c)) /= class_rows[c];
  }

  // Running per-class means of generated rows; a batch alone holds too few
  // minority rows to estimate them.
  Eigen::MatrixXd fake_mean = class_mean;
  constexpr double kMomentDecay = 0.9;

  for (std::size_t epoch = 0; epoch < config.train.epochs; ++epoch) {
    const auto batches = minibatches(n, config.train.batch_size, rng);
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const auto& idx = batches[bi];
      const auto nb = static_cast<Eigen::Index>(idx.size());
      const Eigen::MatrixXd x = gather_rows(encoded.values, idx);
      std::vector<std::size_t> y(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) y[i] = labels[idx[i]];
      const Eigen::MatrixXd cy = one_hot_rows(y, classes);
      const Eigen::MatrixXd g_in = concat_cols(normal_matrix(nb, static_cast<Eigen::Index>(config.noise_dim), rng), cy);

      {
        const Eigen::MatrixXd fake = model.generator.predict(g_in);
        Eigen::MatrixXd d_in(2 * nb, di + static_cast<Eigen::Index>(classes));
        d_in << concat_cols(x, cy), concat_cols(fake, cy);
        Eigen::MatrixXd target(2 * nb, 1);
        target.topRows(nb).setOnes();
        target.bottomRows(nb).setZero();
        ForwardCache cache;
        const auto loss = binary_cross_entropy(model.discriminator.forward(d_in, cache), target);
        require_finite(std::isfinite(loss.value), "cgan discriminator", epoch, bi);
        auto grads = model.discriminator.backward(cache, loss.gradient);
        require_finite(grads.all_finite(), "cgan discriminator", epoch, bi);
        adam_step(model.discriminator, grads, d_state);
        if (trace != nullptr) trace->discriminator_loss.push_back(loss.value);
      }

      {
        ForwardCache cache;
        const auto loss = softmax_cross_entropy(model.classifier.forward(x, cache), y);
        require_finite(std::isfinite(loss.value), "cgan classifier", epoch, bi);
        auto grads = model.classifier.backward(cache, loss.gradient);
        require_finite(grads.all_finite(), "cgan classifier", epoch, bi);
        adam_step(model.classifier, grads, c_state);
        if (trace != nullptr) trace->classifier_loss.push_back(loss.value);
      }

      {
        ForwardCache g_cache;
        const Eigen::MatrixXd fake = model.generator.forward(g_in, g_cache);
        ForwardCache d_cache;
        const Eigen::MatrixXd dp = model.discriminator.forward(concat_cols(fake, cy), d_cache);
        const auto adv = binary_cross_entropy(dp, Eigen::MatrixXd::Ones(nb, 1));
        Eigen::MatrixXd g_out = model.discriminator.backward(d_cache, adv.gradient).input.leftCols(di);

        // Match the per-class means of the generated batch to the class means.
        double moment = 0.0;
        std::vector<std::vector<Eigen::Index>> by_class(classes);
        for (Eigen::Index i = 0; i < nb; ++i) by_class[y[static_cast<std::size_t>(i)]].push_back(i);
        std::size_t present = 0;
        for (const auto& rows : by_class) present += rows.empty() ? 0 : 1;
        for (std::size_t c = 0; c < classes; ++c) {
          const auto& rows = by_class[c];
          if (rows.empty()) continue;
          Eigen::RowVectorXd batch_mean = Eigen::RowVectorXd::Zero(di);
          for (auto i : rows) batch_mean += fake.row(i);
          batch_mean /= static_cast<double>(rows.size());
          const auto ci = static_cast<Eigen::Index>(c);
          fake_mean.row(ci) = kMomentDecay * fake_mean.row(ci) + (1.0 - kMomentDecay) * batch_mean;
          const Eigen::RowVectorXd diff = fake_mean.row(ci) - class_mean.row(ci);
          moment += diff.squaredNorm() / static_cast<double>(present);
          const Eigen::RowVectorXd grad =
              config.moment_weight * 2.0 * diff / (static_cast<double>(rows.size()) * static_cast<double>(present));
          for (auto i : rows) g_out.row(i) += grad;
        }

        ForwardCache c_cache;
        const auto sem = softmax_cross_entropy(model.classifier.forward(fake, c_cache), y);
        g_out += config.semantic_weight * model.classifier.backward(c_cache, sem.gradient).input;

        const double total = adv.value + config.moment_weight * moment + config.semantic_weight * sem.value;
        require_finite(std::isfinite(total), "cgan generator", epoch, bi);
        auto grads = model.generator.backward(g_cache, g_out);
        require_finite(grads.all_finite(), "cgan generator", epoch, bi);
        adam_step(model.generator, grads, g_state);
        if (trace != nullptr) trace->generator_loss.push_back(total);
      }
    }
  }
  return model;
}

Eigen::MatrixXd cgan_generate(const TableCganModel& model, std::size_t cls, std::size_t n, std::uint64_t seed) {
  if (cls >= model.classes) throw std::invalid_argument("cgan: unknown class index " + std::to_string(cls));
  const auto rows = static_cast<Eigen::Index>(n);
  if (n == 0) return Eigen::MatrixXd(0, static_cast<Eigen::Index>(model.codec.width()));
  Rng rng(seed);
  Eigen::MatrixXd cy = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(model.classes));
  cy.col(static_cast<Eigen::Index>(cls)).setOnes();
  return model.generator.predict(concat_cols(normal_matrix(rows, static_cast<Eigen::Index>(model.noise_dim), rng), cy));
}

std::vector<Row> sample_table_cgan(const TableCganModel& model, const Schema& schema, std::size_t cls,
                                   std::size_t n, std::uint64_t seed) {
  model.codec.check_compatible(schema);
  if (schema.class_count() != model.classes) throw DataError("cgan: schema class count does not match the model");
  const Eigen::MatrixXd values = cgan_generate(model, cls, n, seed);
  std::vector<Row> out;
  out.reserve(n);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    const Eigen::RowVectorXd row_values = values.row(r);
    Row row = decode_row(std::span<const double>(row_values.data(), static_cast<std::size_t>(row_values.size())),
                         model.codec, schema);
    row[schema.label_index()] = Cell::level(cls);
    out.push_back(std::move(row));
  }
  return out;
}

double cgan_class_agreement(const TableCganModel& model, std::size_t cls, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("cgan: agreement needs n >= 1");
  const Eigen::MatrixXd logits = model.classifier.predict(cgan_generate(model, cls, n, seed));
  std::size_t hits = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    logits.row(r).maxCoeff(&best);
    hits += static_cast<std::size_t>(best) == cls ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

std::size_t AugmentPlan::total() const { return std::accumulate(stage2.begin(), stage2.end(), std::size_t{0}); }

void AugmentPlan::validate(std::span<const std::size_t> counts) const {
  if (stage1.size() != counts.size() || stage2.size() != counts.size()) {
    throw std::invalid_argument("augment plan: expected " + std::to_string(counts.size()) + " classes");
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (stage1[c] < counts[c] || stage2[c] < stage1[c]) {
      throw std::invalid_argument("augment plan: class " + std::to_string(c) +
                                  " needs stage2 >= stage1 >= current count (" + std::to_string(counts[c]) + ")");
    }
  }
}

nlohmann::json AugmentPlan::to_json(const Schema& schema) const {
  const auto tokens = schema.class_tokens();
  if (tokens.size() != stage1.size() || tokens.size() != stage2.size()) {
    throw std::invalid_argument("augment plan: class count does not match the schema");
  }
  nlohmann::json s1 = nlohmann::json::object();
  nlohmann::json s2 = nlohmann::json::object();
  for (std::size_t c = 0; c < tokens.size(); ++c) {
    s1[tokens[c]] = stage1[c];
    s2[tokens[c]] = stage2[c];
  }
  return {{"stage1", s1}, {"stage2", s2}, {"total", total()}};
}

AugmentPlan AugmentPlan::from_json(const nlohmann::json& j, const Schema& schema) {
  AugmentPlan plan;
  const auto tokens = schema.class_tokens();
  for (const char* stage : {"stage1", "stage2"}) {
    const auto& obj = j.at(stage);
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(tokens.begin(), tokens.end(), it.key()) == tokens.end()) {
        throw DataError(std::string("augment plan: unknown class '") + it.key() + "' in " + stage);
      }
    }
    auto& out = std::string(stage) == "stage1" ? plan.stage1 : plan.stage2;
    for (const auto& t : tokens) {
      if (!obj.contains(t)) throw DataError(std::string("augment plan: ") + stage + " lacks class '" + t + "'");
      out.push_back(obj.at(t).get<std::size_t>());
    }
  }
  if (j.contains("total") && j.at("total").get<std::size_t>() != plan.total()) {
    throw DataError("augment plan: total does not equal the sum of the stage-2 targets");
  }
  return plan;
}

AugmentPlan default_augment_plan(std::span<const std::size_t> counts, std::size_t total, std::size_t stage1_floor) {
  const std::size_t have = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total < have) {
    throw std::invalid_argument("augment plan: total " + std::to_string(total) + " is below the current " +
                                std::to_string(have) + " rows");
  }
  auto filled = [&](std::size_t level) {
    std::size_t s = 0;
    for (auto c : counts) s += std::max(c, level);
    return s;
  };
  std::size_t level = 0;
  while (filled(level + 1) <= total && level < total) ++level;
  AugmentPlan plan;
  plan.stage2.resize(counts.size());
  std::size_t leftover = total - filled(level);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    plan.stage2[c] = std::max(counts[c], level);
    if (leftover > 0 && counts[c] <= level) {
      ++plan.stage2[c];
      --leftover;
    }
  }
  plan.stage1.resize(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    plan.stage1[c] = std::max(counts[c], std::min(stage1_floor, plan.stage2[c]));
  }
  return plan;
}

Table two_stage_augment(const Table& table, const AugmentPlan& plan, const AugmentConfig& config,
                        std::uint64_t seed, Warnings* warnings) {
  const auto& schema = table.schema();
  const auto counts = class_histogram(table);
  plan.validate(counts);
  if (!table.complete()) throw DataError("augment: input table has missing cells; impute first");
  const auto tokens = schema.class_tokens();

  Table out(table.schema_ptr());
  out.enable_origin();
  for (const auto& row : table.rows()) out.add_row(row, Origin::real);

  Table stage1 = table;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const std::size_t need = plan.stage1[c] - counts[c];
    for (auto& row : smotenc_generate(table, c, need, config.k_neighbors, derive_seed(seed, "smotenc/" + tokens[c]),
                                      warnings)) {
      stage1.add_row(row);
      out.add_row(std::move(row), Origin::smotenc);
    }
  }

  bool needs_cgan = false;
  for (std::size_t c = 0; c < counts.size(); ++c) needs_cgan = needs_cgan || plan.stage2[c] > plan.stage1[c];
  if (!needs_cgan) return out;

  const auto encoded = encode(stage1, Codec::fit_features(stage1));
  const auto labels = stage1.labels();
  const auto model = train_table_cgan(encoded, labels, counts.size(), config.cgan, derive_seed(seed, "cgan"));
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const std::size_t need = plan.stage2[c] - plan.stage1[c];
    for (auto& row : sample_table_cgan(model, schema, c, need, derive_seed(seed, "cgan/sample/" + tokens[c]))) {
      out.add_row(std::move(row), Origin::cgan);
    }
  }
  return out;
}

}  // namespace twkit
