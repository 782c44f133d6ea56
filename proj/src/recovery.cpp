#include "twkit/recovery.hpp"

#include <sstream>
#include <stdexcept>

#include "twkit/split.hpp"

namespace twkit {

void RecoveryConfig::validate() const {
  if (folds == 1) throw std::invalid_argument("recovery: folds must be 0 (holdout) or >= 2");
  if (folds == 0 && !(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("recovery: test_fraction must be in (0, 1)");
  }
  augment_config.cgan.validate();
  if (augment_config.k_neighbors == 0) throw std::invalid_argument("recovery: k_neighbors must be >= 1");
  make_classifier(model, 0);
}

nlohmann::json RecoveryReport::to_json() const {
  nlohmann::json j{{"model", model},         {"protocol", protocol},   {"folds", folds},
                   {"train_rows", train_rows}, {"test_rows", test_rows}, {"before", before.to_json()}};
  j["after"] = after ? after->to_json() : nlohmann::json();
  return j;
}

std::string RecoveryReport::to_text() const {
  std::ostringstream out;
  out << model << ", " << (protocol == "kfold" ? std::to_string(folds) + "-fold pooled" : "holdout")
      << ", " << test_rows << " real test rows\n\n";
  out << format_metrics(before, "Real rows only");
  if (after) out << "\n" << format_metrics(*after, "Augmented training rows");
  return out.str();
}

namespace {

struct Pooled {
  std::vector<std::size_t> predicted;
  std::vector<Eigen::MatrixXd> scores;

  Eigen::MatrixXd stacked(std::size_t classes) const {
    Eigen::Index n = 0;
    for (const auto& s : scores) n += s.rows();
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(classes));
    n = 0;
    for (const auto& s : scores) {
      out.middleRows(n, s.rows()) = s;
      n += s.rows();
    }
    return out;
  }
};

void fit_and_score(const std::string& model, const Table& train, const Table& test, std::uint64_t seed,
                   Pooled& into) {
  const auto codec = Codec::fit_features(train);
  auto clf = make_classifier(model, seed);
  clf->fit(encode(train, codec).values, train.labels(), train.schema().class_count());
  const auto proba = clf->predict_proba(encode(test, codec).values);
  for (auto y : argmax_rows(proba)) into.predicted.push_back(y);
  into.scores.push_back(proba);
}

}  // namespace

RecoveryReport evaluate_recovery(const Table& real, const RecoveryConfig& config, std::uint64_t seed,
                                 Warnings* warnings) {
  config.validate();
  if (!real.complete()) throw DataError("recovery: the input table has missing cells; impute it first");
  for (std::size_t r = 0; r < real.size(); ++r) {
    if (real.origin(r) != Origin::real) {
      throw DataError("recovery: row " + std::to_string(r + 1) + " is synthetic; pass the real rows only");
    }
  }

  std::vector<std::vector<std::size_t>> train_sets, test_sets;
  if (config.folds >= 2) {
    const auto fold = stratified_folds(real, config.folds, derive_seed(seed, "folds"));
    train_sets.resize(config.folds);
    test_sets.resize(config.folds);
    for (std::size_t r = 0; r < real.size(); ++r) {
      for (std::size_t f = 0; f < config.folds; ++f) (fold[r] == f ? test_sets : train_sets)[f].push_back(r);
    }
  } else {
    const auto split = stratified_split_indices(real, config.test_fraction, derive_seed(seed, "split"));
    train_sets.push_back(split.train);
    test_sets.push_back(split.test);
  }

  RecoveryReport report;
  report.model = config.model;
  report.protocol = config.folds >= 2 ? "kfold" : "holdout";
  report.folds = config.folds >= 2 ? config.folds : 1;

  const std::uint64_t clf_seed = derive_seed(seed, "classifier");
  Pooled before, after;
  std::vector<std::size_t> truth;
  for (std::size_t f = 0; f < train_sets.size(); ++f) {
    const auto train = real.subset(train_sets[f]);
    const auto test = real.subset(test_sets[f]);
    report.train_rows += train.size();
    report.test_rows += test.size();
    for (auto y : test.labels()) truth.push_back(y);
    fit_and_score(config.model, train, test, clf_seed, before);
    if (config.augment) {
      const auto plan = default_augment_plan(class_histogram(train), config.total, config.stage1_floor);
      const auto augmented = two_stage_augment(train, plan, config.augment_config,
                                               derive_seed(seed, "augment/" + std::to_string(f)), warnings);
      fit_and_score(config.model, augmented, test, clf_seed, after);
    }
  }

  const auto classes = real.schema().class_tokens();
  const auto k = real.schema().class_count();
  report.before = compute_metrics(before.predicted, before.stacked(k), truth, classes, warnings);
  if (config.augment) report.after = compute_metrics(after.predicted, after.stacked(k), truth, classes, nullptr);
  return report;
}

}  // namespace twkit
