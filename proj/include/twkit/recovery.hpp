#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "twkit/augment.hpp"
#include "twkit/classify.hpp"

namespace twkit {

/// Before/after comparison of a classifier trained on the real rows alone and
/// on the same rows augmented. Augmentation only ever sees training rows; the
/// test rows are real and held out.
struct RecoveryConfig {
  std::string model = "RF";
  double test_fraction = 0.2;
  std::size_t folds = 0;  // >= 2 pools the predictions of stratified k-fold instead of one split
  bool augment = true;
  std::size_t total = 1800;
  std::size_t stage1_floor = 100;
  AugmentConfig augment_config;

  void validate() const;
};

struct RecoveryReport {
  std::string model;
  std::string protocol;  // "holdout" or "kfold"
  std::size_t folds = 0;
  std::size_t train_rows = 0;  // real rows used for training, summed over folds
  std::size_t test_rows = 0;
  Metrics before;
  std::optional<Metrics> after;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// `real` must be complete; rows with a synthetic origin are rejected so the
/// test rows are guaranteed real.
RecoveryReport evaluate_recovery(const Table& real, const RecoveryConfig& config, std::uint64_t seed,
                                 Warnings* warnings = nullptr);

}  // namespace twkit
