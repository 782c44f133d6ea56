#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "twkit/codec.hpp"
#include "twkit/error.hpp"
#include "twkit/nn.hpp"
#include "twkit/table.hpp"

namespace twkit {

/// Median of the numeric feature standard deviations over `rows` (sample
/// standard deviation; 0 when there are fewer than two rows or no numerics).
double smotenc_penalty(const Table& rows);

/// sqrt(sum over numerics (a-b)^2 + penalty^2 * number of categorical
/// feature mismatches). The label column is ignored. Rows must be complete.
double smotenc_distance(const Row& a, const Row& b, const Schema& schema, double penalty);

/// n_new synthetic rows of class `cls`. Numerics are interpolated between a
/// random member and one of its k nearest same-class neighbours;
/// categoricals take the majority value over those k neighbours, and a tied
/// vote keeps the member's own value. k is lowered to class size - 1 with a
/// warning when the class is too small.
std::vector<Row> smotenc_generate(const Table& table, std::size_t cls, std::size_t n_new, std::size_t k,
                                  std::uint64_t seed, Warnings* warnings = nullptr);

struct CganConfig {
  std::size_t noise_dim = 32;
  std::size_t hidden = 128;
  TrainConfig train{300, 64, 1e-3, 0};
  double moment_weight = 10.0;   // per-class mean matching
  double semantic_weight = 1.0;  // auxiliary classifier loss on generated rows

  void validate() const;
};

struct TableCganModel {
  Mlp generator;      // noise ++ class one-hot -> encoded row
  Mlp discriminator;  // encoded row ++ class one-hot -> P(real)
  Mlp classifier;     // encoded row -> class logits
  Codec codec;        // feature columns only
  std::size_t noise_dim = 0;
  std::size_t classes = 0;

  nlohmann::json to_json() const;
  static TableCganModel from_json(const nlohmann::json& j);
};

struct CganTrace {
  std::vector<double> discriminator_loss;
  std::vector<double> generator_loss;
  std::vector<double> classifier_loss;
};

/// Conditional tabular GAN with an auxiliary classifier. `encoded` holds
/// feature columns in [0, 1], `labels` the class of each row.
TableCganModel train_table_cgan(const EncodedMatrix& encoded, std::span<const std::size_t> labels,
                                std::size_t classes, const CganConfig& config, std::uint64_t seed,
                                CganTrace* trace = nullptr);

/// Raw generator output for n rows of class `cls`.
Eigen::MatrixXd cgan_generate(const TableCganModel& model, std::size_t cls, std::size_t n, std::uint64_t seed);

/// n decoded rows labelled `cls`.
std::vector<Row> sample_table_cgan(const TableCganModel& model, const Schema& schema, std::size_t cls,
                                   std::size_t n, std::uint64_t seed);

/// Fraction of n generated rows of class `cls` that the auxiliary classifier
/// assigns to `cls`.
double cgan_class_agreement(const TableCganModel& model, std::size_t cls, std::size_t n, std::uint64_t seed);

struct AugmentPlan {
  std::vector<std::size_t> stage1;  // per class, label order
  std::vector<std::size_t> stage2;

  std::size_t total() const;
  /// Throws std::invalid_argument unless stage2 >= stage1 >= counts per class.
  void validate(std::span<const std::size_t> counts) const;

  nlohmann::json to_json(const Schema& schema) const;
  static AugmentPlan from_json(const nlohmann::json& j, const Schema& schema);
};

/// Stage 2 water-fills the classes below the common level so the total is
/// `total` (classes above it keep their rows); stage 1 lifts each class to
/// min(stage1_floor, its stage-2 target).
AugmentPlan default_augment_plan(std::span<const std::size_t> counts, std::size_t total = 1800,
                                 std::size_t stage1_floor = 100);

struct AugmentConfig {
  std::size_t k_neighbors = 5;
  CganConfig cgan;
};

/// Real rows first (verbatim, origin real), then SMOTENC rows, then CGAN rows.
/// The CGAN is trained on the stage-1 corpus and only when stage 2 adds rows.
Table two_stage_augment(const Table& table, const AugmentPlan& plan, const AugmentConfig& config,
                        std::uint64_t seed, Warnings* warnings = nullptr);

}  // namespace twkit
