#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "twkit/codec.hpp"
#include "twkit/error.hpp"
#include "twkit/nn.hpp"
#include "twkit/table.hpp"

namespace twkit {

/// Column mode (ties to the lowest code) for categoricals, observed mean for
/// numerics. Throws DataError if a column with missing cells has no observed
/// value at all.
Table impute_sta(const Table& table);

struct MiceConfig {
  std::size_t rounds = 10;
  /// Draw imputations from the fitted conditional (Gaussian residual noise for
  /// numerics, a categorical draw from the predicted probabilities) instead
  /// of taking the point prediction.
  bool stochastic = true;
  double ridge = 1e-3;  // L2 penalty of the per-code logistic fits
};

/// Chained equations started from STA. Each sweep regresses every
/// originally-incomplete column on all other columns over the rows where it
/// is observed (least squares for numerics, one-vs-rest logistic for
/// categoricals) and re-predicts only the originally-missing cells. Constant
/// predictor attributes are dropped from that regression with a warning.
Table impute_mice(const Table& table, const MiceConfig& config, std::uint64_t seed, Warnings* warnings = nullptr);

struct GainConfig {
  TrainConfig train{500, 128, 1e-3, 0};
  double hint_rate = 0.9;
  double alpha = 10.0;

  void validate() const;
};

struct GainModel {
  Mlp generator;      // 2d -> d -> d -> d, block softmax / sigmoid output
  Mlp discriminator;  // 2d -> d -> d -> d, sigmoid output
  Codec codec;
  double hint_rate = 0.9;
  double alpha = 10.0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static GainModel from_json(const nlohmann::json& j);
};

/// Per-batch values recorded while training, for diagnostics and tests.
struct GainTrace {
  std::vector<double> discriminator_loss;
  std::vector<double> reconstruction_loss;
};

/// Adversarial imputation training on an encoded table and its cell mask.
/// The hint bit is drawn once per attribute cell and shared by every column
/// of a one-hot block.
GainModel train_gain(const EncodedMatrix& data, const GainConfig& config, std::uint64_t seed,
                     GainTrace* trace = nullptr);

/// Masked MSE between the generator's output and the observed entries.
double gain_reconstruction_error(const GainModel& model, const EncodedMatrix& data, std::uint64_t seed);

/// Generator output with unobserved inputs replaced by fresh uniform(0, 0.01)
/// noise from `seed`.
Eigen::MatrixXd gain_generate(const GainModel& model, const EncodedMatrix& data, std::uint64_t seed);

/// Fills the missing cells of `table` from the generator; observed cells are
/// copied verbatim. Throws DataError if the table does not fit the model codec.
Table impute_gain(const GainModel& model, const Table& table);
/// As above for an already encoded table; `data.codec` must equal the model codec.
Table impute_gain(const GainModel& model, const EncodedMatrix& data, const Table& original);

/// An imputation method: (table with holes, seed, warnings) -> completed table.
using Imputer = std::function<Table(const Table&, std::uint64_t, Warnings*)>;

/// Named imputation methods. The defaults are "sta", "mice" and "gain".
class ImputerRegistry {
 public:
  static ImputerRegistry with_defaults(const MiceConfig& mice = {}, const GainConfig& gain = {});

  void add(const std::string& name, Imputer imputer);
  bool contains(const std::string& name) const { return methods_.contains(name); }
  const Imputer& get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Imputer> methods_;
};

struct ClassifierScore {
  double accuracy = 0.0;  // percentage points
  double f1 = 0.0;        // macro F1, percentage points
  double auc = 0.0;       // macro one-vs-rest AUC, raw
};

struct MethodDiff {
  std::string method;
  std::vector<ClassifierScore> scores;  // per classifier, on imputed data
  std::vector<ClassifierScore> diffs;   // |pristine - imputed|
  double avg_accuracy_diff = 0.0;
  double avg_f1_diff = 0.0;
  double avg_auc_diff = 0.0;
};

struct DiffReport {
  std::size_t rows = 0;
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> features;
  std::vector<std::string> classifiers;
  std::vector<ClassifierScore> pristine;
  std::vector<MethodDiff> methods;

  const MethodDiff& method(const std::string& name) const;
  nlohmann::json to_json() const;
  /// Aligned text table of the average diffs, one row per method.
  std::string to_text() const;
};

struct EvalConfig {
  std::vector<std::string> features{"hairstyle", "headgear", "weapon", "height"};
  double rate = 0.30;
  std::vector<std::string> methods{"sta", "mice", "gain"};
  std::vector<std::string> classifiers{"LR", "DT", "RF", "MLP", "SVM"};
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

/// Scores the chosen classifiers on the stratified split of the pristine
/// table, then for each method imputes the MCAR-damaged table, splits it with
/// the same indices, retrains identically seeded classifiers and reports the
/// absolute metric differences. The method "oracle" returns the pristine
/// table unchanged.
DiffReport evaluate_imputation(const Table& complete, const EvalConfig& config, const ImputerRegistry& registry,
                               Warnings* warnings = nullptr);

/// Encodes the feature columns of train/test with a codec fitted on train,
/// trains `classifier` and returns its test metrics in report units.
ClassifierScore score_classifier(const std::string& classifier, const Table& train, const Table& test,
                                 std::uint64_t seed, Warnings* warnings = nullptr);

}  // namespace twkit
