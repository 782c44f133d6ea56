#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "twkit/augment.hpp"
#include "twkit/impute.hpp"
#include "twkit/recovery.hpp"
#include "twkit/render.hpp"
#include "twkit/synth.hpp"

namespace twkit::app {

/// Bad flags or a bad config document; the CLI exits with status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StageToggles {
  bool eval_impute = true;
  bool augment = true;
  bool train = true;
  bool analyze = true;
  bool plot = true;
};

struct SynthSection {
  std::size_t rows = 1087;
  std::optional<std::filesystem::path> input;  // read this CSV instead of synthesizing
  SynthesisSpec spec = default_synthesis_spec();
};

struct ImputeSection {
  std::size_t rows = 520;
  EvalConfig eval;
  MiceConfig mice;
  GainConfig gain;
};

struct AugmentSection {
  std::size_t total = 1800;
  std::size_t stage1_floor = 100;
  std::optional<nlohmann::json> plan;  // explicit AugmentPlan document
  AugmentConfig config;
};

struct TrainSection {
  std::string model = "RF";
  double test_fraction = 0.2;
  std::size_t folds = 0;
};

struct AnalyzeSection {
  std::size_t top_attributes = 6;
  std::vector<std::string> correlation_attributes;  // empty = every categorical feature
};

struct PlotSection {
  PlotSpec importance{"Attribute importance (RF Gini)", "mean decrease in impurity", "", 0, 0, {}};
  PlotSpec box{"Per-class boxplots of the top attributes", "", "value", 0, 0, {}};
  PlotSpec violin{"Per-class violin plots of the top attributes", "", "value", 0, 0, {}};
  PlotSpec heatmap{"Attribute correlation (Cramer's V)", "", "", 0, 0, {}};

  const PlotSpec& for_kind(PlotKind kind) const;
};

/// One document configures every command; each command reads its section.
/// Relative paths inside it resolve against the document's directory.
struct Config {
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "twkit-out";
  StageToggles stages;
  SynthSection synth;
  ImputeSection impute;
  AugmentSection augment;
  TrainSection train;
  AnalyzeSection analyze;
  PlotSection plots;

  RecoveryConfig recovery() const;
  ImputerRegistry registry() const;
};

Config default_config();
Config parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
Config load_config(const std::filesystem::path& path);

/// Reads a JSON file; unreadable or malformed files raise DataError naming it.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace twkit::app
