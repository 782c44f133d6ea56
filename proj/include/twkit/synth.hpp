#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "twkit/table.hpp"

namespace twkit {

struct NormalModel {
  double mean = 0.0;
  double sd = 1.0;
};

/// Token -> probability over one categorical attribute's declared codes.
using Distribution = std::map<std::string, double>;

/// Class-conditional feature model. Attributes absent here fall back to the
/// spec's `common` distributions.
struct ClassProfile {
  std::map<std::string, Distribution> categorical;
  std::map<std::string, NormalModel> numeric;
  /// Probability that a categorical feature cell of this class is drawn from
  /// the class-weighted population mixture instead (before couplings).
  double record_noise = 0.0;
};

/// After sampling, `target` is overwritten with mapping[source token] with
/// probability 1 - noise. Source tokens without a mapping leave the target
/// as drawn.
struct CouplingRule {
  std::string source;
  std::string target;
  std::map<std::string, std::string> mapping;
  double noise = 0.0;
};

/// quota: class counts are the largest-remainder apportionment of n by the
/// class weights, in shuffled order. iid: every row draws its class.
enum class ClassSampling { quota, iid };

struct SynthesisSpec {
  std::map<std::string, double> class_weights;
  std::map<std::string, ClassProfile> profiles;
  std::map<std::string, Distribution> common;
  std::vector<CouplingRule> couplings;
  ClassSampling class_sampling = ClassSampling::quota;
  int numeric_decimals = 1;

  /// Throws std::invalid_argument on undeclared tokens, missing classes or
  /// distributions, or probability rows not summing to 1 within 1e-9.
  void validate(const Schema& schema) const;

  nlohmann::json to_json() const;
  static SynthesisSpec from_json(const nlohmann::json& j);
};

/// Class shape of the 1,087-figure Pit No. 1 inventory: 396 RW, 633 AW,
/// 8 CS, 8 CT, 5 HR, 10 MR, 27 LR, with couplings position -> corps and
/// headgear -> hairstyle and heights around 178 cm.
SynthesisSpec default_synthesis_spec();

/// Per-class row counts for n rows under quota sampling, in label order.
std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t n);

/// Draws n complete rows. Byte-deterministic for a fixed (spec, n, seed).
Table synthesize_corpus(const SynthesisSpec& spec, std::size_t n, std::uint64_t seed,
                        SchemaPtr schema = terracotta_schema());

}  // namespace twkit
