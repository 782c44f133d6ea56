#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "twkit/error.hpp"
#include "twkit/table.hpp"

namespace twkit {

struct ContingencyTable {
  std::string row_attribute;
  std::string col_attribute;
  std::vector<std::string> row_tokens;
  std::vector<std::string> col_tokens;
  std::vector<std::vector<double>> counts;  // [row][col]
  double n = 0.0;

  /// Unlabelled table from a count grid; throws std::invalid_argument on a
  /// ragged or negative grid or a zero total.
  static ContingencyTable from_counts(std::vector<std::vector<double>> counts);
};

/// Cross-tabulation of two categorical attributes over the codes observed in
/// rows that have both cells. Throws std::invalid_argument for a numeric
/// attribute and DataError when no row has both cells.
ContingencyTable contingency(const Table& table, const std::string& row_attribute,
                             const std::string& col_attribute);

/// Pearson chi-square with expected = row * col / n. Zero marginals are
/// dropped with a warning; a table left with a single row or column gives 0
/// and a warning.
double chi_square(const ContingencyTable& ct, Warnings* warnings = nullptr);

/// sqrt(chi2 / (n * min(r - 1, c - 1))), or the small-sample bias-corrected
/// variant when `bias_corrected`. Degenerate tables give 0.
double cramers_v(const ContingencyTable& ct, bool bias_corrected = false, Warnings* warnings = nullptr);

struct CorrelationMatrix {
  std::vector<std::string> attributes;
  Eigen::MatrixXd values;

  /// "attributes", "matrix" rounded to 2 decimals, "values" at full precision.
  nlohmann::json to_json() const;
};

/// Categorical feature names in schema order (the numeric height is left out).
std::vector<std::string> default_correlation_attributes(const Schema& schema);

/// Pairwise Cramer's V. The diagonal is 1, except for constant attributes,
/// which get 0 and a warning.
CorrelationMatrix correlation_matrix(const Table& table, const std::vector<std::string>& attributes,
                                     bool bias_corrected = false, Warnings* warnings = nullptr);

/// Type-7 sample quantile (linear interpolation between order statistics at
/// h = (n - 1) p) of sorted values.
double quantile_sorted(std::span<const double> sorted, double p);

struct BoxStats {
  std::size_t n = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double whisker_low = 0.0;   // smallest value >= q1 - 1.5 IQR, at most q1
  double whisker_high = 0.0;  // largest value <= q3 + 1.5 IQR, at least q3
  std::vector<double> outliers;  // ascending

  nlohmann::json to_json() const;
};

BoxStats box_stats(std::span<const double> values);

struct ViolinStats {
  double bandwidth = 0.0;
  std::vector<double> grid;
  std::vector<double> density;  // renormalized so the trapezoid integral is 1
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;

  nlohmann::json to_json() const;
};

/// Scott's rule sigma * n^(-1/5) with the sample standard deviation; 0 when
/// all values are equal.
double scott_bandwidth(std::span<const double> values);

/// Raw Gaussian kernel density at x.
double kde_density(std::span<const double> values, double bandwidth, double x);

/// Gaussian KDE on grid_size uniform points over [min - 3h, max + 3h]. With
/// no bandwidth given, Scott's rule is used, and a sample without spread
/// falls back to h = kDegenerateBandwidth.
ViolinStats kde(std::span<const double> values, std::optional<double> bandwidth = std::nullopt,
                std::size_t grid_size = 200);

inline constexpr double kDegenerateBandwidth = 0.1;

struct ClassGroup {
  std::string cls;
  std::vector<double> values;
};

/// Non-missing values of `attribute` per class in label order (every class
/// is present, possibly empty). Categorical cells become their codes.
std::vector<ClassGroup> group_by_class(const Table& table, const std::string& attribute);

}  // namespace twkit
