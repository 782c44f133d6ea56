#include "twkit/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace twkit {

namespace {

// Counts with zero-marginal rows and columns removed.
std::vector<std::vector<double>> trimmed(const ContingencyTable& ct, Warnings* warnings) {
  const std::size_t r = ct.counts.size();
  const std::size_t c = r == 0 ? 0 : ct.counts[0].size();
  std::vector<double> row_sum(r, 0.0), col_sum(c, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      row_sum[i] += ct.counts[i][j];
      col_sum[j] += ct.counts[i][j];
    }
  }
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < r; ++i) {
    if (row_sum[i] > 0.0) rows.push_back(i);
  }
  for (std::size_t j = 0; j < c; ++j) {
    if (col_sum[j] > 0.0) cols.push_back(j);
  }
  if (rows.size() != r || cols.size() != c) {
    warn(warnings, "chi-square: dropped " + std::to_string(r - rows.size()) + " empty row(s) and " +
                       std::to_string(c - cols.size()) + " empty column(s)");
  }
  std::vector<std::vector<double>> out(rows.size(), std::vector<double>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out[i][j] = ct.counts[rows[i]][cols[j]];
  }
  return out;
}

double chi_square_of(const std::vector<std::vector<double>>& g) {
  const std::size_t r = g.size();
  const std::size_t c = g[0].size();
  std::vector<double> row_sum(r, 0.0), col_sum(c, 0.0);
  double n = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      row_sum[i] += g[i][j];
      col_sum[j] += g[i][j];
      n += g[i][j];
    }
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double e = row_sum[i] * col_sum[j] / n;
      chi2 += (g[i][j] - e) * (g[i][j] - e) / e;
    }
  }
  return chi2;
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

ContingencyTable ContingencyTable::from_counts(std::vector<std::vector<double>> counts) {
  if (counts.empty() || counts[0].empty()) throw std::invalid_argument("contingency: empty grid");
  ContingencyTable ct;
  for (const auto& row : counts) {
    if (row.size() != counts[0].size()) throw std::invalid_argument("contingency: ragged grid");
    for (double v : row) {
      if (!(v >= 0.0)) throw std::invalid_argument("contingency: negative or non-finite count");
      ct.n += v;
    }
  }
  if (!(ct.n > 0.0)) throw std::invalid_argument("contingency: grid total is zero");
  for (std::size_t i = 0; i < counts.size(); ++i) ct.row_tokens.push_back(std::to_string(i));
  for (std::size_t j = 0; j < counts[0].size(); ++j) ct.col_tokens.push_back(std::to_string(j));
  ct.counts = std::move(counts);
  return ct;
}

ContingencyTable contingency(const Table& table, const std::string& row_attribute,
                             const std::string& col_attribute) {
  const auto& schema = table.schema();
  const auto a = schema.require(row_attribute);
  const auto b = schema.require(col_attribute);
  for (auto i : {a, b}) {
    if (!schema.at(i).is_categorical()) {
      throw std::invalid_argument("contingency: attribute '" + schema.at(i).name + "' is numeric; bin it first");
    }
  }
  const auto& sa = schema.at(a);
  const auto& sb = schema.at(b);
  std::vector<std::vector<double>> full(sa.level_count(), std::vector<double>(sb.level_count(), 0.0));
  double n = 0.0;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const Cell& x = table.at(r, a);
    const Cell& y = table.at(r, b);
    if (x.is_missing() || y.is_missing()) continue;
    full[x.level()][y.level()] += 1.0;
    n += 1.0;
  }
  if (n == 0.0) {
    throw DataError("contingency: no row has both '" + row_attribute + "' and '" + col_attribute + "'");
  }
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (std::any_of(full[i].begin(), full[i].end(), [](double v) { return v > 0.0; })) rows.push_back(i);
  }
  for (std::size_t j = 0; j < sb.level_count(); ++j) {
    for (std::size_t i = 0; i < full.size(); ++i) {
      if (full[i][j] > 0.0) {
        cols.push_back(j);
        break;
      }
    }
  }
  ContingencyTable ct;
  ct.row_attribute = row_attribute;
  ct.col_attribute = col_attribute;
  ct.n = n;
  for (auto i : rows) ct.row_tokens.push_back(sa.categories[i].token);
  for (auto j : cols) ct.col_tokens.push_back(sb.categories[j].token);
  for (auto i : rows) {
    std::vector<double> row;
    for (auto j : cols) row.push_back(full[i][j]);
    ct.counts.push_back(std::move(row));
  }
  return ct;
}

double chi_square(const ContingencyTable& ct, Warnings* warnings) {
  if (!(ct.n > 0.0)) throw std::invalid_argument("chi-square: empty table");
  const auto g = trimmed(ct, warnings);
  if (g.size() < 2 || g[0].size() < 2) {
    warn(warnings, "chi-square: degenerate " + std::to_string(g.size()) + "x" +
                       std::to_string(g.empty() ? 0 : g[0].size()) + " table; reported as 0");
    return 0.0;
  }
  return chi_square_of(g);
}

double cramers_v(const ContingencyTable& ct, bool bias_corrected, Warnings* warnings) {
  if (!(ct.n > 0.0)) throw std::invalid_argument("cramers_v: empty table");
  const auto g = trimmed(ct, warnings);
  if (g.size() < 2 || g[0].size() < 2) {
    warn(warnings, "cramers_v: degenerate table; reported as 0");
    return 0.0;
  }
  const double chi2 = chi_square_of(g);
  const double n = ct.n;
  const auto r = static_cast<double>(g.size());
  const auto c = static_cast<double>(g[0].size());
  double v = 0.0;
  if (!bias_corrected) {
    v = std::sqrt(chi2 / (n * std::min(r - 1.0, c - 1.0)));
  } else {
    if (n <= 1.0) return 0.0;
    const double phi2 = std::max(0.0, chi2 / n - (r - 1.0) * (c - 1.0) / (n - 1.0));
    const double rc = r - (r - 1.0) * (r - 1.0) / (n - 1.0);
    const double cc = c - (c - 1.0) * (c - 1.0) / (n - 1.0);
    const double denom = std::min(rc - 1.0, cc - 1.0);
    v = denom > 0.0 ? std::sqrt(phi2 / denom) : 0.0;
  }
  return std::clamp(v, 0.0, 1.0);
}

nlohmann::json CorrelationMatrix::to_json() const {
  nlohmann::json rounded = nlohmann::json::array();
  nlohmann::json full = nlohmann::json::array();
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    nlohmann::json a = nlohmann::json::array();
    nlohmann::json b = nlohmann::json::array();
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      a.push_back(round2(values(i, j)));
      b.push_back(values(i, j));
    }
    rounded.push_back(a);
    full.push_back(b);
  }
  return {{"attributes", attributes}, {"matrix", rounded}, {"values", full}};
}

std::vector<std::string> default_correlation_attributes(const Schema& schema) {
  std::vector<std::string> out;
  for (auto i : schema.categorical_feature_indices()) out.push_back(schema.at(i).name);
  return out;
}

CorrelationMatrix correlation_matrix(const Table& table, const std::vector<std::string>& attributes,
                                     bool bias_corrected, Warnings* warnings) {
  if (attributes.empty()) throw std::invalid_argument("correlation matrix: no attributes");
  const auto k = static_cast<Eigen::Index>(attributes.size());
  CorrelationMatrix m;
  m.attributes = attributes;
  m.values = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto self = contingency(table, attributes[static_cast<std::size_t>(i)], attributes[static_cast<std::size_t>(i)]);
    if (self.counts.size() < 2) {
      warn(warnings, "correlation matrix: '" + attributes[static_cast<std::size_t>(i)] +
                         "' is constant; its correlations are undefined and stored as 0");
      continue;
    }
    m.values(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const auto ct = contingency(table, attributes[static_cast<std::size_t>(i)], attributes[static_cast<std::size_t>(j)]);
      const double v = cramers_v(ct, bias_corrected, nullptr);
      m.values(i, j) = v;
      m.values(j, i) = v;
    }
  }
  return m;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty input");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

nlohmann::json BoxStats::to_json() const {
  return {{"n", n},
          {"min", min},
          {"q1", q1},
          {"median", median},
          {"q3", q3},
          {"max", max},
          {"whisker_low", whisker_low},
          {"whisker_high", whisker_high},
          {"outliers", outliers}};
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("box_stats: empty input");
  std::vector<double> v(values.begin(), values.end());
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument("box_stats: non-finite value");
  }
  std::sort(v.begin(), v.end());
  BoxStats b;
  b.n = v.size();
  b.min = v.front();
  b.max = v.back();
  b.q1 = quantile_sorted(v, 0.25);
  b.median = quantile_sorted(v, 0.5);
  b.q3 = quantile_sorted(v, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      b.outliers.push_back(x);
    } else {
      b.whisker_low = std::min(b.whisker_low, x);
      b.whisker_high = std::max(b.whisker_high, x);
    }
  }
  return b;
}

nlohmann::json ViolinStats::to_json() const {
  return {{"bandwidth", bandwidth}, {"min", min},   {"q1", q1},           {"median", median},
          {"q3", q3},               {"max", max},   {"grid", grid},       {"density", density}};
}

double scott_bandwidth(std::span<const double> values) {
  return sample_sd(values) * std::pow(static_cast<double>(values.size()), -0.2);
}

double kde_density(std::span<const double> values, double bandwidth, double x) {
  if (values.empty()) throw std::invalid_argument("kde: empty input");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kde: bandwidth must be > 0");
  double s = 0.0;
  for (double v : values) {
    const double z = (x - v) / bandwidth;
    s += std::exp(-0.5 * z * z);
  }
  return s / (static_cast<double>(values.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
}

ViolinStats kde(std::span<const double> values, std::optional<double> bandwidth, std::size_t grid_size) {
  if (values.empty()) throw std::invalid_argument("kde: empty input");
  if (grid_size < 2) throw std::invalid_argument("kde: grid_size must be >= 2");
  const BoxStats box = box_stats(values);
  ViolinStats out;
  out.min = box.min;
  out.q1 = box.q1;
  out.median = box.median;
  out.q3 = box.q3;
  out.max = box.max;
  double h = bandwidth ? *bandwidth : scott_bandwidth(values);
  if (!bandwidth && !(h > 0.0)) h = kDegenerateBandwidth;
  if (!(h > 0.0)) throw std::invalid_argument("kde: bandwidth must be > 0");
  out.bandwidth = h;
  const double lo = box.min - 3.0 * h;
  const double hi = box.max + 3.0 * h;
  const double step = (hi - lo) / static_cast<double>(grid_size - 1);
  out.grid.resize(grid_size);
  out.density.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    out.grid[i] = i + 1 == grid_size ? hi : lo + step * static_cast<double>(i);
    out.density[i] = kde_density(values, h, out.grid[i]);
  }
  double area = 0.0;
  for (std::size_t i = 1; i < grid_size; ++i) {
    area += 0.5 * (out.density[i] + out.density[i - 1]) * (out.grid[i] - out.grid[i - 1]);
  }
  for (double& d : out.density) d /= area;
  return out;
}

std::vector<ClassGroup> group_by_class(const Table& table, const std::string& attribute) {
  const auto& schema = table.schema();
  const auto a = schema.require(attribute);
  const auto& spec = schema.at(a);
  std::vector<ClassGroup> out;
  for (const auto& t : schema.class_tokens()) out.push_back(ClassGroup{t, {}});
  const auto label = schema.label_index();
  for (std::size_t r = 0; r < table.size(); ++r) {
    const Cell& cell = table.at(r, a);
    if (cell.is_missing() || table.at(r, label).is_missing()) continue;
    out[table.at(r, label).level()].values.push_back(numeric_value(spec, cell));
  }
  return out;
}

}  // namespace twkit
