#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twkit/schema.hpp"

namespace twkit {

/// A single table cell: a categorical level index, a numeric value, or missing.
///
/// Categorical cells store the position of the code in the attribute's
/// declared category list, not the code itself.
class Cell {
 public:
  Cell() = default;
  static Cell missing() { return Cell{}; }
  static Cell level(std::size_t index) { return Cell{Kind::level, static_cast<double>(index)}; }
  static Cell number(double value) { return Cell{Kind::number, value}; }

  bool is_missing() const { return kind_ == Kind::missing; }
  bool is_level() const { return kind_ == Kind::level; }
  bool is_number() const { return kind_ == Kind::number; }

  std::size_t level() const { return static_cast<std::size_t>(value_); }
  double number() const { return value_; }

  bool operator==(const Cell& other) const {
    return kind_ == other.kind_ && (kind_ == Kind::missing || value_ == other.value_);
  }

 private:
  enum class Kind : std::uint8_t { missing, level, number };
  Cell(Kind kind, double value) : kind_(kind), value_(value) {}
  Kind kind_ = Kind::missing;
  double value_ = 0.0;
};

using Row = std::vector<Cell>;

/// Provenance of a row in an augmented table.
enum class Origin { real, smotenc, cgan };
std::string to_string(Origin origin);
Origin origin_from_string(const std::string& text);

/// Row-major mixed-type table bound to a schema. Every row is validated on
/// insertion: one cell per attribute, kinds matching, levels declared.
class Table {
 public:
  explicit Table(SchemaPtr schema);
  Table(SchemaPtr schema, std::vector<Row> rows);

  const Schema& schema() const { return *schema_; }
  const SchemaPtr& schema_ptr() const { return schema_; }

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  std::size_t width() const { return schema_->size(); }

  const std::vector<Row>& rows() const { return rows_; }
  const Row& row(std::size_t r) const { return rows_.at(r); }
  const Cell& at(std::size_t r, std::size_t c) const { return rows_.at(r).at(c); }

  void add_row(Row row);
  void add_row(Row row, Origin origin);
  void set(std::size_t r, std::size_t c, Cell cell);

  /// Label level of row r; throws DataError if the label is missing.
  std::size_t label_of(std::size_t r) const;
  std::vector<std::size_t> labels() const;

  bool has_origin() const { return track_origin_; }
  Origin origin(std::size_t r) const { return track_origin_ ? origins_.at(r) : Origin::real; }
  /// Start tracking row origins; existing rows become Origin::real.
  void enable_origin();

  bool complete() const;
  bool complete_in(std::span<const std::size_t> columns) const;
  std::size_t missing_count(std::size_t column) const;

  /// Rows selected by index, in the given order.
  Table subset(std::span<const std::size_t> row_indices) const;
  /// Rows whose label equals `level`.
  Table rows_of_class(std::size_t level) const;

  /// Validates a row against the schema, throwing DataError on mismatch.
  void validate(const Row& row) const;

  bool operator==(const Table& other) const;

 private:
  SchemaPtr schema_;
  std::vector<Row> rows_;
  std::vector<Origin> origins_;
  bool track_origin_ = false;
};

/// Observed (1) / missing (0) indicator per cell, n_rows x n_attributes.
class MaskMatrix {
 public:
  MaskMatrix() = default;
  MaskMatrix(std::size_t rows, std::size_t cols, std::uint8_t fill = 1)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static MaskMatrix of(const Table& table);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool observed(std::size_t r, std::size_t c) const { return data_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool observed) { data_[r * cols_ + c] = observed ? 1 : 0; }
  std::size_t missing_in_column(std::size_t c) const;

  bool operator==(const MaskMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Per-class row counts in label order; absent classes report 0.
std::vector<std::size_t> class_histogram(const Table& table);
std::map<std::string, std::size_t> class_histogram_by_token(const Table& table);

/// Plot/analysis value of a cell: the declared code for categoricals, the
/// value for numerics.
double numeric_value(const AttributeSpec& spec, const Cell& cell);

}  // namespace twkit
