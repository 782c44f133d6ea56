#include "twkit/table.hpp"

#include <cmath>
#include <stdexcept>

#include "twkit/error.hpp"

namespace twkit {

std::string to_string(Origin origin) {
  switch (origin) {
    case Origin::real: return "real";
    case Origin::smotenc: return "smotenc";
    case Origin::cgan: return "cgan";
  }
  return "real";
}

Origin origin_from_string(const std::string& text) {
  if (text == "real") return Origin::real;
  if (text == "smotenc") return Origin::smotenc;
  if (text == "cgan") return Origin::cgan;
  throw DataError("unknown origin '" + text + "'");
}

Table::Table(SchemaPtr schema) : schema_(std::move(schema)) {
  if (!schema_) throw std::invalid_argument("Table: null schema");
}

Table::Table(SchemaPtr schema, std::vector<Row> rows) : Table(std::move(schema)) {
  for (const auto& row : rows) validate(row);
  rows_ = std::move(rows);
}

void Table::validate(const Row& row) const {
  if (row.size() != schema_->size()) {
    throw DataError("row has " + std::to_string(row.size()) + " cells, schema has " +
                    std::to_string(schema_->size()) + " attributes");
  }
  for (std::size_t c = 0; c < row.size(); ++c) {
    const auto& spec = schema_->at(c);
    const auto& cell = row[c];
    if (cell.is_missing()) continue;
    if (spec.is_categorical()) {
      if (!cell.is_level() || cell.level() >= spec.level_count()) {
        throw DataError("attribute '" + spec.name + "': invalid categorical cell");
      }
    } else if (!cell.is_number() || !std::isfinite(cell.number())) {
      throw DataError("attribute '" + spec.name + "': invalid numeric cell");
    }
  }
}

void Table::add_row(Row row) {
  validate(row);
  rows_.push_back(std::move(row));
  if (track_origin_) origins_.push_back(Origin::real);
}

void Table::add_row(Row row, Origin origin) {
  validate(row);
  if (!track_origin_) enable_origin();
  rows_.push_back(std::move(row));
  origins_.push_back(origin);
}

void Table::enable_origin() {
  track_origin_ = true;
  if (origins_.size() < rows_.size()) origins_.resize(rows_.size(), Origin::real);
}

void Table::set(std::size_t r, std::size_t c, Cell cell) {
  Row copy = rows_.at(r);
  copy.at(c) = cell;
  validate(copy);
  rows_[r][c] = cell;
}

std::size_t Table::label_of(std::size_t r) const {
  const auto& cell = at(r, schema_->label_index());
  if (!cell.is_level()) throw DataError("row " + std::to_string(r) + ": missing class label");
  return cell.level();
}

std::vector<std::size_t> Table::labels() const {
  std::vector<std::size_t> out(size());
  for (std::size_t r = 0; r < size(); ++r) out[r] = label_of(r);
  return out;
}

bool Table::complete() const {
  for (const auto& row : rows_) {
    for (const auto& cell : row) {
      if (cell.is_missing()) return false;
    }
  }
  return true;
}

bool Table::complete_in(std::span<const std::size_t> columns) const {
  for (const auto& row : rows_) {
    for (std::size_t c : columns) {
      if (row.at(c).is_missing()) return false;
    }
  }
  return true;
}

std::size_t Table::missing_count(std::size_t column) const {
  std::size_t n = 0;
  for (const auto& row : rows_) n += row.at(column).is_missing() ? 1 : 0;
  return n;
}

Table Table::subset(std::span<const std::size_t> row_indices) const {
  Table out(schema_);
  out.track_origin_ = track_origin_;
  out.rows_.reserve(row_indices.size());
  for (std::size_t r : row_indices) {
    out.rows_.push_back(rows_.at(r));
    if (track_origin_) out.origins_.push_back(origins_.at(r));
  }
  return out;
}

Table Table::rows_of_class(std::size_t level) const {
  std::vector<std::size_t> idx;
  for (std::size_t r = 0; r < size(); ++r) {
    if (label_of(r) == level) idx.push_back(r);
  }
  return subset(idx);
}

bool Table::operator==(const Table& other) const {
  if (!(*schema_ == *other.schema_)) return false;
  if (rows_ != other.rows_) return false;
  if (track_origin_ != other.track_origin_) return false;
  return origins_ == other.origins_;
}

MaskMatrix MaskMatrix::of(const Table& table) {
  MaskMatrix m(table.size(), table.width());
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t c = 0; c < table.width(); ++c) {
      m.set(r, c, !table.at(r, c).is_missing());
    }
  }
  return m;
}

std::size_t MaskMatrix::missing_in_column(std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows_; ++r) n += observed(r, c) ? 0 : 1;
  return n;
}

std::vector<std::size_t> class_histogram(const Table& table) {
  std::vector<std::size_t> counts(table.schema().class_count(), 0);
  const std::size_t label = table.schema().label_index();
  for (const auto& row : table.rows()) {
    if (row[label].is_level()) ++counts[row[label].level()];
  }
  return counts;
}

std::map<std::string, std::size_t> class_histogram_by_token(const Table& table) {
  std::map<std::string, std::size_t> out;
  const auto counts = class_histogram(table);
  const auto tokens = table.schema().class_tokens();
  for (std::size_t i = 0; i < tokens.size(); ++i) out[tokens[i]] = counts[i];
  return out;
}

double numeric_value(const AttributeSpec& spec, const Cell& cell) {
  if (cell.is_missing()) throw DataError("attribute '" + spec.name + "': missing cell");
  if (spec.is_categorical()) return spec.categories.at(cell.level()).code;
  return cell.number();
}

}  // namespace twkit
