#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "twkit/block.hpp"
#include "twkit/table.hpp"

namespace twkit {

/// Descriptor of the encoded columns produced for one attribute.
struct ColumnGroup {
  std::size_t attribute = 0;  // index in the schema
  std::string name;
  AttributeKind kind = AttributeKind::categorical;
  std::size_t offset = 0;
  std::size_t width = 0;
  std::vector<std::string> tokens;  // categorical: code order of the one-hot block
  double min = 0.0;                 // numeric: recorded range
  double max = 0.0;

  bool operator==(const ColumnGroup&) const = default;
};

/// Invertible numeric embedding of selected table columns: categorical
/// attributes become one-hot blocks, numeric attributes are min-max scaled
/// into [0, 1]. A constant numeric column encodes to 0.5.
class Codec {
 public:
  Codec() = default;
  explicit Codec(std::vector<ColumnGroup> groups);

  /// Records code orders and numeric ranges (over observed cells).
  static Codec fit(const Table& table, std::span<const std::size_t> attributes);
  static Codec fit_all(const Table& table);
  static Codec fit_features(const Table& table);

  std::size_t width() const { return width_; }
  const std::vector<ColumnGroup>& groups() const { return groups_; }
  /// One block per categorical group, in column order.
  std::vector<Block> categorical_blocks() const;
  std::vector<std::size_t> attributes() const;
  const ColumnGroup* group_for(std::size_t attribute) const;

  /// Throws DataError unless every group names a schema attribute of the
  /// same kind and code list.
  void check_compatible(const Schema& schema) const;

  double scale(const ColumnGroup& g, double value) const;
  double unscale(const ColumnGroup& g, double scaled) const;

  nlohmann::json to_json() const;
  static Codec from_json(const nlohmann::json& j);

  bool operator==(const Codec&) const = default;

 private:
  std::vector<ColumnGroup> groups_;
  std::size_t width_ = 0;
};

/// Encoded values plus a mask aligned column-for-column (1 = observed).
/// Missing cells encode as an all-zero block with mask 0.
struct EncodedMatrix {
  Eigen::MatrixXd values;
  Eigen::MatrixXd mask;
  Codec codec;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

/// Encodes with a codec fitted on all attributes of `table`.
EncodedMatrix encode(const Table& table);
/// Encodes reusing `codec`. Numeric values outside the codec range are
/// clamped, or rejected with DataError when `strict`.
EncodedMatrix encode(const Table& table, const Codec& codec, bool strict = false);

/// Decodes one encoded row: argmax within each categorical block (ties to
/// the lowest code), numeric clamped to [0, 1] and unscaled. Attributes not
/// covered by the codec are left missing.
Row decode_row(std::span<const double> values, const Codec& codec, const Schema& schema);

/// Inverse of encode: cells whose mask is 0 decode as missing.
Table decode(const EncodedMatrix& encoded, SchemaPtr schema);
/// Decodes every row of `values`, ignoring masks.
Table decode_values(const Eigen::MatrixXd& values, const Codec& codec, SchemaPtr schema);

}  // namespace twkit
