#include "twkit/codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twkit/error.hpp"

namespace twkit {

namespace {

// Decoded numerics are snapped to this grid so that decode(encode(v)) == v
// for any value with at most six decimals.
constexpr double kNumericResolution = 1e6;

double snap(double v) {
  if (std::fabs(v) >= 1e9) return v;
  return std::round(v * kNumericResolution) / kNumericResolution;
}

}  // namespace

Codec::Codec(std::vector<ColumnGroup> groups) : groups_(std::move(groups)) {
  width_ = 0;
  for (auto& g : groups_) {
    g.offset = width_;
    g.width = g.kind == AttributeKind::categorical ? g.tokens.size() : 1;
    width_ += g.width;
  }
}

Codec Codec::fit(const Table& table, std::span<const std::size_t> attributes) {
  const auto& schema = table.schema();
  std::vector<ColumnGroup> groups;
  for (std::size_t a : attributes) {
    const auto& spec = schema.at(a);
    ColumnGroup g;
    g.attribute = a;
    g.name = spec.name;
    g.kind = spec.kind;
    if (spec.is_categorical()) {
      for (const auto& c : spec.categories) g.tokens.push_back(c.token);
    } else {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& row : table.rows()) {
        if (row[a].is_missing()) continue;
        lo = std::min(lo, row[a].number());
        hi = std::max(hi, row[a].number());
      }
      if (!std::isfinite(lo)) lo = hi = 0.0;  // column entirely missing
      g.min = lo;
      g.max = hi;
    }
    groups.push_back(std::move(g));
  }
  return Codec(std::move(groups));
}

Codec Codec::fit_all(const Table& table) {
  std::vector<std::size_t> all(table.width());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return fit(table, all);
}

Codec Codec::fit_features(const Table& table) {
  const auto features = table.schema().feature_indices();
  return fit(table, features);
}

std::vector<Block> Codec::categorical_blocks() const {
  std::vector<Block> out;
  for (const auto& g : groups_) {
    if (g.kind == AttributeKind::categorical) out.push_back(Block{g.offset, g.width});
  }
  return out;
}

std::vector<std::size_t> Codec::attributes() const {
  std::vector<std::size_t> out;
  for (const auto& g : groups_) out.push_back(g.attribute);
  return out;
}

const ColumnGroup* Codec::group_for(std::size_t attribute) const {
  for (const auto& g : groups_) {
    if (g.attribute == attribute) return &g;
  }
  return nullptr;
}

void Codec::check_compatible(const Schema& schema) const {
  for (const auto& g : groups_) {
    if (g.attribute >= schema.size() || schema.at(g.attribute).name != g.name) {
      throw DataError("codec mismatch: attribute '" + g.name + "' not at its recorded position");
    }
    const auto& spec = schema.at(g.attribute);
    if (spec.kind != g.kind) throw DataError("codec mismatch: kind of '" + g.name + "' differs");
    if (spec.is_categorical()) {
      if (spec.categories.size() != g.tokens.size()) {
        throw DataError("codec mismatch: code list of '" + g.name + "' differs");
      }
      for (std::size_t i = 0; i < g.tokens.size(); ++i) {
        if (spec.categories[i].token != g.tokens[i]) {
          throw DataError("codec mismatch: code order of '" + g.name + "' differs");
        }
      }
    }
  }
}

double Codec::scale(const ColumnGroup& g, double value) const {
  if (g.max == g.min) return 0.5;
  return (value - g.min) / (g.max - g.min);
}

double Codec::unscale(const ColumnGroup& g, double scaled) const {
  if (g.max == g.min) return g.min;
  return snap(g.min + std::clamp(scaled, 0.0, 1.0) * (g.max - g.min));
}

nlohmann::json Codec::to_json() const {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : groups_) {
    nlohmann::json j{{"attribute", g.attribute}, {"name", g.name}};
    if (g.kind == AttributeKind::categorical) {
      j["kind"] = "categorical";
      j["codes"] = g.tokens;
    } else {
      j["kind"] = "numeric";
      j["min"] = g.min;
      j["max"] = g.max;
    }
    groups.push_back(std::move(j));
  }
  return nlohmann::json{{"groups", groups}};
}

Codec Codec::from_json(const nlohmann::json& j) {
  std::vector<ColumnGroup> groups;
  for (const auto& gj : j.at("groups")) {
    ColumnGroup g;
    g.attribute = gj.at("attribute").get<std::size_t>();
    g.name = gj.at("name").get<std::string>();
    const auto kind = gj.at("kind").get<std::string>();
    if (kind == "categorical") {
      g.kind = AttributeKind::categorical;
      g.tokens = gj.at("codes").get<std::vector<std::string>>();
    } else if (kind == "numeric") {
      g.kind = AttributeKind::numeric;
      g.min = gj.at("min").get<double>();
      g.max = gj.at("max").get<double>();
    } else {
      throw DataError("codec: unknown group kind '" + kind + "'");
    }
    groups.push_back(std::move(g));
  }
  return Codec(std::move(groups));
}

EncodedMatrix encode(const Table& table) { return encode(table, Codec::fit_all(table)); }

EncodedMatrix encode(const Table& table, const Codec& codec, bool strict) {
  codec.check_compatible(table.schema());
  const auto n = static_cast<Eigen::Index>(table.size());
  const auto d = static_cast<Eigen::Index>(codec.width());
  EncodedMatrix out{Eigen::MatrixXd::Zero(n, d), Eigen::MatrixXd::Zero(n, d), codec};
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = table.row(static_cast<std::size_t>(r));
    for (const auto& g : codec.groups()) {
      const Cell& cell = row[g.attribute];
      if (cell.is_missing()) continue;
      const auto off = static_cast<Eigen::Index>(g.offset);
      out.mask.block(r, off, 1, static_cast<Eigen::Index>(g.width)).setOnes();
      if (g.kind == AttributeKind::categorical) {
        out.values(r, off + static_cast<Eigen::Index>(cell.level())) = 1.0;
      } else {
        double v = codec.scale(g, cell.number());
        if (v < 0.0 || v > 1.0) {
          if (strict) {
            throw DataError("attribute '" + g.name + "': value " + std::to_string(cell.number()) +
                            " outside codec range [" + std::to_string(g.min) + ", " +
                            std::to_string(g.max) + "]");
          }
          v = std::clamp(v, 0.0, 1.0);
        }
        out.values(r, off) = v;
      }
    }
  }
  return out;
}

Row decode_row(std::span<const double> values, const Codec& codec, const Schema& schema) {
  Row row(schema.size());
  for (const auto& g : codec.groups()) {
    if (g.kind == AttributeKind::categorical) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < g.width; ++k) {
        if (values[g.offset + k] > values[g.offset + best]) best = k;
      }
      row[g.attribute] = Cell::level(best);
    } else {
      row[g.attribute] = Cell::number(codec.unscale(g, values[g.offset]));
    }
  }
  return row;
}

namespace {

std::vector<double> row_of(const Eigen::MatrixXd& m, Eigen::Index r) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(r, c);
  return out;
}

}  // namespace

Table decode(const EncodedMatrix& encoded, SchemaPtr schema) {
  encoded.codec.check_compatible(*schema);
  Table out(schema);
  for (Eigen::Index r = 0; r < encoded.rows(); ++r) {
    Row row = decode_row(row_of(encoded.values, r), encoded.codec, *schema);
    for (const auto& g : encoded.codec.groups()) {
      if (encoded.mask(r, static_cast<Eigen::Index>(g.offset)) == 0.0) row[g.attribute] = Cell::missing();
    }
    out.add_row(std::move(row));
  }
  return out;
}

Table decode_values(const Eigen::MatrixXd& values, const Codec& codec, SchemaPtr schema) {
  codec.check_compatible(*schema);
  Table out(schema);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    out.add_row(decode_row(row_of(values, r), codec, *schema));
  }
  return out;
}

}  // namespace twkit
