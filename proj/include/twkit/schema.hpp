#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace twkit {

enum class AttributeKind { categorical, numeric };
enum class AttributeRole { feature, label };

/// One declared value of a categorical attribute.
///
/// `token` is the CSV spelling, `code` the integer used when a categorical is
/// plotted on a numeric axis, `label` the human-readable meaning.
struct Category {
  int code = 0;
  std::string token;
  std::string label;
};

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::categorical;
  std::vector<Category> categories;  // categorical only, in declared order
  std::string unit;                  // numeric only
  AttributeRole role = AttributeRole::feature;
  std::string description;

  bool is_categorical() const { return kind == AttributeKind::categorical; }
  bool is_numeric() const { return kind == AttributeKind::numeric; }
  std::size_t level_count() const { return categories.size(); }

  /// Position of `token` in `categories`, if declared.
  std::optional<std::size_t> level_of(std::string_view token) const;
};

/// Ordered attribute list with exactly one label attribute.
class Schema {
 public:
  explicit Schema(std::vector<AttributeSpec> attributes, int version = 1);

  const std::vector<AttributeSpec>& attributes() const { return attributes_; }
  std::size_t size() const { return attributes_.size(); }
  const AttributeSpec& at(std::size_t i) const { return attributes_.at(i); }
  int version() const { return version_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  /// index_of or throw std::invalid_argument naming the attribute.
  std::size_t require(std::string_view name) const;

  std::size_t label_index() const { return label_index_; }
  const AttributeSpec& label() const { return attributes_[label_index_]; }
  std::size_t class_count() const { return label().level_count(); }
  std::vector<std::string> class_tokens() const;

  /// Indices of all attributes with role = feature, in schema order.
  std::vector<std::size_t> feature_indices() const;
  std::vector<std::size_t> categorical_feature_indices() const;

  bool operator==(const Schema& other) const;

 private:
  std::vector<AttributeSpec> attributes_;
  int version_;
  std::size_t label_index_ = 0;
};

using SchemaPtr = std::shared_ptr<const Schema>;

/// The warrior attribute table: c_id, t_id, corps, position, height, weapon,
/// hairstyle, headgear, robe_num, armor_type and the tw_class label.
SchemaPtr terracotta_schema();

}  // namespace twkit
