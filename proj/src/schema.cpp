#include "twkit/schema.hpp"

#include <set>
#include <stdexcept>

namespace twkit {

std::optional<std::size_t> AttributeSpec::level_of(std::string_view token) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i].token == token) return i;
  }
  return std::nullopt;
}

Schema::Schema(std::vector<AttributeSpec> attributes, int version)
    : attributes_(std::move(attributes)), version_(version) {
  std::set<std::string> names;
  std::size_t labels = 0;
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    const auto& a = attributes_[i];
    if (a.name.empty()) throw std::invalid_argument("schema: attribute with empty name");
    if (!names.insert(a.name).second) {
      throw std::invalid_argument("schema: duplicate attribute name '" + a.name + "'");
    }
    if (a.is_categorical()) {
      if (a.categories.size() < 2) {
        throw std::invalid_argument("schema: categorical attribute '" + a.name +
                                    "' needs at least two codes");
      }
      std::set<std::string> tokens;
      std::set<int> codes;
      for (const auto& c : a.categories) {
        if (!tokens.insert(c.token).second || !codes.insert(c.code).second) {
          throw std::invalid_argument("schema: duplicate code in attribute '" + a.name + "'");
        }
      }
    } else if (!a.categories.empty()) {
      throw std::invalid_argument("schema: numeric attribute '" + a.name + "' declares codes");
    }
    if (a.role == AttributeRole::label) {
      ++labels;
      label_index_ = i;
      if (!a.is_categorical()) {
        throw std::invalid_argument("schema: label attribute must be categorical");
      }
    }
  }
  if (labels != 1) throw std::invalid_argument("schema: exactly one label attribute required");
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::require(std::string_view name) const {
  if (auto i = index_of(name)) return *i;
  throw std::invalid_argument("unknown attribute '" + std::string(name) + "'");
}

std::vector<std::string> Schema::class_tokens() const {
  std::vector<std::string> out;
  for (const auto& c : label().categories) out.push_back(c.token);
  return out;
}

std::vector<std::size_t> Schema::feature_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].role == AttributeRole::feature) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Schema::categorical_feature_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i : feature_indices()) {
    if (attributes_[i].is_categorical()) out.push_back(i);
  }
  return out;
}

bool Schema::operator==(const Schema& other) const {
  if (attributes_.size() != other.attributes_.size()) return false;
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    const auto& a = attributes_[i];
    const auto& b = other.attributes_[i];
    if (a.name != b.name || a.kind != b.kind || a.role != b.role) return false;
    if (a.categories.size() != b.categories.size()) return false;
    for (std::size_t j = 0; j < a.categories.size(); ++j) {
      if (a.categories[j].token != b.categories[j].token ||
          a.categories[j].code != b.categories[j].code) {
        return false;
      }
    }
  }
  return true;
}

namespace {

AttributeSpec categorical(std::string name, std::vector<Category> cats, std::string description,
                          AttributeRole role = AttributeRole::feature) {
  AttributeSpec a;
  a.name = std::move(name);
  a.kind = AttributeKind::categorical;
  a.categories = std::move(cats);
  a.role = role;
  a.description = std::move(description);
  return a;
}

Category numbered(int code, std::string label = {}) {
  return Category{code, std::to_string(code), std::move(label)};
}

}  // namespace

SchemaPtr terracotta_schema() {
  static const SchemaPtr schema = [] {
    std::vector<AttributeSpec> attrs;

    // Corridors 1..11 plus the "K" annotation, plotted at 0.
    std::vector<Category> corridors{Category{0, "K", "K"}};
    for (int i = 1; i <= 11; ++i) corridors.push_back(numbered(i, "corridor " + std::to_string(i)));
    attrs.push_back(categorical("c_id", std::move(corridors), "The ith corridor."));

    attrs.push_back(categorical("t_id",
                                {numbered(1), numbered(2), numbered(10), numbered(19), numbered(20)},
                                "The ith trench."));
    attrs.push_back(categorical("corps", {numbered(0, "chariot soldier"), numbered(1, "infantryman")},
                                "The army class to which the TW belongs."));
    attrs.push_back(categorical(
        "position",
        {numbered(0, "following vehicles"), numbered(1, "independent"), numbered(2, "onboard")},
        "The military formation's location where the TW is situated."));

    AttributeSpec height;
    height.name = "height";
    height.kind = AttributeKind::numeric;
    height.unit = "centimeters";
    height.description = "The height (foot to head) of the TW.";
    attrs.push_back(height);

    attrs.push_back(categorical("weapon",
                                {numbered(0, "archery"), numbered(1, "long weapons"),
                                 numbered(2, "swords"), numbered(3, "none")},
                                "The weapons that the TW held."));
    attrs.push_back(categorical("hairstyle", {numbered(0, "cone bun"), numbered(1, "flat bun")},
                                "The hairstyle which the TW held."));
    attrs.push_back(categorical("headgear",
                                {numbered(0, "double-plate crown"), numbered(1, "single-plate crown"),
                                 numbered(2, "He crown"), numbered(3, "none"), numbered(4, "hood")},
                                "The headgear which the TW held."));
    attrs.push_back(categorical("robe_num", {numbered(1), numbered(2)},
                                "The robe layers number which the TW dressed."));
    attrs.push_back(categorical("armor_type",
                                {numbered(0, "type III B"), numbered(1, "none"), numbered(2, "type I A"),
                                 numbered(3, "type II A"), numbered(4, "type II B"),
                                 numbered(5, "type I B"), numbered(6, "type III A")},
                                "The armor type which the TW dressed."));
    attrs.push_back(categorical("tw_class",
                                {Category{0, "RW", "Robed Warrior"}, Category{1, "AW", "Armored Warrior"},
                                 Category{2, "CS", "Charioteer"},
                                 Category{3, "CT", "Chariot Soldier on Right"},
                                 Category{4, "HR", "High-Ranking Official"},
                                 Category{5, "MR", "Middle-Ranking Official"},
                                 Category{6, "LR", "Low-Ranking Official"}},
                                "The class to which the TW belongs.", AttributeRole::label));
    return std::make_shared<const Schema>(std::move(attrs), 1);
  }();
  return schema;
}

}  // namespace twkit
