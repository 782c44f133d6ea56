#include "twkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "twkit/rng.hpp"

namespace twkit {

namespace {

constexpr double kProbabilityTolerance = 1e-9;

const char* const kDefaultSpecJson =
#include "default_synthesis.inc"
    ;

const Distribution* find_distribution(const SynthesisSpec& spec, const std::string& cls,
                                      const std::string& attr) {
  auto p = spec.profiles.find(cls);
  if (p != spec.profiles.end()) {
    auto d = p->second.categorical.find(attr);
    if (d != p->second.categorical.end()) return &d->second;
  }
  auto c = spec.common.find(attr);
  return c == spec.common.end() ? nullptr : &c->second;
}

// Probabilities in declared code order.
std::vector<double> weights_in_order(const AttributeSpec& attr, const Distribution& dist) {
  std::vector<double> w(attr.level_count(), 0.0);
  for (const auto& [token, p] : dist) {
    auto level = attr.level_of(token);
    if (!level) {
      throw std::invalid_argument("synthesis spec: attribute '" + attr.name +
                                  "' has no code '" + token + "'");
    }
    w[*level] = p;
  }
  return w;
}

void check_normalized(const std::vector<double>& w, const std::string& what) {
  double sum = 0.0;
  for (double p : w) {
    if (!(p >= 0.0)) throw std::invalid_argument("synthesis spec: negative probability in " + what);
    sum += p;
  }
  if (std::fabs(sum - 1.0) > kProbabilityTolerance) {
    throw std::invalid_argument("synthesis spec: " + what + " sums to " + std::to_string(sum));
  }
}

nlohmann::json distribution_json(const Distribution& d) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : d) j[k] = v;
  return j;
}

Distribution distribution_from(const nlohmann::json& j) {
  Distribution d;
  for (auto it = j.begin(); it != j.end(); ++it) d[it.key()] = it.value().get<double>();
  return d;
}

}  // namespace

void SynthesisSpec::validate(const Schema& schema) const {
  const auto& label = schema.label();
  std::vector<double> cw(label.level_count(), 0.0);
  for (const auto& [token, p] : class_weights) {
    auto level = label.level_of(token);
    if (!level) throw std::invalid_argument("synthesis spec: unknown class '" + token + "'");
    cw[*level] = p;
  }
  for (std::size_t c = 0; c < cw.size(); ++c) {
    if (!class_weights.contains(label.categories[c].token)) {
      throw std::invalid_argument("synthesis spec: class_weights lacks '" + label.categories[c].token + "'");
    }
  }
  check_normalized(cw, "class_weights");

  for (const auto& [cls, profile] : profiles) {
    if (!label.level_of(cls)) throw std::invalid_argument("synthesis spec: profile for unknown class '" + cls + "'");
    if (!(profile.record_noise >= 0.0 && profile.record_noise <= 1.0)) {
      throw std::invalid_argument("synthesis spec: record_noise of class '" + cls + "' must be in [0, 1]");
    }
    for (const auto& [attr, model] : profile.numeric) {
      auto idx = schema.index_of(attr);
      if (!idx || !schema.at(*idx).is_numeric()) {
        throw std::invalid_argument("synthesis spec: '" + attr + "' is not a numeric attribute");
      }
      if (!(model.sd >= 0.0)) throw std::invalid_argument("synthesis spec: negative sd for '" + attr + "'");
    }
  }
  for (const auto& cat : label.categories) {
    for (std::size_t a : schema.feature_indices()) {
      const auto& attr = schema.at(a);
      if (attr.is_categorical()) {
        const Distribution* d = find_distribution(*this, cat.token, attr.name);
        if (d == nullptr) {
          throw std::invalid_argument("synthesis spec: no distribution for '" + attr.name +
                                      "' in class '" + cat.token + "'");
        }
        check_normalized(weights_in_order(attr, *d), cat.token + "/" + attr.name);
      } else {
        auto p = profiles.find(cat.token);
        if (p == profiles.end() || !p->second.numeric.contains(attr.name)) {
          throw std::invalid_argument("synthesis spec: no numeric model for '" + attr.name +
                                      "' in class '" + cat.token + "'");
        }
      }
    }
  }
  for (const auto& rule : couplings) {
    const auto& src = schema.at(schema.require(rule.source));
    const auto& dst = schema.at(schema.require(rule.target));
    if (!src.is_categorical() || !dst.is_categorical()) {
      throw std::invalid_argument("synthesis spec: couplings link categorical attributes only");
    }
    for (const auto& [from, to] : rule.mapping) {
      if (!src.level_of(from) || !dst.level_of(to)) {
        throw std::invalid_argument("synthesis spec: coupling " + rule.source + "->" + rule.target +
                                    " uses undeclared code");
      }
    }
    if (!(rule.noise >= 0.0 && rule.noise <= 1.0)) {
      throw std::invalid_argument("synthesis spec: coupling noise outside [0, 1]");
    }
  }
}

nlohmann::json SynthesisSpec::to_json() const {
  nlohmann::json j;
  j["class_sampling"] = class_sampling == ClassSampling::quota ? "quota" : "iid";
  j["numeric_decimals"] = numeric_decimals;
  j["class_weights"] = nlohmann::json::object();
  for (const auto& [k, v] : class_weights) j["class_weights"][k] = v;
  j["common"] = nlohmann::json::object();
  for (const auto& [k, d] : common) j["common"][k] = distribution_json(d);
  j["profiles"] = nlohmann::json::object();
  for (const auto& [cls, p] : profiles) {
    nlohmann::json pj{{"categorical", nlohmann::json::object()}, {"numeric", nlohmann::json::object()}};
    for (const auto& [k, d] : p.categorical) pj["categorical"][k] = distribution_json(d);
    for (const auto& [k, m] : p.numeric) pj["numeric"][k] = {{"mean", m.mean}, {"sd", m.sd}};
    if (p.record_noise != 0.0) pj["record_noise"] = p.record_noise;
    j["profiles"][cls] = pj;
  }
  j["couplings"] = nlohmann::json::array();
  for (const auto& r : couplings) {
    nlohmann::json rj{{"source", r.source}, {"target", r.target}, {"noise", r.noise}};
    rj["mapping"] = nlohmann::json::object();
    for (const auto& [k, v] : r.mapping) rj["mapping"][k] = v;
    j["couplings"].push_back(rj);
  }
  return j;
}

SynthesisSpec SynthesisSpec::from_json(const nlohmann::json& j) {
  SynthesisSpec s;
  const auto sampling = j.value("class_sampling", std::string("quota"));
  if (sampling == "quota") {
    s.class_sampling = ClassSampling::quota;
  } else if (sampling == "iid") {
    s.class_sampling = ClassSampling::iid;
  } else {
    throw std::invalid_argument("synthesis spec: unknown class_sampling '" + sampling + "'");
  }
  s.numeric_decimals = j.value("numeric_decimals", 1);
  for (auto it = j.at("class_weights").begin(); it != j.at("class_weights").end(); ++it) {
    s.class_weights[it.key()] = it.value().get<double>();
  }
  if (j.contains("common")) {
    for (auto it = j["common"].begin(); it != j["common"].end(); ++it) {
      s.common[it.key()] = distribution_from(it.value());
    }
  }
  for (auto it = j.at("profiles").begin(); it != j.at("profiles").end(); ++it) {
    ClassProfile p;
    const auto& pj = it.value();
    if (pj.contains("categorical")) {
      for (auto c = pj["categorical"].begin(); c != pj["categorical"].end(); ++c) {
        p.categorical[c.key()] = distribution_from(c.value());
      }
    }
    if (pj.contains("numeric")) {
      for (auto c = pj["numeric"].begin(); c != pj["numeric"].end(); ++c) {
        p.numeric[c.key()] = NormalModel{c.value().at("mean").get<double>(), c.value().at("sd").get<double>()};
      }
    }
    p.record_noise = pj.value("record_noise", 0.0);
    s.profiles[it.key()] = std::move(p);
  }
  if (j.contains("couplings")) {
    for (const auto& rj : j["couplings"]) {
      CouplingRule r;
      r.source = rj.at("source").get<std::string>();
      r.target = rj.at("target").get<std::string>();
      r.noise = rj.value("noise", 0.0);
      for (auto m = rj.at("mapping").begin(); m != rj.at("mapping").end(); ++m) {
        r.mapping[m.key()] = m.value().get<std::string>();
      }
      s.couplings.push_back(std::move(r));
    }
  }
  return s;
}

SynthesisSpec default_synthesis_spec() {
  return SynthesisSpec::from_json(nlohmann::json::parse(kDefaultSpecJson));
}

std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t n) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> counts(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = weights[i] / total * static_cast<double>(n);
    // Guard against exact quotas landing a hair below their integer value.
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    assigned += counts[i];
    remainders.emplace_back(exact - static_cast<double>(counts[i]), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[remainders[k % remainders.size()].second];
  return counts;
}

Table synthesize_corpus(const SynthesisSpec& spec, std::size_t n, std::uint64_t seed, SchemaPtr schema) {
  if (n == 0) throw std::invalid_argument("synthesize_corpus: n must be >= 1");
  spec.validate(*schema);
  const auto& label = schema->label();
  const std::size_t label_index = schema->label_index();
  Rng rng(seed);

  std::vector<double> class_w(label.level_count(), 0.0);
  for (std::size_t c = 0; c < class_w.size(); ++c) class_w[c] = spec.class_weights.at(label.categories[c].token);

  std::vector<std::size_t> classes;
  classes.reserve(n);
  if (spec.class_sampling == ClassSampling::quota) {
    const auto counts = apportion(class_w, n);
    for (std::size_t c = 0; c < counts.size(); ++c) classes.insert(classes.end(), counts[c], c);
    rng.shuffle(classes);
  } else {
    for (std::size_t i = 0; i < n; ++i) classes.push_back(rng.categorical(class_w));
  }

  std::vector<double> noise(label.level_count(), 0.0);
  for (std::size_t c = 0; c < noise.size(); ++c) noise[c] = spec.profiles.at(label.categories[c].token).record_noise;

  // Precompute per-class sampling tables in schema order.
  struct Column {
    std::size_t index;
    bool categorical;
    std::vector<std::vector<double>> weights;  // per class
    std::vector<NormalModel> normal;           // per class
    std::vector<double> population;            // class-weighted mixture
  };
  std::vector<Column> columns;
  for (std::size_t a : schema->feature_indices()) {
    const auto& attr = schema->at(a);
    Column col{a, attr.is_categorical(), {}, {}, {}};
    for (const auto& cat : label.categories) {
      if (col.categorical) {
        col.weights.push_back(weights_in_order(attr, *find_distribution(spec, cat.token, attr.name)));
      } else {
        col.normal.push_back(spec.profiles.at(cat.token).numeric.at(attr.name));
      }
    }
    if (col.categorical) {
      col.population.assign(attr.level_count(), 0.0);
      for (std::size_t c = 0; c < class_w.size(); ++c) {
        for (std::size_t l = 0; l < attr.level_count(); ++l) col.population[l] += class_w[c] * col.weights[c][l];
      }
    }
    columns.push_back(std::move(col));
  }
  struct Coupling {
    std::size_t source, target;
    std::vector<std::ptrdiff_t> map;  // source level -> target level or -1
    double noise;
  };
  std::vector<Coupling> couplings;
  for (const auto& rule : spec.couplings) {
    Coupling c{schema->require(rule.source), schema->require(rule.target), {}, rule.noise};
    const auto& src = schema->at(c.source);
    const auto& dst = schema->at(c.target);
    c.map.assign(src.level_count(), -1);
    for (const auto& [from, to] : rule.mapping) {
      c.map[*src.level_of(from)] = static_cast<std::ptrdiff_t>(*dst.level_of(to));
    }
    couplings.push_back(std::move(c));
  }

  const double scale = std::pow(10.0, spec.numeric_decimals);
  Table table(schema);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = classes[i];
    Row row(schema->size());
    row[label_index] = Cell::level(cls);
    for (const auto& col : columns) {
      if (col.categorical) {
        const bool noisy = noise[cls] > 0.0 && rng.uniform() < noise[cls];
        row[col.index] = Cell::level(rng.categorical(noisy ? col.population : col.weights[cls]));
      } else {
        const auto& m = col.normal[cls];
        row[col.index] = Cell::number(std::round(rng.normal(m.mean, m.sd) * scale) / scale);
      }
    }
    for (const auto& c : couplings) {
      const double u = rng.uniform();
      const auto mapped = c.map[row[c.source].level()];
      if (mapped >= 0 && u >= c.noise) row[c.target] = Cell::level(static_cast<std::size_t>(mapped));
    }
    table.add_row(std::move(row));
  }
  return table;
}

}  // namespace twkit
