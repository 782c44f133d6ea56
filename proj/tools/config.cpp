#include "config.hpp"

#include <fstream>
#include <set>

#include "twkit/error.hpp"

namespace twkit::app {

namespace {

// Reads the keys of one object and rejects any it did not ask for, so a
// misspelt option fails loudly instead of being ignored.
class Section {
 public:
  Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw UsageError("config: '" + name_ + "' must be an object");
  }
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw UsageError("config: unknown key '" + k + "' in '" + name_ + "'");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw UsageError("config: '" + name_ + "." + key + "' has the wrong type");
    }
  }

  const nlohmann::json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

 private:
  const nlohmann::json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

// Accepts either an inline object or a path to a JSON file.
nlohmann::json inline_or_file(const nlohmann::json& j, const std::filesystem::path& base) {
  if (j.is_string()) return read_json_file(resolve(base, j.get<std::string>()));
  if (!j.is_object()) throw UsageError("config: expected an object or a file path");
  return j;
}

void read_train(Section& s, TrainConfig& t) {
  s.get("epochs", t.epochs);
  s.get("batch_size", t.batch_size);
  s.get("learning_rate", t.learning_rate);
}

void read_plot(const nlohmann::json& j, const std::string& name, PlotSpec& spec) {
  Section s(j, "plots." + name);
  s.get("title", spec.title);
  s.get("x_label", spec.x_label);
  s.get("y_label", spec.y_label);
  s.get("width", spec.width);
  s.get("height", spec.height);
  s.get("palette", spec.palette);
  s.finish();
  if (spec.width < 0.0 || spec.height < 0.0) throw UsageError("config: plot width/height must be > 0");
}

}  // namespace

const PlotSpec& PlotSection::for_kind(PlotKind kind) const {
  switch (kind) {
    case PlotKind::importance_bar: return importance;
    case PlotKind::box_grid: return box;
    case PlotKind::violin_grid: return violin;
    case PlotKind::heatmap: return heatmap;
  }
  return importance;
}

RecoveryConfig Config::recovery() const {
  RecoveryConfig r;
  r.model = train.model;
  r.test_fraction = train.test_fraction;
  r.folds = train.folds;
  r.augment = stages.augment;
  r.total = augment.total;
  r.stage1_floor = augment.stage1_floor;
  r.augment_config = augment.config;
  return r;
}

ImputerRegistry Config::registry() const { return ImputerRegistry::with_defaults(impute.mice, impute.gain); }

Config default_config() { return Config{}; }

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

namespace {

Config parse_sections(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  Config c;
  Section top(j, "config");
  top.get("seed", c.seed);
  if (top.has("output_dir")) c.output_dir = resolve(base_dir, top.at("output_dir").get<std::string>());

  if (top.has("stages")) {
    Section s(top.at("stages"), "stages");
    s.get("eval_impute", c.stages.eval_impute);
    s.get("augment", c.stages.augment);
    s.get("train", c.stages.train);
    s.get("analyze", c.stages.analyze);
    s.get("plot", c.stages.plot);
    s.finish();
  }

  if (top.has("synth")) {
    Section s(top.at("synth"), "synth");
    s.get("rows", c.synth.rows);
    if (s.has("input")) c.synth.input = resolve(base_dir, s.at("input").get<std::string>());
    if (s.has("spec")) {
      try {
        c.synth.spec = SynthesisSpec::from_json(inline_or_file(s.at("spec"), base_dir));
        c.synth.spec.validate(*terracotta_schema());
      } catch (const std::exception& e) {
        throw UsageError(std::string("config: bad synthesis spec (") + e.what() + ")");
      }
    }
    s.finish();
  }

  if (top.has("eval_impute")) {
    Section s(top.at("eval_impute"), "eval_impute");
    auto& e = c.impute.eval;
    s.get("rows", c.impute.rows);
    s.get("rate", e.rate);
    s.get("features", e.features);
    s.get("methods", e.methods);
    s.get("classifiers", e.classifiers);
    s.get("test_fraction", e.test_fraction);
    if (s.has("mice")) {
      Section m(s.at("mice"), "eval_impute.mice");
      m.get("rounds", c.impute.mice.rounds);
      m.get("stochastic", c.impute.mice.stochastic);
      m.get("ridge", c.impute.mice.ridge);
      m.finish();
    }
    if (s.has("gain")) {
      Section g(s.at("gain"), "eval_impute.gain");
      read_train(g, c.impute.gain.train);
      g.get("hint_rate", c.impute.gain.hint_rate);
      g.get("alpha", c.impute.gain.alpha);
      g.finish();
    }
    s.finish();
  }

  if (top.has("augment")) {
    Section s(top.at("augment"), "augment");
    s.get("total", c.augment.total);
    s.get("stage1_floor", c.augment.stage1_floor);
    s.get("k_neighbors", c.augment.config.k_neighbors);
    if (s.has("plan")) c.augment.plan = inline_or_file(s.at("plan"), base_dir);
    if (s.has("cgan")) {
      Section g(s.at("cgan"), "augment.cgan");
      auto& cg = c.augment.config.cgan;
      g.get("noise_dim", cg.noise_dim);
      g.get("hidden", cg.hidden);
      read_train(g, cg.train);
      g.get("moment_weight", cg.moment_weight);
      g.get("semantic_weight", cg.semantic_weight);
      g.finish();
    }
    s.finish();
  }

  if (top.has("train")) {
    Section s(top.at("train"), "train");
    s.get("model", c.train.model);
    s.get("test_fraction", c.train.test_fraction);
    s.get("folds", c.train.folds);
    s.finish();
  }

  if (top.has("analyze")) {
    Section s(top.at("analyze"), "analyze");
    s.get("top_attributes", c.analyze.top_attributes);
    s.get("correlation_attributes", c.analyze.correlation_attributes);
    s.finish();
  }

  if (top.has("plots")) {
    Section s(top.at("plots"), "plots");
    if (s.has("importance")) read_plot(s.at("importance"), "importance", c.plots.importance);
    if (s.has("box")) read_plot(s.at("box"), "box", c.plots.box);
    if (s.has("violin")) read_plot(s.at("violin"), "violin", c.plots.violin);
    if (s.has("heatmap")) read_plot(s.at("heatmap"), "heatmap", c.plots.heatmap);
    s.finish();
  }
  top.finish();

  try {
    c.impute.gain.validate();
    if (c.impute.mice.rounds == 0) throw std::invalid_argument("mice.rounds must be >= 1");
    c.augment.config.cgan.validate();
    c.recovery().validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  if (c.synth.rows == 0 || c.impute.rows == 0) throw UsageError("config: row counts must be >= 1");
  if (c.analyze.top_attributes == 0) throw UsageError("config: analyze.top_attributes must be >= 1");
  return c;
}

}  // namespace

Config parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  try {
    return parse_sections(j, base_dir);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const DataError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

Config load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = read_json_file(path);
  } catch (const DataError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

}  // namespace twkit::app
