#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <set>

#include "twkit/codec.hpp"
#include "twkit/csv.hpp"
#include "twkit/error.hpp"
#include "twkit/rng.hpp"

namespace twkit::app {

namespace {

void ensure_parent(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

}  // namespace

Table stage_synth(const Config& config, std::uint64_t master) {
  if (config.synth.input) return read_table(*config.synth.input);
  return synthesize_corpus(config.synth.spec, config.synth.rows, derive_seed(master, "synth"));
}

DiffReport stage_eval_impute(const Config& config, const Table* complete, std::uint64_t master,
                             Warnings* warnings) {
  Table corpus = complete != nullptr
                     ? *complete
                     : synthesize_corpus(config.synth.spec, config.impute.rows, derive_seed(master, "eval-impute/corpus"));
  if (!corpus.complete()) throw DataError("eval-impute: the input table must be complete");
  auto eval = config.impute.eval;
  eval.seed = derive_seed(master, "eval-impute");
  return evaluate_imputation(corpus, eval, config.registry(), warnings);
}

Table stage_impute(const Config& config, const std::string& method, const Table& table, std::uint64_t master,
                   Warnings* warnings) {
  const auto registry = config.registry();
  if (!registry.contains(method)) throw UsageError("impute: unknown method '" + method + "'");
  return registry.get(method)(table, derive_seed(master, "impute/" + method), warnings);
}

AugmentPlan stage_plan(const Config& config, const Table& table) {
  const auto counts = class_histogram(table);
  if (config.augment.plan) {
    auto plan = AugmentPlan::from_json(*config.augment.plan, table.schema());
    try {
      plan.validate(counts);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("augment plan: ") + e.what());
    }
    return plan;
  }
  return default_augment_plan(counts, config.augment.total, config.augment.stage1_floor);
}

Table stage_augment(const Config& config, const Table& table, std::uint64_t master, Warnings* warnings) {
  if (table.has_origin()) {
    for (std::size_t r = 0; r < table.size(); ++r) {
      if (table.origin(r) != Origin::real) throw DataError("augment: the input already holds synthetic rows");
    }
  }
  return two_stage_augment(table, stage_plan(config, table), config.augment.config, derive_seed(master, "augment"),
                           warnings);
}

RecoveryReport stage_train(const Config& config, const Table& table, std::uint64_t master, Warnings* warnings) {
  return evaluate_recovery(real_rows(table), config.recovery(), derive_seed(master, "train"), warnings);
}

std::vector<AttributeImportance> stage_importance(const Table& table, std::uint64_t master) {
  if (!table.complete()) throw DataError("importance: the input table has missing cells; impute it first");
  const auto codec = Codec::fit_features(table);
  const auto forest = Forest::train(encode(table, codec).values, table.labels(), table.schema().class_count(), {},
                                    derive_seed(master, "importance"));
  return attribute_importance(forest.column_importance(), codec);
}

CorrelationMatrix stage_correlate(const Config& config, const Table& table, Warnings* warnings) {
  const auto attrs = config.analyze.correlation_attributes.empty()
                         ? default_correlation_attributes(table.schema())
                         : config.analyze.correlation_attributes;
  return correlation_matrix(table, attrs, false, warnings);
}

std::vector<std::string> top_attributes(const std::vector<AttributeImportance>& importance, std::size_t top) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < importance.size() && i < top; ++i) out.push_back(importance[i].attribute);
  return out;
}

Table real_rows(const Table& table) {
  if (!table.has_origin()) return table;
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table.origin(r) == Origin::real) keep.push_back(r);
  }
  Table plain(table.schema_ptr());
  for (auto r : keep) plain.add_row(table.row(r));
  return plain;
}

nlohmann::json analysis_report(const std::vector<AttributeImportance>& importance, const CorrelationMatrix& corr,
                               const std::vector<BoxPanel>& boxes, const std::vector<ViolinPanel>& violins) {
  nlohmann::json j = importance_to_json(importance);
  j["correlation"] = corr.to_json();
  j["stats"] = stats_to_json(boxes, violins);
  return j;
}

std::string render_from_json(PlotKind kind, const nlohmann::json& doc, const PlotSpec& spec,
                             const std::string& source) {
  try {
    switch (kind) {
      case PlotKind::importance_bar:
        return render_importance_bar(importance_from_json(doc), spec);
      case PlotKind::box_grid:
        return render_box_grid(box_panels_from_json(doc.contains("stats") ? doc.at("stats") : doc), spec);
      case PlotKind::violin_grid:
        return render_violin_grid(violin_panels_from_json(doc.contains("stats") ? doc.at("stats") : doc), spec);
      case PlotKind::heatmap:
        return render_heatmap(correlation_from_json(doc.contains("correlation") ? doc.at("correlation") : doc), spec);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": not a " + to_string(kind) + " payload (" + e.what() + ")");
  } catch (const std::invalid_argument& e) {
    throw DataError(source + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  }
  return {};
}

Table read_table(const std::filesystem::path& path) { return load_csv(path, terracotta_schema()); }

void write_table(const Table& table, const std::filesystem::path& path) {
  ensure_parent(path);
  save_csv(table, path);
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) { write_text(j.dump(2) + "\n", path); }

void write_text(const std::string& text, const std::filesystem::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError(path.string() + ": cannot write file");
}

void print_warnings(const Warnings& warnings, std::ostream& err) {
  std::set<std::string> seen;
  for (const auto& w : warnings) {
    if (seen.insert(w).second) err << "warning: " << w << "\n";
  }
}

}  // namespace twkit::app
