#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "twkit/analyze.hpp"
#include "twkit/classify.hpp"
#include "twkit/impute.hpp"
#include "twkit/recovery.hpp"
#include "twkit/table.hpp"

namespace twkit::app {

// Stage building blocks shared by the single commands and the pipeline. Each
// stage seeds itself with derive_seed(master, <stage name>), so running a
// stage on its own reproduces the pipeline's output for that stage.

Table stage_synth(const Config& config, std::uint64_t master);
DiffReport stage_eval_impute(const Config& config, const Table* complete, std::uint64_t master,
                             Warnings* warnings);
Table stage_impute(const Config& config, const std::string& method, const Table& table, std::uint64_t master,
                   Warnings* warnings);
AugmentPlan stage_plan(const Config& config, const Table& table);
Table stage_augment(const Config& config, const Table& table, std::uint64_t master, Warnings* warnings);
RecoveryReport stage_train(const Config& config, const Table& table, std::uint64_t master, Warnings* warnings);
std::vector<AttributeImportance> stage_importance(const Table& table, std::uint64_t master);
CorrelationMatrix stage_correlate(const Config& config, const Table& table, Warnings* warnings);

/// The `top` most important attributes, most important first.
std::vector<std::string> top_attributes(const std::vector<AttributeImportance>& importance, std::size_t top);

/// Rows whose origin is real; all rows when the table tracks no origins.
Table real_rows(const Table& table);

/// The analysis report read by the figure commands: importance, correlation
/// and per-class box/violin statistics in one document.
nlohmann::json analysis_report(const std::vector<AttributeImportance>& importance, const CorrelationMatrix& corr,
                               const std::vector<BoxPanel>& boxes, const std::vector<ViolinPanel>& violins);

/// Renders one figure from a JSON document written by importance, correlate,
/// stats or the pipeline's analysis report. Malformed payloads raise DataError.
std::string render_from_json(PlotKind kind, const nlohmann::json& doc, const PlotSpec& spec,
                             const std::string& source);

Table read_table(const std::filesystem::path& path);
void write_table(const Table& table, const std::filesystem::path& path);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

void print_warnings(const Warnings& warnings, std::ostream& err);

}  // namespace twkit::app
