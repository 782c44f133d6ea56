#include "pipeline.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "twkit/error.hpp"

namespace twkit::app {

nlohmann::json Manifest::to_json() const {
  nlohmann::json stages_j = nlohmann::json::array();
  for (const auto& s : stages) stages_j.push_back({{"name", s.name}, {"status", s.status}, {"outputs", s.outputs}});
  nlohmann::json files_j = nlohmann::json::array();
  for (const auto& f : files) {
    files_j.push_back({{"path", f.path}, {"kind", f.kind}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  }
  nlohmann::json j{{"master_seed", master_seed}, {"status", status}, {"stages", stages_j}, {"files", files_j}};
  if (!error.empty()) j["error"] = error;
  return j;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256: init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

Manifest run_pipeline(const Config& config, std::ostream& log) {
  const auto& dir = config.output_dir;
  std::filesystem::create_directories(dir);
  const std::uint64_t seed = config.seed;

  Manifest manifest;
  manifest.master_seed = seed;
  Warnings warnings;

  auto record = [&](StageRecord& stage, const std::string& name, const std::string& kind) {
    const auto path = dir / name;
    manifest.files.push_back({name, kind, std::filesystem::file_size(path), sha256_file(path)});
    stage.outputs.push_back(name);
  };
  auto run = [&](const std::string& name, bool enabled, const std::function<void(StageRecord&)>& body) {
    StageRecord stage{name, enabled ? "ok" : "skipped", {}};
    if (enabled && manifest.status == "ok") {
      log << "[pipeline] " << name << "\n" << std::flush;
      try {
        body(stage);
      } catch (const std::exception& e) {
        stage.status = "failed";
        manifest.status = "failed";
        manifest.error = name + ": " + e.what();
      }
    } else if (enabled) {
      stage.status = "skipped";
    }
    manifest.stages.push_back(stage);
  };

  Table corpus(terracotta_schema());
  Table augmented(terracotta_schema());
  bool have_augmented = false;
  std::vector<AttributeImportance> importance;

  run("synth", true, [&](StageRecord& s) {
    corpus = stage_synth(config, seed);
    write_table(corpus, dir / "corpus.csv");
    record(s, "corpus.csv", "csv");
    log << "  " << corpus.size() << " rows\n";
  });

  run("eval-impute", config.stages.eval_impute, [&](StageRecord& s) {
    const auto report = stage_eval_impute(config, nullptr, seed, &warnings);
    write_json(report.to_json(), dir / "imputation.json");
    record(s, "imputation.json", "json");
    log << report.to_text();
  });

  run("augment", config.stages.augment, [&](StageRecord& s) {
    augmented = stage_augment(config, corpus, seed, &warnings);
    have_augmented = true;
    write_table(augmented, dir / "augmented.csv");
    record(s, "augmented.csv", "csv");
    log << "  " << corpus.size() << " -> " << augmented.size() << " rows\n";
  });

  run("train", config.stages.train, [&](StageRecord& s) {
    const auto report = stage_train(config, corpus, seed, &warnings);
    write_json(report.to_json(), dir / "classification.json");
    record(s, "classification.json", "json");
    log << report.to_text();
  });

  run("analyze", config.stages.analyze, [&](StageRecord& s) {
    const Table& table = have_augmented ? augmented : corpus;
    importance = stage_importance(table, seed);
    const auto top = top_attributes(importance, config.analyze.top_attributes);
    const auto corr = stage_correlate(config, table, &warnings);
    write_json(analysis_report(importance, corr, box_panels(table, top), violin_panels(table, top)),
               dir / "analysis.json");
    record(s, "analysis.json", "json");
  });

  run("plot", config.stages.plot && config.stages.analyze, [&](StageRecord& s) {
    const auto doc = read_json_file(dir / "analysis.json");
    const std::pair<PlotKind, const char*> figures[] = {{PlotKind::importance_bar, "importance.svg"},
                                                        {PlotKind::box_grid, "boxplots.svg"},
                                                        {PlotKind::violin_grid, "violins.svg"},
                                                        {PlotKind::heatmap, "heatmap.svg"}};
    for (const auto& [kind, name] : figures) {
      write_text(render_from_json(kind, doc, config.plots.for_kind(kind), "analysis.json"), dir / name);
      record(s, name, "svg");
    }
  });

  print_warnings(warnings, log);
  write_json(manifest.to_json(), dir / "manifest.json");
  return manifest;
}

}  // namespace twkit::app
