#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "json.hpp"
#include "pipeline.hpp"
#include "twkit/csv.hpp"
#include "twkit/error.hpp"
#include "twkit/schema.hpp"

namespace twkit::app {
namespace {

namespace fs = std::filesystem;

struct Run {
  int status = -1;
  std::string output;  // stdout and stderr
};

Run twkit(const std::string& args, const fs::path& cwd) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" + std::string(TWKIT_CLI) + "' " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  char buf[4096];
  while (pipe != nullptr && fgets(buf, sizeof buf, pipe) != nullptr) r.output += buf;
  const int raw = pipe != nullptr ? pclose(pipe) : -1;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("twkit_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

// A config that keeps every stage but trains the networks briefly.
const char* kFastConfig = R"({
  "seed": 5,
  "output_dir": "run",
  "eval_impute": {"classifiers": ["LR", "DT"], "gain": {"epochs": 10}, "mice": {"rounds": 2}},
  "augment": {"cgan": {"epochs": 3, "hidden": 16}},
  "plots": {"heatmap": {"title": "V"}}
})";

TEST(Cli, SynthWritesTheRequestedRows) {
  const auto dir = scratch("synth");
  const auto r = twkit("synth --n 1087 --seed 7 --out tw.csv", dir);
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(line_count(dir / "tw.csv"), 1088u);
  std::ifstream in(dir / "tw.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "c_id,t_id,corps,position,height,weapon,hairstyle,headgear,robe_num,armor_type,tw_class");
  EXPECT_EQ(twkit("synth --n 1087 --seed 7 --out again.csv", dir).status, 0);
  EXPECT_EQ(slurp(dir / "tw.csv"), slurp(dir / "again.csv"));
}

TEST(Cli, ImputeIsPassThroughOnCompleteInput) {
  const auto dir = scratch("impute");
  ASSERT_EQ(twkit("synth --n 200 --seed 2 --out tw.csv", dir).status, 0);
  for (const char* method : {"gain", "mice", "sta"}) {
    const auto r = twkit(std::string("impute --method ") + method + " --in tw.csv --out out.csv --seed 1", dir);
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_EQ(slurp(dir / "tw.csv"), slurp(dir / "out.csv")) << method;
  }
}

TEST(Cli, ImputeFillsMissingCells) {
  const auto dir = scratch("impute_fill");
  ASSERT_EQ(twkit("synth --n 200 --seed 2 --out tw.csv", dir).status, 0);
  std::string text = slurp(dir / "tw.csv");
  // Blank the height of the first data row and the headgear of the second.
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  for (int i = 0; std::getline(in, line); ++i) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    if (i == 1) f[4] = "";
    if (i == 2) f[7] = "NA";
    for (std::size_t k = 0; k < f.size(); ++k) out << (k ? "," : "") << f[k];
    out << "\n";
  }
  std::ofstream(dir / "holed.csv") << out.str();
  const auto r = twkit("impute --method sta --in holed.csv --out filled.csv", dir);
  ASSERT_EQ(r.status, 0) << r.output;
  const auto t = load_csv(dir / "filled.csv", terracotta_schema());
  EXPECT_TRUE(t.complete());
  EXPECT_EQ(t.size(), 200u);
}

TEST(Cli, CorrelateThenPlotHeatmapShowsRoundedValues) {
  const auto dir = scratch("heatmap");
  ASSERT_EQ(twkit("synth --n 400 --seed 3 --out tw.csv", dir).status, 0);
  ASSERT_EQ(twkit("correlate --in tw.csv --out corr.json", dir).status, 0);
  const auto r = twkit("plot --kind heatmap --in corr.json --out heat.svg", dir);
  ASSERT_EQ(r.status, 0) << r.output;
  const auto j = nlohmann::json::parse(slurp(dir / "corr.json"));
  const auto& values = j.at("values");
  const std::string svg = slurp(dir / "heat.svg");
  const std::regex cell(R"re(<text class="value" data-row="(\d+)" data-col="(\d+)"[^>]*>([^<]*)</text>)re");
  std::size_t cells = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), cell); it != std::sregex_iterator(); ++it, ++cells) {
    const auto i = std::stoul((*it)[1]);
    const auto k = std::stoul((*it)[2]);
    char expected[16];
    std::snprintf(expected, sizeof expected, "%.2f", values.at(i).at(k).get<double>());
    EXPECT_EQ((*it)[3].str(), expected);
    std::snprintf(expected, sizeof expected, "%.2f", j.at("matrix").at(i).at(k).get<double>());
    EXPECT_EQ((*it)[3].str(), expected);
  }
  EXPECT_EQ(cells, values.size() * values.size());
}

TEST(Cli, StatsImportanceAndPlotsChain) {
  const auto dir = scratch("chain");
  ASSERT_EQ(twkit("synth --n 300 --seed 4 --out tw.csv", dir).status, 0);
  ASSERT_EQ(twkit("stats --in tw.csv --attr height,headgear --by-class --out stats.json", dir).status, 0);
  ASSERT_EQ(twkit("importance --in tw.csv --out imp.json --seed 2", dir).status, 0);
  for (const char* kind : {"box", "violin"}) {
    const auto r = twkit(std::string("plot --kind ") + kind + " --in stats.json --out " + kind + ".svg", dir);
    EXPECT_EQ(r.status, 0) << r.output;
  }
  const auto r = twkit("plot --kind importance --in imp.json --out imp.svg --title Weights", dir);
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_NE(slurp(dir / "imp.svg").find(">Weights</text>"), std::string::npos);
  double sum = 0.0;
  const auto imp = nlohmann::json::parse(slurp(dir / "imp.json"));
  for (const auto& a : imp.at("importance")) sum += a.at("weight").get<double>();
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Cli, AugmentWritesOriginAndPlan) {
  const auto dir = scratch("augment");
  std::ofstream(dir / "fast.json") << kFastConfig;
  ASSERT_EQ(twkit("synth --n 1087 --seed 7 --out tw.csv", dir).status, 0);
  const auto r = twkit("augment --in tw.csv --out tws.csv --plan-out plan.json --config fast.json --seed 3", dir);
  ASSERT_EQ(r.status, 0) << r.output;
  const auto t = load_csv(dir / "tws.csv", terracotta_schema());
  EXPECT_EQ(t.size(), 1800u);
  EXPECT_TRUE(t.has_origin());
  const auto plan = nlohmann::json::parse(slurp(dir / "plan.json"));
  EXPECT_EQ(plan.at("total").get<std::size_t>(), 1800u);
  // The written plan reproduces the run when passed back in.
  ASSERT_EQ(twkit("augment --in tw.csv --out tws2.csv --plan plan.json --config fast.json --seed 3", dir).status, 0);
  EXPECT_EQ(slurp(dir / "tws.csv"), slurp(dir / "tws2.csv"));
  // Augmenting an already augmented file is refused.
  EXPECT_EQ(twkit("augment --in tws.csv --out x.csv --config fast.json", dir).status, 1);
}

TEST(Cli, TrainReportsBeforeAndAfter) {
  const auto dir = scratch("train");
  std::ofstream(dir / "fast.json") << kFastConfig;
  ASSERT_EQ(twkit("synth --n 1087 --seed 7 --out tw.csv", dir).status, 0);
  const auto r = twkit("train --model rf --in tw.csv --report m.json --importance imp.json --config fast.json", dir);
  ASSERT_EQ(r.status, 0) << r.output;
  const auto m = nlohmann::json::parse(slurp(dir / "m.json"));
  EXPECT_EQ(m.at("protocol"), "holdout");
  EXPECT_FALSE(m.at("after").is_null());
  EXPECT_EQ(m.at("before").at("per_class").size(), 7u);
  ASSERT_EQ(twkit("train --in tw.csv --out m2.json --no-augment --config fast.json", dir).status, 0);
  EXPECT_TRUE(nlohmann::json::parse(slurp(dir / "m2.json")).at("after").is_null());
}

TEST(Cli, UsageErrorsExitTwo) {
  const auto dir = scratch("usage");
  EXPECT_EQ(twkit("", dir).status, 2);
  EXPECT_EQ(twkit("frobnicate", dir).status, 2);
  EXPECT_EQ(twkit("synth --n 10", dir).status, 2);  // --out missing
  EXPECT_EQ(twkit("synth --n ten --out a.csv", dir).status, 2);
  EXPECT_EQ(twkit("synth --n 0 --out a.csv", dir).status, 2);
  EXPECT_EQ(twkit("plot --kind pie --in x.json --out a.svg", dir).status, 2);
  std::ofstream(dir / "typo.json") << R"({"augment": {"totl": 10}})";
  const auto r = twkit("synth --n 10 --out a.csv --config typo.json", dir);
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("totl"), std::string::npos);
  std::ofstream(dir / "bad_rate.json") << R"({"eval_impute": {"gain": {"hint_rate": 2}}})";
  EXPECT_EQ(twkit("synth --n 10 --out a.csv --config bad_rate.json", dir).status, 2);
  ASSERT_EQ(twkit("synth --n 50 --out tw.csv", dir).status, 0);
  EXPECT_EQ(twkit("impute --method sgain --in tw.csv --out b.csv", dir).status, 2);
  EXPECT_EQ(twkit("impute --method sta --in tw.csv --out tw.csv", dir).status, 2);
  EXPECT_EQ(twkit("train --in tw.csv --model svm2 --out m.json", dir).status, 2);
}

TEST(Cli, DataErrorsExitOneAndNameTheProblem) {
  const auto dir = scratch("data");
  std::ofstream(dir / "cols.csv") << "c_id,t_id\n1,2\n";
  auto r = twkit("importance --in cols.csv --out i.json", dir);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("cols.csv"), std::string::npos);
  EXPECT_NE(r.output.find("corps"), std::string::npos);

  ASSERT_EQ(twkit("synth --n 20 --out tw.csv", dir).status, 0);
  std::string text = slurp(dir / "tw.csv");
  const auto second_line = text.find('\n', text.find('\n') + 1) + 1;
  text.replace(second_line, text.find(',', second_line) - second_line, "77");
  std::ofstream(dir / "badcode.csv") << text;
  r = twkit("correlate --in badcode.csv --out c.json", dir);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("badcode.csv"), std::string::npos);
  EXPECT_NE(r.output.find("c_id"), std::string::npos);

  std::ofstream(dir / "notjson.json") << "{";
  EXPECT_EQ(twkit("plot --kind box --in notjson.json --out a.svg", dir).status, 1);
  std::ofstream(dir / "wrong.json") << R"({"importance": []})";
  EXPECT_EQ(twkit("plot --kind heatmap --in wrong.json --out a.svg", dir).status, 1);
  EXPECT_EQ(twkit("plot --kind importance --in wrong.json --out a.svg", dir).status, 1);
}

TEST(Pipeline, ManifestListsArtifactsAndIsReproducible) {
  const auto dir = scratch("pipeline");
  std::ofstream(dir / "fast.json") << kFastConfig;
  const auto first = twkit("pipeline --config fast.json", dir);
  ASSERT_EQ(first.status, 0) << first.output;
  const auto m1 = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  std::map<std::string, int> kinds;
  for (const auto& f : m1.at("files")) {
    ++kinds[f.at("kind").get<std::string>()];
    EXPECT_EQ(f.at("sha256").get<std::string>(), sha256_file(dir / "run" / f.at("path").get<std::string>()));
  }
  EXPECT_EQ(kinds["svg"], 4);
  EXPECT_EQ(kinds["json"], 3);
  EXPECT_EQ(kinds["csv"], 2);
  EXPECT_EQ(m1.at("status"), "ok");
  EXPECT_EQ(m1.at("master_seed"), 5);

  ASSERT_EQ(twkit("pipeline --config fast.json --out run2", dir).status, 0);
  const auto m2 = nlohmann::json::parse(slurp(dir / "run2" / "manifest.json"));
  EXPECT_EQ(m1.at("files"), m2.at("files"));

  // A different master seed changes the corpus.
  ASSERT_EQ(twkit("pipeline --config fast.json --seed 6 --out run3", dir).status, 0);
  const auto m3 = nlohmann::json::parse(slurp(dir / "run3" / "manifest.json"));
  EXPECT_NE(m1.at("files").at(0).at("sha256"), m3.at("files").at(0).at("sha256"));

  // A single stage run with the same master seed reproduces the pipeline's file.
  ASSERT_EQ(twkit("synth --seed 5 --out corpus.csv", dir).status, 0);
  EXPECT_EQ(slurp(dir / "corpus.csv"), slurp(dir / "run" / "corpus.csv"));
}

TEST(Pipeline, DisabledAugmentTrainsOnRealRowsOnly) {
  const auto dir = scratch("pipeline_noaug");
  auto cfg = nlohmann::json::parse(kFastConfig);
  cfg["stages"] = {{"augment", false}, {"eval_impute", false}};
  std::ofstream(dir / "cfg.json") << cfg.dump();
  const auto r = twkit("pipeline --config cfg.json", dir);
  ASSERT_EQ(r.status, 0) << r.output;
  const auto m = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  std::map<std::string, std::string> status;
  for (const auto& s : m.at("stages")) status[s.at("name")] = s.at("status");
  EXPECT_EQ(status["augment"], "skipped");
  EXPECT_EQ(status["eval-impute"], "skipped");
  EXPECT_EQ(status["plot"], "ok");
  EXPECT_EQ(m.at("files").size(), 7u);
  EXPECT_FALSE(fs::exists(dir / "run" / "augmented.csv"));
  const auto c = nlohmann::json::parse(slurp(dir / "run" / "classification.json"));
  EXPECT_TRUE(c.at("after").is_null());
}

TEST(Pipeline, FailingStageIsRecorded) {
  const auto dir = scratch("pipeline_fail");
  std::ofstream(dir / "broken.csv") << "c_id,t_id\n1,2\n";
  std::ofstream(dir / "cfg.json") << R"({"synth": {"input": "broken.csv"}, "output_dir": "out"})";
  const auto r = twkit("pipeline --config cfg.json", dir);
  EXPECT_EQ(r.status, 1);
  const auto m = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(m.at("status"), "failed");
  EXPECT_EQ(m.at("stages").at(0).at("status"), "failed");
  EXPECT_EQ(m.at("stages").at(1).at("status"), "skipped");
  EXPECT_NE(m.at("error").get<std::string>().find("broken.csv"), std::string::npos);
  EXPECT_TRUE(m.at("files").empty());
}

TEST(Config, DefaultsAndOverrides) {
  const auto c = default_config();
  EXPECT_EQ(c.synth.rows, 1087u);
  EXPECT_EQ(c.impute.rows, 520u);
  EXPECT_EQ(c.augment.total, 1800u);
  EXPECT_EQ(c.train.model, "RF");

  const auto j = nlohmann::json::parse(R"({
    "seed": 9, "output_dir": "o",
    "synth": {"rows": 50, "input": "in.csv"},
    "augment": {"total": 900, "cgan": {"epochs": 7, "batch_size": 32}},
    "train": {"folds": 5},
    "plots": {"box": {"title": "B", "width": 300, "palette": ["#000000"]}}
  })");
  const auto p = parse_config(j, "/base");
  EXPECT_EQ(p.seed, 9u);
  EXPECT_EQ(p.output_dir, fs::path("/base/o"));
  EXPECT_EQ(*p.synth.input, fs::path("/base/in.csv"));
  EXPECT_EQ(p.augment.total, 900u);
  EXPECT_EQ(p.augment.config.cgan.train.epochs, 7u);
  EXPECT_EQ(p.augment.config.cgan.train.batch_size, 32u);
  EXPECT_EQ(p.recovery().folds, 5u);
  EXPECT_EQ(p.plots.box.title, "B");
  EXPECT_EQ(p.plots.box.palette.size(), 1u);
  EXPECT_EQ(p.plots.for_kind(PlotKind::box_grid).width, 300.0);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"sed": 1})"), "."), UsageError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"train": {"folds": 1}})"), "."), UsageError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"train": {"model": "XGB"}})"), "."), UsageError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"seed": "one"})"), "."), UsageError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"synth": {"spec": "missing.json"}})"), "."), UsageError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"([1, 2])"), "."), UsageError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), UsageError);
}

TEST(Pipeline, Sha256MatchesAKnownDigest) {
  const auto dir = scratch("sha");
  std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
  EXPECT_EQ(sha256_file(dir / "abc.txt"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace twkit::app
