#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "commands.hpp"
#include "pipeline.hpp"
#include "twkit/error.hpp"
#include "twkit/rng.hpp"

using namespace twkit;
using namespace twkit::app;

namespace {

// Flags every command accepts.
struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;

  Config load() const {
    Config c = config.empty() ? default_config() : load_config(config);
    if (seed) c.seed = *seed;
    return c;
  }
};

void add_common(CLI::App* cmd, Common& common, bool out_required = true) {
  cmd->add_option("--seed", common.seed, "Master seed (overrides the config)");
  cmd->add_option("--config", common.config, "JSON config document")->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", common.out, "Output path");
  if (out_required) out->required();
}

void refuse_overwrite(const std::string& in, const std::string& out) {
  if (!in.empty() && !out.empty() && std::filesystem::exists(out) &&
      std::filesystem::equivalent(std::filesystem::path(in), std::filesystem::path(out))) {
    throw UsageError("refusing to overwrite the input file " + in);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Terracotta Warriors data toolkit: synthesis, imputation, augmentation, classification and figures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "twkit 1.0");

  Common common;
  Warnings warnings;
  std::function<void()> action;

  {
    auto* cmd = app.add_subcommand("synth", "Draw a synthetic corpus from the generator spec");
    add_common(cmd, common);
    auto n = std::make_shared<std::optional<std::size_t>>();
    auto spec = std::make_shared<std::string>();
    cmd->add_option("--n", *n, "Number of rows (default 1087)");
    cmd->add_option("--spec", *spec, "Synthesis spec JSON")->check(CLI::ExistingFile);
    cmd->callback([&, n, spec] {
      action = [&, n, spec] {
        auto c = common.load();
        if (*n) c.synth.rows = **n;
        if (!spec->empty()) c.synth.spec = SynthesisSpec::from_json(read_json_file(*spec));
        if (c.synth.rows == 0) throw UsageError("--n must be >= 1");
        c.synth.input.reset();
        write_table(stage_synth(c, c.seed), common.out);
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("impute", "Fill missing cells with sta, mice or gain");
    add_common(cmd, common);
    auto method = std::make_shared<std::string>();
    auto in = std::make_shared<std::string>();
    cmd->add_option("--method", *method, "sta | mice | gain")->required();
    cmd->add_option("--in", *in, "Input CSV")->required()->check(CLI::ExistingFile);
    cmd->callback([&, method, in] {
      action = [&, method, in] {
        refuse_overwrite(*in, common.out);
        const auto c = common.load();
        write_table(stage_impute(c, *method, read_table(*in), c.seed, &warnings), common.out);
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("eval-impute", "Score imputation methods against a complete corpus");
    add_common(cmd, common);
    auto in = std::make_shared<std::string>();
    auto text = std::make_shared<std::string>();
    auto rate = std::make_shared<std::optional<double>>();
    cmd->add_option("--in", *in, "Complete CSV (default: synthesize eval_impute.rows rows)")->check(CLI::ExistingFile);
    cmd->add_option("--text", *text, "Also write the aligned text table here");
    cmd->add_option("--rate", *rate, "MCAR rate over the damaged features");
    cmd->callback([&, in, text, rate] {
      action = [&, in, text, rate] {
        auto c = common.load();
        if (*rate) c.impute.eval.rate = **rate;
        std::optional<Table> complete;
        if (!in->empty()) complete = read_table(*in);
        const auto report = stage_eval_impute(c, complete ? &*complete : nullptr, c.seed, &warnings);
        write_json(report.to_json(), common.out);
        if (!text->empty()) write_text(report.to_text(), *text);
        std::cout << report.to_text();
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("augment", "Two-stage SMOTENC + CGAN augmentation");
    add_common(cmd, common);
    auto in = std::make_shared<std::string>();
    auto plan = std::make_shared<std::string>();
    auto plan_out = std::make_shared<std::string>();
    auto total = std::make_shared<std::optional<std::size_t>>();
    cmd->add_option("--in", *in, "Input CSV (complete, real rows)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--plan", *plan, "AugmentPlan JSON (default: fill to --total)")->check(CLI::ExistingFile);
    cmd->add_option("--total", *total, "Target row count of the default plan");
    cmd->add_option("--plan-out", *plan_out, "Write the plan that was used");
    cmd->callback([&, in, plan, plan_out, total] {
      action = [&, in, plan, plan_out, total] {
        refuse_overwrite(*in, common.out);
        auto c = common.load();
        if (*total) c.augment.total = **total;
        if (!plan->empty()) c.augment.plan = read_json_file(*plan);
        const auto table = read_table(*in);
        if (!plan_out->empty()) write_json(stage_plan(c, table).to_json(table.schema()), *plan_out);
        write_table(stage_augment(c, table, c.seed, &warnings), common.out);
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("train", "Before/after-augmentation metrics on held-out real rows");
    add_common(cmd, common, false);
    auto in = std::make_shared<std::string>();
    auto model = std::make_shared<std::string>();
    auto report = std::make_shared<std::string>();
    auto importance = std::make_shared<std::string>();
    auto folds = std::make_shared<std::optional<std::size_t>>();
    auto no_augment = std::make_shared<bool>(false);
    cmd->add_option("--in", *in, "Input CSV; only its real rows are evaluated")->required()->check(CLI::ExistingFile);
    cmd->add_option("--model", *model, "LR | DT | RF | MLP | SVM (default RF)");
    cmd->add_option("--report", *report, "Metrics JSON (same as --out)");
    cmd->add_option("--importance", *importance, "RF Gini importance over all input rows");
    cmd->add_option("--folds", *folds, "Pooled stratified k-fold instead of one 80/20 split");
    cmd->add_flag("--no-augment", *no_augment, "Only score the model trained on real rows");
    cmd->callback([&, in, model, report, importance, folds, no_augment] {
      action = [&, in, model, report, importance, folds, no_augment] {
        auto c = common.load();
        if (!model->empty()) c.train.model = *model;
        if (*folds) c.train.folds = **folds;
        if (*no_augment) c.stages.augment = false;
        const std::string out = report->empty() ? common.out : *report;
        if (out.empty()) throw UsageError("train: give --report or --out");
        try {
          c.recovery().validate();
        } catch (const std::invalid_argument& e) {
          throw UsageError(std::string("train: ") + e.what());
        }
        const auto table = read_table(*in);
        const auto r = stage_train(c, table, c.seed, &warnings);
        write_json(r.to_json(), out);
        std::cout << r.to_text();
        if (!importance->empty()) write_json(importance_to_json(stage_importance(table, c.seed)), *importance);
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("importance", "Random-forest Gini importance per attribute");
    add_common(cmd, common);
    auto in = std::make_shared<std::string>();
    cmd->add_option("--in", *in, "Input CSV")->required()->check(CLI::ExistingFile);
    cmd->callback([&, in] {
      action = [&, in] {
        const auto c = common.load();
        write_json(importance_to_json(stage_importance(read_table(*in), c.seed)), common.out);
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("correlate", "Pairwise Cramer's V of categorical attributes");
    add_common(cmd, common);
    auto in = std::make_shared<std::string>();
    auto attrs = std::make_shared<std::vector<std::string>>();
    cmd->add_option("--in", *in, "Input CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--attrs", *attrs, "Attributes (default: every categorical feature)")->delimiter(',');
    cmd->callback([&, in, attrs] {
      action = [&, in, attrs] {
        auto c = common.load();
        if (!attrs->empty()) c.analyze.correlation_attributes = *attrs;
        write_json(stage_correlate(c, read_table(*in), &warnings).to_json(), common.out);
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("stats", "Per-class box and violin statistics");
    add_common(cmd, common);
    auto in = std::make_shared<std::string>();
    auto attrs = std::make_shared<std::vector<std::string>>();
    auto by_class = std::make_shared<bool>(true);
    cmd->add_option("--in", *in, "Input CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--attr", *attrs, "Attribute(s), repeatable or comma separated")->required()->delimiter(',');
    cmd->add_flag("--by-class", *by_class, "Group by class (the only grouping)");
    cmd->callback([&, in, attrs] {
      action = [&, in, attrs] {
        common.load();
        const auto table = read_table(*in);
        for (const auto& a : *attrs) {
          if (!table.schema().index_of(a)) throw UsageError("stats: unknown attribute '" + a + "'");
        }
        write_json(stats_to_json(box_panels(table, *attrs), violin_panels(table, *attrs)), common.out);
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("plot", "Render a figure from a JSON payload");
    add_common(cmd, common);
    auto kind = std::make_shared<std::string>();
    auto in = std::make_shared<std::string>();
    auto title = std::make_shared<std::optional<std::string>>();
    cmd->add_option("--kind", *kind, "importance | box | violin | heatmap")
        ->required()
        ->check(CLI::IsMember({"importance", "box", "violin", "heatmap"}));
    cmd->add_option("--in", *in, "Payload JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--title", *title, "Figure title");
    cmd->callback([&, kind, in, title] {
      action = [&, kind, in, title] {
        refuse_overwrite(*in, common.out);
        const auto c = common.load();
        const auto k = plot_kind_from_string(*kind);
        auto spec = c.plots.for_kind(k);
        if (*title) spec.title = **title;
        write_text(render_from_json(k, read_json_file(*in), spec, *in), common.out);
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("pipeline", "Regenerate every artifact and a hashed manifest");
    add_common(cmd, common, false);
    cmd->callback([&] {
      action = [&] {
        auto c = common.load();
        if (!common.out.empty()) c.output_dir = common.out;
        const auto manifest = run_pipeline(c, std::cout);
        std::cout << "manifest: " << (c.output_dir / "manifest.json").string() << " (" << manifest.status << ")\n";
        if (manifest.status != "ok") throw DataError(manifest.error);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    action();
    print_warnings(warnings, std::cerr);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    print_warnings(warnings, std::cerr);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
