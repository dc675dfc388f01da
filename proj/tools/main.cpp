#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rubriceval/dataset.hpp"
#include "rubriceval/errors.hpp"
#include "rubriceval/metrics.hpp"
#include "rubriceval/report.hpp"
#include "rubriceval/runner.hpp"

namespace fs = std::filesystem;
using namespace rubriceval;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct RunArgs {
  std::string dataset_path;
  std::string rubric_path;
  std::string judges_path;
  std::string out_dir = "experiments";
  std::string name;
  std::string resume_dir;
  std::string train_path;
  std::uint64_t seed = 42;
  int few_shot = 0;
  bool no_shuffle = false;
  bool include_reason = false;
  std::string strategy = "majority";
  std::string ca_strategy = "skip";
  double partial_credit = 0.5;
  int max_parallel = 64;
  bool quiet = false;
};

struct MetricsArgs {
  std::string experiment_dir;
  std::string dataset_path;
  int bootstrap = 1000;
  std::uint64_t seed = 0;
  bool per_judge = false;
};

RubricDataset load_dataset_with_override(const std::string& dataset_path,
                                         const std::string& rubric_path) {
  RubricDataset dataset = load_dataset(dataset_path);
  if (!rubric_path.empty()) {
    std::ifstream in(rubric_path);
    if (!in) throw LoadError("cannot open " + rubric_path);
    nlohmann::json doc = nlohmann::json::parse(in);
    // Accept either a bare rubric document or anything with a rubric key.
    dataset.rubric = rubric_from_json(doc.contains("rubric") ? doc.at("rubric") : doc);
    ensure_valid(dataset.rubric);
    for (const auto& item : dataset.items) {
      ground_truth_verdicts(dataset.rubric, item);  // revalidate alignment
    }
  }
  return dataset;
}

int cmd_run(const RunArgs& args) {
  RubricDataset dataset = load_dataset_with_override(args.dataset_path, args.rubric_path);
  std::vector<JudgeSpec> judges = load_judges(args.judges_path);
  if (args.no_shuffle) {
    for (auto& judge : judges) judge.config.shuffle_options = false;
  }

  std::vector<DatasetItem> train_items;
  if (!args.train_path.empty()) {
    RubricDataset train = load_dataset(args.train_path);
    train_items = train.items;
  }

  RunResult result;
  if (!args.resume_dir.empty()) {
    fs::path dir(args.resume_dir);
    if (!fs::exists(dir / "manifest.json")) {
      std::cerr << "error: no manifest in " << dir.string() << "\n";
      return kExitRuntime;
    }
    result = resume_run(dir, dataset, judges, default_backend_factory(), train_items);
  } else {
    EvalConfig config;
    config.experiment_name = args.name;
    config.experiments_dir = args.out_dir;
    config.master_seed = args.seed;
    config.aggregation = aggregation_strategy_from_string(args.strategy);
    config.cannot_assess.strategy = cannot_assess_strategy_from_string(args.ca_strategy);
    config.cannot_assess.partial_credit = args.partial_credit;
    config.global_max_parallel = args.max_parallel;
    config.show_progress = !args.quiet;
    if (args.few_shot > 0) {
      FewShotConfig few_shot;
      few_shot.n_examples = args.few_shot;
      few_shot.include_reason = args.include_reason;
      few_shot.seed = args.seed;
      config.few_shot = few_shot;
    }
    result = run_eval(dataset, judges, config, default_backend_factory(), train_items);
  }

  std::printf("Evaluated %d/%zu items\n", result.totals.items, dataset.items.size());
  if (result.timing) {
    std::printf("Throughput: %.2f items/s (p50 %.2fs, p95 %.2fs per item)\n",
                result.timing->items_per_second, result.timing->p50, result.timing->p95);
  }
  std::printf("Total Cost: %s (%d items, %s tokens)\n",
              format_cost(result.totals.cost).c_str(), result.totals.items,
              format_token_count(result.totals.tokens).c_str());
  std::printf("Experiment saved to: %s\n", result.experiment_dir.string().c_str());
  for (const auto& failure : result.failures) {
    std::fprintf(stderr, "failed: %s: %s\n", failure.item_id.c_str(),
                 failure.error.c_str());
  }
  return result.failures.empty() ? kExitOk : kExitRuntime;
}

int cmd_metrics(const MetricsArgs& args) {
  fs::path experiment_dir(args.experiment_dir);
  nlohmann::json manifest = load_manifest(experiment_dir);
  auto reports = load_item_records(experiment_dir / "items.jsonl");
  RubricDataset dataset = load_dataset(args.dataset_path);

  bool any_truth = false;
  for (const auto& item : dataset.items) any_truth |= item.ground_truth.has_value();
  if (!any_truth) {
    std::cerr << "error: dataset has no ground_truth labels to compare against\n";
    return kExitRuntime;
  }

  MetricsOptions options;
  options.n_bootstrap = args.bootstrap;
  options.seed = args.seed;
  const nlohmann::json& config = manifest.at("config");
  options.cannot_assess.strategy = cannot_assess_strategy_from_string(
      config.at("cannot_assess").at("strategy").get<std::string>());
  options.cannot_assess.partial_credit =
      config.at("cannot_assess").at("partial_credit").get<double>();

  MetricsSummary summary = compute_metrics(dataset.rubric, reports, dataset, options);
  if (!args.per_judge) summary.per_judge.clear();

  RunTotals totals;
  const nlohmann::json& totals_json = manifest.at("totals");
  totals.items = totals_json.at("items").get<int>();
  totals.cost = totals_json.at("cost").get<double>();
  totals.tokens = totals_json.at("tokens").get<std::int64_t>();
  totals.duration_seconds = totals_json.at("duration_seconds").get<double>();

  nlohmann::json metrics_json = metrics_to_json(summary);
  {
    std::ofstream out(experiment_dir / "metrics.json");
    if (!out) {
      std::cerr << "error: cannot write " << (experiment_dir / "metrics.json").string()
                << "\n";
      return kExitRuntime;
    }
    out << metrics_json.dump(2) << "\n";
  }

  std::cout << render_report(summary, totals);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rubric-based evaluation harness for LLM judges"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Evaluate a dataset with a judge panel");
  run->add_option("--dataset", run_args.dataset_path, "Dataset JSON (rubric + items)")
      ->required();
  run->add_option("--rubric", run_args.rubric_path,
                  "Rubric JSON overriding the dataset's rubric");
  run->add_option("--judges", run_args.judges_path, "Judge panel config JSON")->required();
  run->add_option("--out", run_args.out_dir, "Experiments root directory");
  run->add_option("--name", run_args.name, "Experiment name (default: generated)");
  run->add_option("--resume", run_args.resume_dir,
                  "Resume this experiment directory instead of starting fresh");
  run->add_option("--seed", run_args.seed, "Master seed");
  run->add_option("--few-shot", run_args.few_shot,
                  "Number of exemplars per criterion (0 = zero-shot)");
  run->add_option("--train", run_args.train_path,
                  "Labeled dataset supplying few-shot exemplars");
  run->add_flag("--include-reason", run_args.include_reason,
                "Render exemplar reasoning in few-shot blocks");
  run->add_flag("--no-shuffle", run_args.no_shuffle, "Disable option shuffling");
  run->add_option("--strategy", run_args.strategy,
                  "Ensemble aggregation: majority|weighted|unanimous|any|mean");
  run->add_option("--ca-strategy", run_args.ca_strategy,
                  "CANNOT_ASSESS handling: skip|zero|partial|fail");
  run->add_option("--partial-credit", run_args.partial_credit,
                  "Credit fraction for the partial strategy");
  run->add_option("--max-parallel", run_args.max_parallel,
                  "Global in-flight request ceiling");
  run->add_flag("--quiet", run_args.quiet, "Suppress per-item progress output");

  MetricsArgs metrics_args;
  CLI::App* metrics =
      app.add_subcommand("metrics", "Score an experiment against ground truth");
  metrics->add_option("--experiment", metrics_args.experiment_dir, "Experiment directory")
      ->required();
  metrics->add_option("--dataset", metrics_args.dataset_path,
                      "Dataset JSON with ground_truth labels")
      ->required();
  metrics->add_option("--bootstrap", metrics_args.bootstrap,
                      "Bootstrap resamples for CIs (0 disables)");
  metrics->add_option("--seed", metrics_args.seed, "Bootstrap seed");
  metrics->add_flag("--per-judge", metrics_args.per_judge,
                    "Include the per-judge breakdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& error) {
    app.exit(error);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (metrics->parsed()) return cmd_metrics(metrics_args);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
