// Python face of the library. Structured inputs and outputs cross the
// boundary as JSON strings: the schemas are already pinned by the file
// formats (dataset, judges config, items.jsonl, metrics.json), so the
// bindings stay a thin veneer instead of a parallel object model.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "rubriceval/calibration.hpp"
#include "rubriceval/dataset.hpp"
#include "rubriceval/ensemble.hpp"
#include "rubriceval/judging.hpp"
#include "rubriceval/metrics.hpp"
#include "rubriceval/report.hpp"
#include "rubriceval/runner.hpp"
#include "rubriceval/rubric.hpp"
#include "rubriceval/scoring.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace rubriceval;

namespace {

ConfusionMatrix matrix_from_counts(const std::vector<std::vector<std::int64_t>>& counts,
                                   std::vector<std::string> categories) {
  if (categories.empty()) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      categories.push_back(std::to_string(i));
    }
  }
  return ConfusionMatrix::from_counts(std::move(categories), counts);
}

std::vector<Verdict> verdicts_from_strings(const std::vector<std::string>& labels) {
  std::vector<Verdict> verdicts;
  verdicts.reserve(labels.size());
  for (const std::string& label : labels) verdicts.push_back(Verdict::from_string(label));
  return verdicts;
}

CannotAssessConfig ca_config(const std::string& strategy, double partial_credit) {
  CannotAssessConfig config;
  config.strategy = cannot_assess_strategy_from_string(strategy);
  config.partial_credit = partial_credit;
  return config;
}

nlohmann::json totals_to_json(const RunTotals& totals) {
  return {{"items", totals.items},
          {"cost", totals.cost},
          {"tokens", totals.tokens},
          {"duration_seconds", totals.duration_seconds}};
}

std::string run_result_to_json(const RunResult& result) {
  nlohmann::json out;
  out["experiment_dir"] = result.experiment_dir.string();
  out["totals"] = totals_to_json(result.totals);
  out["reports"] = nlohmann::json::array();
  for (const auto& report : result.reports) {
    out["reports"].push_back(item_record_to_json(report));
  }
  out["failures"] = nlohmann::json::array();
  for (const auto& failure : result.failures) {
    out["failures"].push_back({{"item_id", failure.item_id}, {"error", failure.error}});
  }
  if (result.timing) {
    out["timing"] = {{"mean", result.timing->mean},
                     {"min", result.timing->min},
                     {"max", result.timing->max},
                     {"p50", result.timing->p50},
                     {"p95", result.timing->p95},
                     {"items_per_second", result.timing->items_per_second}};
  }
  return out.dump();
}

std::string run_eval_json(const std::string& dataset_json, const std::string& judges_json,
                          const std::string& experiment_name,
                          const std::string& experiments_dir, std::uint64_t seed,
                          const std::string& aggregation, const std::string& ca_strategy,
                          double partial_credit, int few_shot_n, bool include_reason,
                          const std::string& train_dataset_json, int max_parallel) {
  RubricDataset dataset = dataset_from_json(nlohmann::json::parse(dataset_json));
  std::vector<JudgeSpec> judges = judges_from_json(nlohmann::json::parse(judges_json));

  EvalConfig config;
  config.experiment_name = experiment_name;
  config.experiments_dir = experiments_dir;
  config.master_seed = seed;
  config.aggregation = aggregation_strategy_from_string(aggregation);
  config.cannot_assess = ca_config(ca_strategy, partial_credit);
  config.global_max_parallel = max_parallel;

  std::vector<DatasetItem> train_items;
  if (few_shot_n > 0) {
    FewShotConfig few_shot;
    few_shot.n_examples = few_shot_n;
    few_shot.include_reason = include_reason;
    few_shot.seed = seed;
    config.few_shot = few_shot;
    if (!train_dataset_json.empty()) {
      train_items = dataset_from_json(nlohmann::json::parse(train_dataset_json)).items;
    }
  }

  RunResult result = run_eval(dataset, judges, config, default_backend_factory(),
                              train_items);
  return run_result_to_json(result);
}

std::string resume_eval_json(const std::string& experiment_dir,
                             const std::string& dataset_json,
                             const std::string& judges_json,
                             const std::string& train_dataset_json) {
  RubricDataset dataset = dataset_from_json(nlohmann::json::parse(dataset_json));
  std::vector<JudgeSpec> judges = judges_from_json(nlohmann::json::parse(judges_json));
  std::vector<DatasetItem> train_items;
  if (!train_dataset_json.empty()) {
    train_items = dataset_from_json(nlohmann::json::parse(train_dataset_json)).items;
  }
  RunResult result = resume_run(experiment_dir, dataset, judges,
                                default_backend_factory(), train_items);
  return run_result_to_json(result);
}

struct ExperimentMetrics {
  MetricsSummary summary;
  RunTotals totals;
};

// Joins a finished experiment directory with its labeled dataset, taking
// the CANNOT_ASSESS policy from the run manifest so reference scores are
// encoded the same way the predictions were.
ExperimentMetrics experiment_metrics(const std::string& dataset_json,
                                     const std::string& experiment_dir, int n_bootstrap,
                                     std::uint64_t seed) {
  RubricDataset dataset = dataset_from_json(nlohmann::json::parse(dataset_json));
  std::vector<EnsembleEvaluationReport> reports =
      load_item_records(fs::path(experiment_dir) / "items.jsonl");
  nlohmann::json manifest = load_manifest(experiment_dir);

  MetricsOptions options;
  options.n_bootstrap = n_bootstrap;
  options.seed = seed;
  if (manifest.contains("config") && manifest["config"].contains("cannot_assess")) {
    const nlohmann::json& ca = manifest["config"]["cannot_assess"];
    options.cannot_assess =
        ca_config(ca.value("strategy", "skip"), ca.value("partial_credit", 0.5));
  }

  ExperimentMetrics out;
  out.summary = compute_metrics(dataset.rubric, reports, dataset, options);
  if (manifest.contains("totals")) {
    const nlohmann::json& totals = manifest["totals"];
    out.totals.items = totals.value("items", 0);
    out.totals.cost = totals.value("cost", 0.0);
    out.totals.tokens = totals.value("tokens", std::int64_t{0});
    out.totals.duration_seconds = totals.value("duration_seconds", 0.0);
  }
  return out;
}

std::string compute_metrics_json(const std::string& dataset_json,
                                 const std::string& experiment_dir, int n_bootstrap,
                                 std::uint64_t seed) {
  return metrics_to_json(
             experiment_metrics(dataset_json, experiment_dir, n_bootstrap, seed).summary)
      .dump();
}

std::string render_report_py(const std::string& dataset_json,
                             const std::string& experiment_dir, int n_bootstrap,
                             std::uint64_t seed) {
  ExperimentMetrics em = experiment_metrics(dataset_json, experiment_dir, n_bootstrap, seed);
  return render_report(em.summary, em.totals);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rubric-based evaluation harness for LLM judges";
  m.attr("__version__") = "0.1.0";

  py::register_exception<Error>(m, "Error");

  m.def(
      "validate_rubric",
      [](const std::string& rubric_json) {
        Rubric rubric = rubric_from_json(nlohmann::json::parse(rubric_json));
        std::vector<std::pair<std::string, std::string>> out;
        for (const RubricViolation& v : validate_rubric(rubric)) {
          out.emplace_back(v.criterion_id, v.message);
        }
        return out;
      },
      py::arg("rubric_json"),
      "Structural checks on a rubric document; returns (criterion_id, message) pairs, "
      "empty when the rubric is valid.");

  m.def(
      "score",
      [](const std::string& rubric_json, const std::vector<std::string>& verdicts,
         const std::string& ca_strategy, double partial_credit) {
        Rubric rubric = rubric_from_json(nlohmann::json::parse(rubric_json));
        return aggregate_score(rubric, verdicts_from_strings(verdicts),
                               ca_config(ca_strategy, partial_credit));
      },
      py::arg("rubric_json"), py::arg("verdicts"), py::arg("ca_strategy") = "skip",
      py::arg("partial_credit") = 0.5,
      "Weighted rubric score in [0, 1] for positional verdict labels "
      "(\"MET\", \"UNMET\", \"CANNOT_ASSESS\", \"CHOICE:<i>\").");

  m.def(
      "aggregate_votes",
      [](const std::vector<std::string>& verdicts, const std::vector<double>& weights,
         const std::string& strategy) {
        std::vector<WeightedVerdict> votes;
        for (std::size_t i = 0; i < verdicts.size(); ++i) {
          votes.push_back({Verdict::from_string(verdicts[i]),
                           i < weights.size() ? weights[i] : 1.0});
        }
        return aggregate_binary_votes(votes, aggregation_strategy_from_string(strategy))
            .to_string();
      },
      py::arg("verdicts"), py::arg("weights") = std::vector<double>{},
      py::arg("strategy") = "majority",
      "Combine binary panel votes; returns the aggregated verdict label.");

  m.def(
      "cohen_kappa",
      [](const std::vector<std::vector<std::int64_t>>& counts,
         std::vector<std::string> categories) {
        return cohen_kappa(matrix_from_counts(counts, std::move(categories)));
      },
      py::arg("counts"), py::arg("categories") = std::vector<std::string>{});

  m.def(
      "weighted_kappa",
      [](const std::vector<std::vector<std::int64_t>>& counts,
         std::vector<std::string> categories) {
        return weighted_kappa(matrix_from_counts(counts, std::move(categories)));
      },
      py::arg("counts"), py::arg("categories") = std::vector<std::string>{},
      "Quadratic-weighted kappa over an ordered contingency table.");

  m.def(
      "adjacent_accuracy",
      [](const std::vector<std::vector<std::int64_t>>& counts,
         std::vector<std::string> categories) {
        return adjacent_accuracy(matrix_from_counts(counts, std::move(categories)));
      },
      py::arg("counts"), py::arg("categories") = std::vector<std::string>{});

  m.def(
      "ordinal_emd",
      [](const std::vector<double>& reference, const std::vector<double>& predicted) {
        return ordinal_emd(reference, predicted);
      },
      py::arg("reference"), py::arg("predicted"),
      "Earth mover's distance between two ordinal marginals, in scale steps.");

  m.def("mcnemar_exact", &mcnemar_exact, py::arg("b"), py::arg("c"),
        "Exact two-sided McNemar p-value from discordant pair counts.");

  m.def(
      "bootstrap_ci_mean",
      [](const std::vector<double>& sample, int n_resamples, double level,
         std::uint64_t seed) {
        auto mean = [](std::span<const double> xs) {
          return std::accumulate(xs.begin(), xs.end(), 0.0) /
                 static_cast<double>(xs.size());
        };
        return bootstrap_ci(mean, sample, n_resamples, level, seed);
      },
      py::arg("sample"), py::arg("n_resamples") = 1000, py::arg("level") = 0.95,
      py::arg("seed") = 0,
      "Percentile bootstrap interval for the sample mean.");

  m.def("derive_item_seed", &derive_item_seed, py::arg("master_seed"), py::arg("item_id"),
        py::arg("criterion_id"), py::arg("judge_name"),
        "Per-call RNG seed; part of the reproducibility contract.");

  m.def("run_eval", &run_eval_json, py::arg("dataset_json"), py::arg("judges_json"),
        py::arg("experiment_name") = "", py::arg("experiments_dir") = "experiments",
        py::arg("seed") = 42, py::arg("aggregation") = "majority",
        py::arg("ca_strategy") = "skip", py::arg("partial_credit") = 0.5,
        py::arg("few_shot") = 0, py::arg("include_reason") = false,
        py::arg("train_dataset_json") = "", py::arg("max_parallel") = 64,
        py::call_guard<py::gil_scoped_release>(),
        "Evaluate a dataset with a judge panel; returns the run result as a JSON "
        "string and checkpoints under experiments_dir.");

  m.def("resume_run", &resume_eval_json, py::arg("experiment_dir"),
        py::arg("dataset_json"), py::arg("judges_json"),
        py::arg("train_dataset_json") = "",
        py::call_guard<py::gil_scoped_release>(),
        "Finish an interrupted run; refuses when the inputs do not match the "
        "experiment manifest.");

  m.def("compute_metrics", &compute_metrics_json, py::arg("dataset_json"),
        py::arg("experiment_dir"), py::arg("n_bootstrap") = 1000, py::arg("seed") = 0,
        py::call_guard<py::gil_scoped_release>(),
        "Agreement and error metrics of a finished experiment against ground truth, "
        "as a JSON string.");

  m.def("render_report", &render_report_py, py::arg("dataset_json"),
        py::arg("experiment_dir"), py::arg("n_bootstrap") = 1000, py::arg("seed") = 0,
        py::call_guard<py::gil_scoped_release>(),
        "Plain-text metrics report for a finished experiment.");
}
