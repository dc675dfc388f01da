#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rubriceval/calibration.hpp"
#include "rubriceval/dataset.hpp"
#include "rubriceval/ensemble.hpp"
#include "rubriceval/scoring.hpp"

namespace rubriceval {

struct EvalConfig {
  std::string experiment_name;  // generated (adjective-animal) when empty
  std::filesystem::path experiments_dir = "experiments";
  bool resume = false;
  std::uint64_t master_seed = 42;
  CannotAssessConfig cannot_assess;
  // Run-level strategy. Binary criteria fall back from Mean to Majority,
  // multi-option ones from Unanimous/Any to Majority, since those pairings
  // are undefined.
  AggregationStrategy aggregation = AggregationStrategy::Majority;
  std::optional<FewShotConfig> few_shot;
  int global_max_parallel = 64;  // in-flight ceiling across all providers
  bool show_progress = false;    // per-item counter on stdout
};

struct TimingStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  double items_per_second = 0.0;
};

// Percentiles are nearest-rank: value at index ceil(p*n) (1-based).
TimingStats timing_stats(std::span<const double> durations);

struct RunTotals {
  int items = 0;
  double cost = 0.0;
  std::int64_t tokens = 0;
  double duration_seconds = 0.0;
};

struct ItemFailure {
  std::string item_id;
  std::string error;
};

struct RunResult {
  std::vector<EnsembleEvaluationReport> reports;  // dataset order, completed items
  RunTotals totals;
  std::optional<TimingStats> timing;
  std::filesystem::path experiment_dir;
  std::vector<ItemFailure> failures;
};

// Builds the transport stack for one judge: scripted_responses_path maps to
// a ScriptedBackend, endpoint_url to an HttpBackend, and cache_enabled
// wraps either in a CachingBackend. Tests inject instrumented stacks.
using BackendFactory =
    std::function<std::shared_ptr<JudgeBackend>(const JudgeSpec& spec)>;

BackendFactory default_backend_factory();

// Evaluate every item against every judge and criterion. Per item, the
// N judges x M criteria calls fan out concurrently, bounded per provider by
// each judge's max_parallel_requests and globally by global_max_parallel;
// items themselves run sequentially so checkpoint order is stable. Each
// completed item appends one line to items.jsonl; the manifest (carrying
// the master seed and the full config snapshot) is written before the
// first call and finalized with totals at the end. Item-level failures
// (transport exhaustion, scripted gaps) are recorded and skipped.
//
// `train_items` supplies the few-shot exemplar pool when config.few_shot
// is set; exemplars are sampled once per criterion and shared.
RunResult run_eval(const RubricDataset& dataset, const std::vector<JudgeSpec>& judges,
                   const EvalConfig& config,
                   const BackendFactory& factory = default_backend_factory(),
                   std::span<const DatasetItem> train_items = {});

// Continue an interrupted run: completed items are loaded from items.jsonl
// and not re-evaluated; master seed and grader config come from the
// manifest. The supplied dataset/judges must snapshot-match the manifest
// (same rubric, judges, seed, strategies, items) or this refuses with
// ConfigError rather than silently diverging.
RunResult resume_run(const std::filesystem::path& experiment_dir,
                     const RubricDataset& dataset, const std::vector<JudgeSpec>& judges,
                     const BackendFactory& factory = default_backend_factory(),
                     std::span<const DatasetItem> train_items = {});

// items.jsonl line <-> report. Timing lives in its own field so resume
// comparisons can ignore it.
nlohmann::json item_record_to_json(const EnsembleEvaluationReport& report);
EnsembleEvaluationReport item_record_from_json(const nlohmann::json& line);

std::vector<EnsembleEvaluationReport> load_item_records(
    const std::filesystem::path& items_jsonl);
nlohmann::json load_manifest(const std::filesystem::path& experiment_dir);

// Judges config file: {"judges": [{name, model_id, ...}]}. Documented in
// the README; weight > 0 enforced here.
std::vector<JudgeSpec> judges_from_json(const nlohmann::json& doc);
std::vector<JudgeSpec> load_judges(const std::filesystem::path& path);
nlohmann::json judge_spec_to_json(const JudgeSpec& spec);

// "slim-deer"-style experiment names; suffixes -2, -3, ... on collision
// within the experiments dir.
std::string generate_experiment_name(const std::filesystem::path& experiments_dir);

}  // namespace rubriceval
