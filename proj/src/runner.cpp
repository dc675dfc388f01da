#include "rubriceval/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <future>
#include <mutex>
#include <queue>
#include <set>
#include <sstream>
#include <thread>

#include "rubriceval/cache.hpp"
#include "rubriceval/errors.hpp"
#include "rubriceval/rng.hpp"

namespace rubriceval {
namespace {

namespace fs = std::filesystem;

class ThreadPool {
 public:
  explicit ThreadPool(int n_threads) {
    n_threads = std::max(1, n_threads);
    workers_.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) {
      workers_.emplace_back([this] { worker_loop(); });
    }
  }

  ~ThreadPool() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& worker : workers_) worker.join();
  }

  void submit(std::function<void()> task) {
    {
      std::lock_guard lock(mutex_);
      tasks_.push(std::move(task));
    }
    cv_.notify_one();
  }

 private:
  void worker_loop() {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return stopping_ || !tasks_.empty(); });
        if (stopping_ && tasks_.empty()) return;
        task = std::move(tasks_.front());
        tasks_.pop();
      }
      task();
    }
  }

  std::mutex mutex_;
  std::condition_variable cv_;
  std::queue<std::function<void()>> tasks_;
  std::vector<std::thread> workers_;
  bool stopping_ = false;
};

// Counting semaphore sized at runtime (std::counting_semaphore wants its
// ceiling at compile time).
class Semaphore {
 public:
  explicit Semaphore(int count) : count_(std::max(1, count)) {}

  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [this] { return count_ > 0; });
    --count_;
  }

  void release() {
    {
      std::lock_guard lock(mutex_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int count_;
};

struct SemaphoreGuard {
  Semaphore& sem;
  explicit SemaphoreGuard(Semaphore& s) : sem(s) { sem.acquire(); }
  ~SemaphoreGuard() { sem.release(); }
};

// Requests to the same provider share one in-flight budget even when two
// judge entries differ only in model. Scripted judges group by replay file.
std::string provider_key(const JudgeConfig& config) {
  if (config.scripted_responses_path) return "scripted:" + *config.scripted_responses_path;
  const std::string& url = config.endpoint_url;
  auto scheme_end = url.find("://");
  auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto host_end = url.find('/', host_start);
  return url.substr(0, host_end);
}

AggregationStrategy effective_strategy(AggregationStrategy requested,
                                       const Criterion& criterion) {
  if (criterion.scale_type == ScaleType::Binary) {
    return requested == AggregationStrategy::Mean ? AggregationStrategy::Majority
                                                  : requested;
  }
  if (requested == AggregationStrategy::Unanimous || requested == AggregationStrategy::Any) {
    return AggregationStrategy::Majority;
  }
  return requested;
}

std::string iso8601_utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t seconds = std::chrono::system_clock::to_time_t(now);
  std::tm utc{};
  gmtime_r(&seconds, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

nlohmann::json config_snapshot(const RubricDataset& dataset,
                               const std::vector<JudgeSpec>& judges,
                               const EvalConfig& config,
                               std::span<const DatasetItem> train_items) {
  nlohmann::json judges_json = nlohmann::json::array();
  for (const auto& judge : judges) judges_json.push_back(judge_spec_to_json(judge));

  nlohmann::json item_ids = nlohmann::json::array();
  for (const auto& item : dataset.items) item_ids.push_back(item.item_id);

  nlohmann::json snapshot{
      {"master_seed", config.master_seed},
      {"aggregation", to_string(config.aggregation)},
      {"cannot_assess",
       {{"strategy", to_string(config.cannot_assess.strategy)},
        {"partial_credit", config.cannot_assess.partial_credit}}},
      {"judges", judges_json},
      {"rubric", rubric_to_json(dataset.rubric)},
      {"item_ids", item_ids},
  };
  if (dataset.task_prompt) snapshot["task_prompt"] = *dataset.task_prompt;
  if (config.few_shot) {
    nlohmann::json train_ids = nlohmann::json::array();
    for (const auto& item : train_items) train_ids.push_back(item.item_id);
    snapshot["few_shot"] = {{"n_examples", config.few_shot->n_examples},
                            {"balance_verdicts", config.few_shot->balance_verdicts},
                            {"include_reason", config.few_shot->include_reason},
                            {"seed", config.few_shot->seed},
                            {"train_item_ids", train_ids}};
  }
  return snapshot;
}

void write_json_atomic(const nlohmann::json& doc, const fs::path& path) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw LoadError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
  }
  fs::rename(tmp, path);
}

void write_manifest(const fs::path& dir, const std::string& experiment_name,
                    const std::string& created_at, const nlohmann::json& snapshot,
                    const std::string& status, const RunTotals& totals,
                    const std::optional<TimingStats>& timing) {
  nlohmann::json manifest{
      {"version", 1},
      {"experiment_name", experiment_name},
      {"created_at", created_at},
      {"status", status},
      {"config", snapshot},
      {"totals",
       {{"items", totals.items},
        {"cost", totals.cost},
        {"tokens", totals.tokens},
        {"duration_seconds", totals.duration_seconds}}},
  };
  if (timing) {
    manifest["timing"] = {{"mean", timing->mean}, {"min", timing->min},
                          {"max", timing->max},   {"p50", timing->p50},
                          {"p95", timing->p95},   {"items_per_second", timing->items_per_second}};
  }
  write_json_atomic(manifest, dir / "manifest.json");
}

struct CallOutput {
  JudgeCallResult result;
  std::optional<std::string> error;
};

struct ItemEvalContext {
  const RubricDataset& dataset;
  const std::vector<JudgeSpec>& judges;
  const EvalConfig& config;
  const std::vector<std::string>& exemplar_blocks;  // per criterion
  std::vector<std::shared_ptr<JudgeBackend>>& backends;
  std::vector<std::shared_ptr<Semaphore>>& judge_semaphores;
  ThreadPool& pool;
  Semaphore& global_slots;
};

// One item: fan out all judge x criterion calls, join, aggregate.
EnsembleEvaluationReport evaluate_item(const ItemEvalContext& ctx, const DatasetItem& item) {
  const Rubric& rubric = ctx.dataset.rubric;
  const std::size_t n_criteria = rubric.size();
  const std::size_t n_judges = ctx.judges.size();
  const std::string task_prompt = ctx.dataset.task_prompt.value_or("");

  auto started = std::chrono::steady_clock::now();

  std::vector<CallOutput> outputs(n_criteria * n_judges);
  {
    std::atomic<std::size_t> remaining{n_criteria * n_judges};
    std::mutex done_mutex;
    std::condition_variable done_cv;

    for (std::size_t c = 0; c < n_criteria; ++c) {
      for (std::size_t j = 0; j < n_judges; ++j) {
        ctx.pool.submit([&, c, j] {
          CallOutput& slot = outputs[c * n_judges + j];
          try {
            SemaphoreGuard global(ctx.global_slots);
            SemaphoreGuard provider(*ctx.judge_semaphores[j]);
            slot.result = judge_criterion(
                *ctx.backends[j], ctx.judges[j].config, rubric.at(c), item.submission,
                task_prompt, ctx.exemplar_blocks[c], ctx.config.master_seed, item.item_id,
                ctx.judges[j].name);
          } catch (const std::exception& error) {
            slot.error = error.what();
          }
          if (remaining.fetch_sub(1) == 1) {
            std::lock_guard lock(done_mutex);
            done_cv.notify_all();
          }
        });
      }
    }
    std::unique_lock lock(done_mutex);
    done_cv.wait(lock, [&] { return remaining.load() == 0; });
  }

  // A judge that could not be reached at all fails the item; per-call parse
  // trouble was already degraded to CANNOT_ASSESS inside judge_criterion.
  for (std::size_t c = 0; c < n_criteria; ++c) {
    for (std::size_t j = 0; j < n_judges; ++j) {
      const CallOutput& out = outputs[c * n_judges + j];
      if (out.error) {
        throw TransportError("judge '" + ctx.judges[j].name + "' on criterion '" +
                             rubric.at(c).id + "': " + *out.error);
      }
    }
  }

  EnsembleEvaluationReport report;
  report.item_id = item.item_id;

  std::vector<CriterionOutcome> outcomes;
  outcomes.reserve(n_criteria);
  std::vector<std::vector<Verdict>> votes_by_criterion(n_criteria);

  for (std::size_t c = 0; c < n_criteria; ++c) {
    const Criterion& criterion = rubric.at(c);
    CriterionReport criterion_report;
    criterion_report.criterion_id = criterion.id;

    std::vector<WeightedVerdict> weighted;
    weighted.reserve(n_judges);
    for (std::size_t j = 0; j < n_judges; ++j) {
      const CallOutput& out = outputs[c * n_judges + j];
      criterion_report.votes.push_back(out.result.vote);
      report.total_cost += out.result.cost;
      report.total_tokens += out.result.prompt_tokens + out.result.completion_tokens;
      weighted.push_back({out.result.vote.verdict, ctx.judges[j].vote_weight});
      votes_by_criterion[c].push_back(out.result.vote.verdict);
    }

    AggregationStrategy strategy = effective_strategy(ctx.config.aggregation, criterion);
    CriterionOutcome outcome;
    if (criterion.scale_type == ScaleType::Binary) {
      outcome.verdict = aggregate_binary_votes(weighted, strategy);
    } else {
      AggregatedChoice choice = aggregate_choice_votes(criterion, weighted, strategy);
      outcome.verdict = choice.verdict;
      outcome.value_override = choice.mean_value;
    }
    criterion_report.verdict = outcome.verdict;
    criterion_report.value = outcome.value_override;

    // The panel verdict needs a reason; borrow the first agreeing judge's,
    // falling back to the first vote when nobody matches (mean verdicts).
    for (std::size_t j = 0; j < n_judges; ++j) {
      if (criterion_report.votes[j].verdict == outcome.verdict) {
        criterion_report.reason = criterion_report.votes[j].reason;
        break;
      }
    }
    if (criterion_report.reason.empty() && !criterion_report.votes.empty()) {
      criterion_report.reason = criterion_report.votes.front().reason;
    }

    outcomes.push_back(outcome);
    report.criteria.push_back(std::move(criterion_report));
  }

  report.score = aggregate_score(rubric, outcomes, ctx.config.cannot_assess);
  report.mean_agreement = mean_agreement(votes_by_criterion);
  report.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

void validate_judges(const std::vector<JudgeSpec>& judges) {
  if (judges.empty()) throw ConfigError("at least one judge is required");
  std::set<std::string> names;
  for (const auto& judge : judges) {
    if (judge.name.empty()) throw ConfigError("judge name must be nonempty");
    if (!names.insert(judge.name).second) {
      throw ConfigError("duplicate judge name '" + judge.name + "'");
    }
    if (judge.vote_weight <= 0.0) {
      throw ConfigError("judge '" + judge.name + "' has non-positive vote weight");
    }
    if (!judge.config.scripted_responses_path && judge.config.endpoint_url.empty()) {
      throw ConfigError("judge '" + judge.name +
                        "' needs an endpoint_url or scripted_responses_path");
    }
  }
}

std::vector<std::string> build_exemplar_blocks(const RubricDataset& dataset,
                                               const EvalConfig& config,
                                               std::span<const DatasetItem> train_items) {
  std::vector<std::string> blocks(dataset.rubric.size());
  if (!config.few_shot) return blocks;
  if (train_items.empty()) {
    throw ConfigError("few-shot prompting requires a train split");
  }
  std::vector<DatasetItem> train(train_items.begin(), train_items.end());
  for (std::size_t c = 0; c < dataset.rubric.size(); ++c) {
    auto exemplars = sample_few_shot(train, dataset.rubric, c, *config.few_shot);
    blocks[c] = render_exemplars(exemplars, config.few_shot->include_reason);
  }
  return blocks;
}

struct RunState {
  fs::path experiment_dir;
  std::string experiment_name;
  std::string created_at;
  nlohmann::json snapshot;
  std::vector<EnsembleEvaluationReport> completed;  // from a resumed run
};

RunResult run_common(const RubricDataset& dataset, const std::vector<JudgeSpec>& judges,
                     const EvalConfig& config, const BackendFactory& factory,
                     std::span<const DatasetItem> train_items, RunState state) {
  validate_judges(judges);
  ensure_valid(dataset.rubric);

  std::set<std::string> done;
  for (const auto& report : state.completed) done.insert(report.item_id);

  auto exemplar_blocks = build_exemplar_blocks(dataset, config, train_items);

  std::vector<std::shared_ptr<JudgeBackend>> backends;
  backends.reserve(judges.size());
  for (const auto& judge : judges) backends.push_back(factory(judge));

  // Judges pointing at the same provider share one semaphore; the smallest
  // configured limit wins so no judge's ceiling is exceeded.
  std::map<std::string, std::shared_ptr<Semaphore>> providers;
  std::map<std::string, int> provider_limits;
  for (const auto& judge : judges) {
    std::string key = provider_key(judge.config);
    auto [it, inserted] = provider_limits.try_emplace(key, judge.config.max_parallel_requests);
    if (!inserted) it->second = std::min(it->second, judge.config.max_parallel_requests);
  }
  for (const auto& [key, limit] : provider_limits) {
    providers[key] = std::make_shared<Semaphore>(limit);
  }
  std::vector<std::shared_ptr<Semaphore>> judge_semaphores;
  judge_semaphores.reserve(judges.size());
  for (const auto& judge : judges) {
    judge_semaphores.push_back(providers.at(provider_key(judge.config)));
  }

  ThreadPool pool(config.global_max_parallel);
  Semaphore global_slots(config.global_max_parallel);

  RunResult result;
  result.experiment_dir = state.experiment_dir;
  result.reports = std::move(state.completed);

  RunTotals totals;
  for (const auto& report : result.reports) {
    ++totals.items;
    totals.cost += report.total_cost;
    totals.tokens += report.total_tokens;
    totals.duration_seconds += report.duration_seconds;
  }

  write_manifest(state.experiment_dir, state.experiment_name, state.created_at,
                 state.snapshot, "running", totals, std::nullopt);

  std::ofstream items_out(state.experiment_dir / "items.jsonl", std::ios::app);
  if (!items_out) {
    throw LoadError("cannot open " + (state.experiment_dir / "items.jsonl").string());
  }

  ItemEvalContext ctx{dataset,  judges,          config, exemplar_blocks,
                      backends, judge_semaphores, pool,   global_slots};

  std::size_t position = 0;
  for (const auto& item : dataset.items) {
    ++position;
    if (done.count(item.item_id)) continue;
    if (config.show_progress) {
      std::fprintf(stderr, "[%zu/%zu] %s\n", position, dataset.items.size(),
                   item.item_id.c_str());
    }
    try {
      EnsembleEvaluationReport report = evaluate_item(ctx, item);
      ++totals.items;
      totals.cost += report.total_cost;
      totals.tokens += report.total_tokens;
      totals.duration_seconds += report.duration_seconds;
      items_out << item_record_to_json(report).dump() << '\n';
      items_out.flush();
      result.reports.push_back(std::move(report));
    } catch (const std::exception& error) {
      result.failures.push_back({item.item_id, error.what()});
    }
  }

  // Keep dataset order in the final report list regardless of which items
  // came from the checkpoint.
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < dataset.items.size(); ++i) order[dataset.items[i].item_id] = i;
  std::sort(result.reports.begin(), result.reports.end(),
            [&](const auto& a, const auto& b) { return order[a.item_id] < order[b.item_id]; });

  std::vector<double> durations;
  durations.reserve(result.reports.size());
  for (const auto& report : result.reports) durations.push_back(report.duration_seconds);
  if (!durations.empty()) result.timing = timing_stats(durations);

  result.totals = totals;
  std::string status = result.failures.empty() ? "completed" : "completed_with_failures";
  write_manifest(state.experiment_dir, state.experiment_name, state.created_at,
                 state.snapshot, status, totals, result.timing);

  if (!result.failures.empty()) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& failure : result.failures) {
      failures.push_back({{"item_id", failure.item_id}, {"error", failure.error}});
    }
    write_json_atomic(failures, state.experiment_dir / "failures.json");
  }
  return result;
}

}  // namespace

TimingStats timing_stats(std::span<const double> durations) {
  TimingStats stats;
  if (durations.empty()) return stats;
  std::vector<double> sorted(durations.begin(), durations.end());
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double d : sorted) total += d;
  const auto n = sorted.size();
  stats.mean = total / static_cast<double>(n);
  stats.min = sorted.front();
  stats.max = sorted.back();
  auto nearest_rank = [&](double p) {
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted[rank - 1];
  };
  stats.p50 = nearest_rank(0.50);
  stats.p95 = nearest_rank(0.95);
  if (total > 0.0) stats.items_per_second = static_cast<double>(n) / total;
  return stats;
}

BackendFactory default_backend_factory() {
  return [](const JudgeSpec& spec) -> std::shared_ptr<JudgeBackend> {
    std::shared_ptr<JudgeBackend> backend;
    if (spec.config.scripted_responses_path) {
      backend = std::make_shared<ScriptedBackend>(
          ScriptedBackend::from_jsonl(*spec.config.scripted_responses_path));
    } else {
      HttpBackend::Options options;
      options.endpoint_url = spec.config.endpoint_url;
      options.api_key_env_var = spec.config.api_key_env_var;
      options.prompt_cost_per_million = spec.config.prompt_cost_per_million;
      options.completion_cost_per_million = spec.config.completion_cost_per_million;
      options.timeout_seconds = spec.config.timeout_seconds;
      backend = std::make_shared<HttpBackend>(options);
    }
    if (spec.config.cache_enabled) {
      backend = std::make_shared<CachingBackend>(
          backend, ResponseCache(spec.config.cache_dir, spec.config.cache_ttl_seconds));
    }
    return backend;
  };
}

RunResult run_eval(const RubricDataset& dataset, const std::vector<JudgeSpec>& judges,
                   const EvalConfig& config, const BackendFactory& factory,
                   std::span<const DatasetItem> train_items) {
  RunState state;
  state.experiment_name = config.experiment_name.empty()
                              ? generate_experiment_name(config.experiments_dir)
                              : config.experiment_name;
  state.experiment_dir = config.experiments_dir / state.experiment_name;
  if (fs::exists(state.experiment_dir / "manifest.json")) {
    throw ConfigError("experiment '" + state.experiment_name +
                      "' already exists; resume it or pick another name");
  }
  fs::create_directories(state.experiment_dir);
  state.created_at = iso8601_utc_now();
  state.snapshot = config_snapshot(dataset, judges, config, train_items);
  return run_common(dataset, judges, config, factory, train_items, std::move(state));
}

RunResult resume_run(const std::filesystem::path& experiment_dir,
                     const RubricDataset& dataset, const std::vector<JudgeSpec>& judges,
                     const BackendFactory& factory, std::span<const DatasetItem> train_items) {
  nlohmann::json manifest = load_manifest(experiment_dir);

  EvalConfig config;
  config.experiment_name = manifest.at("experiment_name").get<std::string>();
  config.experiments_dir = experiment_dir.parent_path();
  const nlohmann::json& saved = manifest.at("config");
  config.master_seed = saved.at("master_seed").get<std::uint64_t>();
  config.aggregation = aggregation_strategy_from_string(saved.at("aggregation").get<std::string>());
  config.cannot_assess.strategy =
      cannot_assess_strategy_from_string(saved.at("cannot_assess").at("strategy").get<std::string>());
  config.cannot_assess.partial_credit =
      saved.at("cannot_assess").at("partial_credit").get<double>();
  if (saved.contains("few_shot")) {
    FewShotConfig few_shot;
    few_shot.n_examples = saved.at("few_shot").at("n_examples").get<int>();
    few_shot.balance_verdicts = saved.at("few_shot").at("balance_verdicts").get<bool>();
    few_shot.include_reason = saved.at("few_shot").at("include_reason").get<bool>();
    few_shot.seed = saved.at("few_shot").at("seed").get<std::uint64_t>();
    config.few_shot = few_shot;
  }

  RunState state;
  state.experiment_dir = experiment_dir;
  state.experiment_name = config.experiment_name;
  state.created_at = manifest.at("created_at").get<std::string>();
  state.snapshot = config_snapshot(dataset, judges, config, train_items);

  // Apples-to-apples or nothing: a resumed run must evaluate the same
  // dataset with the same panel under the same knobs.
  if (state.snapshot != saved) {
    throw ConfigError("resume refused: supplied dataset/judges/config do not match manifest");
  }

  fs::path items_path = experiment_dir / "items.jsonl";
  if (fs::exists(items_path)) state.completed = load_item_records(items_path);

  // Drop checkpoint entries that no longer correspond to a dataset item
  // (should not happen given the snapshot check, but stay defensive).
  std::set<std::string> known;
  for (const auto& item : dataset.items) known.insert(item.item_id);
  std::erase_if(state.completed,
                [&](const auto& report) { return !known.count(report.item_id); });

  return run_common(dataset, judges, config, factory, train_items, std::move(state));
}

nlohmann::json item_record_to_json(const EnsembleEvaluationReport& report) {
  nlohmann::json criteria = nlohmann::json::array();
  for (const auto& criterion : report.criteria) {
    nlohmann::json votes = nlohmann::json::array();
    for (const auto& vote : criterion.votes) {
      votes.push_back({{"judge", vote.judge_name},
                       {"verdict", vote.verdict.to_string()},
                       {"reason", vote.reason}});
    }
    nlohmann::json entry{{"criterion_id", criterion.criterion_id},
                         {"verdict", criterion.verdict.to_string()},
                         {"reason", criterion.reason},
                         {"votes", votes}};
    if (criterion.value) entry["value"] = *criterion.value;
    criteria.push_back(std::move(entry));
  }
  nlohmann::json record{{"item_id", report.item_id},
                        {"score", report.score},
                        {"criteria", criteria},
                        {"cost", report.total_cost},
                        {"tokens", report.total_tokens},
                        {"duration_seconds", report.duration_seconds}};
  if (report.mean_agreement) record["mean_agreement"] = *report.mean_agreement;
  return record;
}

EnsembleEvaluationReport item_record_from_json(const nlohmann::json& line) {
  EnsembleEvaluationReport report;
  report.item_id = line.at("item_id").get<std::string>();
  report.score = line.at("score").get<double>();
  report.total_cost = line.at("cost").get<double>();
  report.total_tokens = line.at("tokens").get<std::int64_t>();
  report.duration_seconds = line.at("duration_seconds").get<double>();
  if (line.contains("mean_agreement")) {
    report.mean_agreement = line.at("mean_agreement").get<double>();
  }
  for (const auto& entry : line.at("criteria")) {
    CriterionReport criterion;
    criterion.criterion_id = entry.at("criterion_id").get<std::string>();
    criterion.verdict = Verdict::from_string(entry.at("verdict").get<std::string>());
    criterion.reason = entry.value("reason", "");
    if (entry.contains("value")) criterion.value = entry.at("value").get<double>();
    for (const auto& vote : entry.value("votes", nlohmann::json::array())) {
      JudgeVote judge_vote;
      judge_vote.judge_name = vote.value("judge", "");
      judge_vote.verdict = Verdict::from_string(vote.at("verdict").get<std::string>());
      judge_vote.reason = vote.value("reason", "");
      criterion.votes.push_back(std::move(judge_vote));
    }
    report.criteria.push_back(std::move(criterion));
  }
  return report;
}

std::vector<EnsembleEvaluationReport> load_item_records(const fs::path& items_jsonl) {
  std::ifstream in(items_jsonl);
  if (!in) throw LoadError("cannot open " + items_jsonl.string());
  std::vector<EnsembleEvaluationReport> reports;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      reports.push_back(item_record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& error) {
      throw ParseError(items_jsonl.string() + ":" + std::to_string(line_no) + ": " +
                       error.what());
    }
  }
  return reports;
}

nlohmann::json load_manifest(const fs::path& experiment_dir) {
  fs::path path = experiment_dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const std::exception& error) {
    throw ParseError(path.string() + ": " + error.what());
  }
}

std::vector<JudgeSpec> judges_from_json(const nlohmann::json& doc) {
  if (!doc.contains("judges") || !doc.at("judges").is_array()) {
    throw ConfigError("judges config must contain a 'judges' array");
  }
  std::vector<JudgeSpec> judges;
  for (const auto& entry : doc.at("judges")) {
    JudgeSpec spec;
    spec.name = entry.value("name", "");
    spec.vote_weight = entry.value("vote_weight", 1.0);
    JudgeConfig& config = spec.config;
    config.model_id = entry.value("model_id", "");
    config.endpoint_url = entry.value("endpoint_url", "");
    config.api_key_env_var = entry.value("api_key_env_var", "");
    if (entry.contains("generation_params")) {
      for (const auto& [key, value] : entry.at("generation_params").items()) {
        config.generation_params[key] = value;
      }
    }
    if (entry.contains("thinking_level")) {
      config.thinking_level = entry.at("thinking_level").get<std::string>();
    }
    config.max_parallel_requests = entry.value("max_parallel_requests", 10);
    config.cache_enabled = entry.value("cache_enabled", false);
    config.cache_dir = entry.value("cache_dir", config.cache_dir);
    config.cache_ttl_seconds = entry.value("cache_ttl_seconds", config.cache_ttl_seconds);
    config.shuffle_options = entry.value("shuffle_options", true);
    config.max_attempts = entry.value("max_attempts", 3);
    config.retry_backoff_seconds = entry.value("retry_backoff_seconds", 1.0);
    config.prompt_cost_per_million = entry.value("prompt_cost_per_million", 0.0);
    config.completion_cost_per_million = entry.value("completion_cost_per_million", 0.0);
    config.timeout_seconds = entry.value("timeout_seconds", 120.0);
    if (entry.contains("scripted_responses_path")) {
      config.scripted_responses_path = entry.at("scripted_responses_path").get<std::string>();
    }
    if (entry.contains("binary_system_prompt")) {
      config.binary_system_prompt = entry.at("binary_system_prompt").get<std::string>();
    }
    if (entry.contains("choice_system_prompt")) {
      config.choice_system_prompt = entry.at("choice_system_prompt").get<std::string>();
    }
    if (spec.name.empty()) spec.name = config.model_id;
    judges.push_back(std::move(spec));
  }
  validate_judges(judges);
  return judges;
}

std::vector<JudgeSpec> load_judges(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const std::exception& error) {
    throw ParseError(path.string() + ": " + error.what());
  }
  return judges_from_json(doc);
}

nlohmann::json judge_spec_to_json(const JudgeSpec& spec) {
  const JudgeConfig& config = spec.config;
  nlohmann::json entry{{"name", spec.name},
                       {"vote_weight", spec.vote_weight},
                       {"model_id", config.model_id},
                       {"endpoint_url", config.endpoint_url},
                       {"api_key_env_var", config.api_key_env_var},
                       {"max_parallel_requests", config.max_parallel_requests},
                       {"cache_enabled", config.cache_enabled},
                       {"shuffle_options", config.shuffle_options},
                       {"max_attempts", config.max_attempts}};
  if (!config.generation_params.empty()) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [key, value] : config.generation_params) params[key] = value;
    entry["generation_params"] = params;
  }
  if (config.thinking_level) entry["thinking_level"] = *config.thinking_level;
  if (config.scripted_responses_path) {
    entry["scripted_responses_path"] = *config.scripted_responses_path;
  }
  if (config.binary_system_prompt) entry["binary_system_prompt"] = *config.binary_system_prompt;
  if (config.choice_system_prompt) entry["choice_system_prompt"] = *config.choice_system_prompt;
  return entry;
}

std::string generate_experiment_name(const fs::path& experiments_dir) {
  static const char* kAdjectives[] = {
      "amber", "bold",  "calm",  "dapper", "eager", "fuzzy", "gentle", "hazy",
      "ivory", "jolly", "keen",  "lively", "mellow", "nimble", "opal",  "plucky",
      "quiet", "rapid", "slim",  "tidy",   "umber",  "vivid", "witty",  "young",
  };
  static const char* kAnimals[] = {
      "auk",    "bison",  "crane", "deer",  "egret", "finch", "gecko", "heron",
      "ibis",   "jay",    "koala", "lemur", "mole",  "newt",  "otter", "pika",
      "quail",  "raven",  "stork", "tapir", "urial", "vole",  "wren",  "yak",
  };
  std::uint64_t seed = static_cast<std::uint64_t>(
      std::chrono::steady_clock::now().time_since_epoch().count());
  SplitMix64 rng(seed ^ fnv1a64("experiment-name"));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::string name = std::string(kAdjectives[rng.below(std::size(kAdjectives))]) + "-" +
                       kAnimals[rng.below(std::size(kAnimals))];
    if (attempt >= 24) name += "-" + std::to_string(attempt);
    if (!fs::exists(experiments_dir / name)) return name;
  }
  throw ConfigError("could not find an unused experiment name in " +
                    experiments_dir.string());
}

}  // namespace rubriceval
