#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rubriceval/backend.hpp"
#include "rubriceval/rubric.hpp"

namespace rubriceval {

// Everything needed to call one judge model. Loaded from the judges config
// file; see docs/judges.example.json for the schema.
struct JudgeConfig {
  std::string model_id;
  std::string endpoint_url;      // empty means scripted-only
  std::string api_key_env_var;
  std::map<std::string, nlohmann::json> generation_params;
  std::optional<std::string> thinking_level;

  int max_parallel_requests = 10;  // per-provider in-flight ceiling

  bool cache_enabled = false;
  std::string cache_dir = ".rubriceval-cache";
  std::int64_t cache_ttl_seconds = 7LL * 24 * 3600;

  bool shuffle_options = true;

  int max_attempts = 3;                // transport attempts per request
  double retry_backoff_seconds = 1.0;  // doubles after each failure

  double prompt_cost_per_million = 0.0;
  double completion_cost_per_million = 0.0;
  double timeout_seconds = 120.0;

  // Replay file for offline runs and tests; set instead of endpoint_url.
  std::optional<std::string> scripted_responses_path;

  // Replace the built-in system prompts wholesale when set.
  std::optional<std::string> binary_system_prompt;
  std::optional<std::string> choice_system_prompt;
};

// Seed for one (item, criterion, judge) call, folded from the run's master
// seed so option shuffling is stable across resumes yet uncorrelated across
// calls. The derivation is part of the compatibility contract:
// FNV-1a 64 over the UTF-8 bytes of
//   "<master_seed as decimal>|<item_id>|<criterion_id>|<judge_name>".
std::uint64_t derive_item_seed(std::uint64_t master_seed, std::string_view item_id,
                               std::string_view criterion_id,
                               std::string_view judge_name);

struct ShuffledOptions {
  std::vector<CriterionOption> options;  // display order
  // permutation[display_position] = index in the rubric's option order.
  std::vector<int> permutation;
};

// Fisher-Yates driven by SplitMix64(seed). Same seed, same order.
ShuffledOptions shuffle_options(std::span<const CriterionOption> options,
                                std::uint64_t seed);

// The built-in system prompts (used when JudgeConfig has no override).
const std::string& default_binary_system_prompt();
const std::string& default_choice_system_prompt();

struct PromptBundle {
  std::string system_text;
  std::string user_text;
  // For choice prompts: maps displayed option numbers back to rubric order
  // (permutation[display_position] = original index). Empty for binary.
  std::vector<int> permutation;
};

// User text layout, in order: optional <task_prompt>, <criterion_type>
// ("positive"/"negative" by weight sign), <criterion>, optional <examples>
// block, <submission>.
PromptBundle build_binary_prompt(const Criterion& criterion, std::string_view submission,
                                 std::string_view task_prompt = {},
                                 std::string_view exemplar_block = {},
                                 const std::optional<std::string>& system_override = std::nullopt);

// Options are rendered as a 1-based numbered list, shuffled by `seed` when
// `shuffle` is set. Layout: optional <task_prompt>, <question>, <options>,
// optional <examples>, <submission>.
PromptBundle build_choice_prompt(const Criterion& criterion, std::string_view submission,
                                 std::uint64_t seed, bool shuffle,
                                 std::string_view task_prompt = {},
                                 std::string_view exemplar_block = {},
                                 const std::optional<std::string>& system_override = std::nullopt);

struct ParsedVerdict {
  Verdict verdict;
  std::string reason;
};

// Decode {"criterion_status": ..., "explanation": ...}. The payload may be
// embedded in surrounding prose (models love to narrate); the first
// parseable json object wins. Status matching is case-insensitive.
// Throws ParseError when no object with a valid status and a nonempty
// explanation can be found.
ParsedVerdict parse_binary_response(std::string_view raw_text);

// Decode {"selected_option": <1-based display number>, "explanation": ...}
// and translate the displayed number back through `permutation` to a
// rubric-order Choice verdict.
ParsedVerdict parse_choice_response(std::string_view raw_text,
                                    std::span<const int> permutation);

struct JudgeCallResult {
  JudgeVote vote;
  std::string raw_text;  // last response body, for diagnostics
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  double cost = 0.0;
  bool cached = false;
};

// Judge one criterion on one submission: build the prompt, call the
// backend (with transport retries and exponential backoff), parse the
// verdict. An unparseable response earns exactly one cache-bypassing
// re-query; if that also fails to parse, the vote degrades to
// CANNOT_ASSESS with the parse failure as the reason. Transport
// exhaustion propagates as TransportError. Token and cost fields
// accumulate over every request actually made.
JudgeCallResult judge_criterion(JudgeBackend& backend, const JudgeConfig& config,
                                const Criterion& criterion, std::string_view submission,
                                std::string_view task_prompt,
                                std::string_view exemplar_block,
                                std::uint64_t master_seed, std::string_view item_id,
                                std::string_view judge_name);

}  // namespace rubriceval
