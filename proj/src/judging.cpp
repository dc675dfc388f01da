#include "rubriceval/judging.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <sstream>
#include <thread>

#include "rubriceval/rng.hpp"

namespace rubriceval {

namespace {

// clang-format off
const std::string kBinarySystemPrompt =
R"(You are an expert evaluation judge. Your task is to determine whether
a single criterion is satisfied by a given submission. Be precise,
evidence-based, and consistent.

You will receive a <criterion_type> (positive or negative),
a <criterion>, and a <submission> to evaluate. Your verdict must
be one of:
- "MET": The thing described in the criterion IS present
- "UNMET": The thing described in the criterion IS NOT present
- "CANNOT_ASSESS": Insufficient evidence to determine (use rarely)

Evaluate this criterion independently. Do not let overall submission
quality influence your judgment.

CRITERION TYPES:
<criterion_type> indicates whether the criterion describes something
desirable (positive) or undesirable (negative). Your job is THE SAME
for both: determine if the thing described is present.

POSITIVE CRITERIA: desired traits that should be present.
NEGATIVE CRITERIA: active errors or mistakes. MET means the
submission advocates or states the problematic thing; UNMET means
it does NOT make this error or mentions it only to warn against it.

EVALUATION RULES:
- For numerical values: check specified ranges or exact matches.
- For factual claims: verify presence and accuracy.
- For required elements: confirm presence, count precisely.
- For exclusion requirements: confirm restricted content is absent.
- Be strict about factual accuracy but flexible about wording.
- Accept semantically equivalent statements or logical implications.

IMPLICIT SATISFACTION:
A criterion can be satisfied implicitly through context, tone, or
logical implication.

CANNOT_ASSESS VERDICT:
Use only when you genuinely cannot determine if the criterion is met
(e.g., missing attachments, garbled text). Do NOT use when you can
make a reasonable inference or when the criterion is simply not met.

RESPONSE FORMAT:
Respond with valid JSON:
{"criterion_status": "MET"|"UNMET"|"CANNOT_ASSESS",
 "explanation": "..."}

Provide a 1-2 sentence explanation. Cite specific text from the
submission as evidence for your verdict.)";

const std::string kChoiceSystemPrompt =
R"(You are an expert evaluation judge. Your task is to select the best
matching option for a given submission from a set of predefined
choices. Be precise, evidence-based, and consistent.

You will receive a <question>, numbered <options>, and a <submission>.

EVALUATION RULES:
- Review ALL options before selecting.
- Base judgment on submission content, not assumptions about intent.
- Be strict about factual accuracy but flexible about wording.
- For ordinal scales, treat options as points on a continuum.
- Do not default to middle options out of uncertainty.
- When borderline, select the option whose description more precisely
  matches the specific evidence in the submission.

NA / NOT APPLICABLE OPTIONS:
Select NA only when the question genuinely cannot be answered
(missing attachments, garbled text). Do NOT select NA when you can
make a reasonable inference or when the submission simply does not
match well (select the closest match instead).

RESPONSE FORMAT:
Respond with valid JSON:
{"selected_option": <number>, "explanation": "..."}

Provide a 1-2 sentence explanation. Cite specific text from the
submission as evidence for your selection.)";
// clang-format on

void append_tagged(std::string& out, std::string_view tag, std::string_view body) {
  out += '<';
  out += tag;
  out += ">\n";
  out += body;
  out += "\n</";
  out += tag;
  out += ">\n\n";
}

void append_exemplars(std::string& out, std::string_view exemplar_block) {
  if (exemplar_block.empty()) return;
  append_tagged(out, "examples", exemplar_block);
}

std::string ascii_upper(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return text;
}

// Every top-level '{' ... matching '}' substring of `text`, in order of the
// opening brace. Quote and escape aware so braces inside string values do
// not end a candidate early.
std::vector<std::string> candidate_json_objects(std::string_view text) {
  std::vector<std::string> out;
  for (std::size_t start = 0; start < text.size(); ++start) {
    if (text[start] != '{') continue;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          out.emplace_back(text.substr(start, i - start + 1));
          break;
        }
      }
    }
  }
  return out;
}

ParsedVerdict decode_binary_object(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("criterion_status")) {
    throw ParseError("no criterion_status field");
  }
  if (!doc["criterion_status"].is_string()) {
    throw ParseError("criterion_status is not a string");
  }
  const std::string status = ascii_upper(doc["criterion_status"].get<std::string>());
  Verdict verdict;
  if (status == "MET") {
    verdict = Verdict::met();
  } else if (status == "UNMET") {
    verdict = Verdict::unmet();
  } else if (status == "CANNOT_ASSESS") {
    verdict = Verdict::cannot_assess();
  } else {
    throw ParseError("unknown criterion_status \"" + status + "\"");
  }
  const std::string reason = doc.value("explanation", "");
  if (reason.empty()) {
    throw ParseError("explanation missing or empty");
  }
  return {verdict, reason};
}

ParsedVerdict decode_choice_object(const nlohmann::json& doc,
                                   std::span<const int> permutation) {
  if (!doc.is_object() || !doc.contains("selected_option")) {
    throw ParseError("no selected_option field");
  }
  long long selected = 0;
  const nlohmann::json& raw = doc["selected_option"];
  if (raw.is_number_integer()) {
    selected = raw.get<long long>();
  } else if (raw.is_string()) {
    const std::string text = raw.get<std::string>();
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError("selected_option \"" + text + "\" is not a number");
    }
    selected = std::stoll(text);
  } else {
    throw ParseError("selected_option is neither number nor string");
  }
  if (selected < 1 || selected > static_cast<long long>(permutation.size())) {
    throw ParseError("selected_option " + std::to_string(selected) +
                     " outside 1.." + std::to_string(permutation.size()));
  }
  const std::string reason = doc.value("explanation", "");
  if (reason.empty()) {
    throw ParseError("explanation missing or empty");
  }
  // Displayed numbers are 1-based; map back to the rubric's option order.
  const int original = permutation[static_cast<std::size_t>(selected - 1)];
  return {Verdict::choice(original), reason};
}

template <typename Decoder>
ParsedVerdict parse_response(std::string_view raw_text, Decoder decode) {
  std::string first_error;
  // Fast path: the whole body is the json object.
  try {
    return decode(nlohmann::json::parse(raw_text));
  } catch (const ParseError& e) {
    first_error = e.what();
  } catch (const nlohmann::json::exception&) {
    // fall through to embedded-object scan
  }
  for (const std::string& candidate : candidate_json_objects(raw_text)) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(candidate);
    } catch (const nlohmann::json::exception&) {
      continue;
    }
    try {
      return decode(doc);
    } catch (const ParseError& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (first_error.empty()) first_error = "no json object found";
  std::string snippet(raw_text.substr(0, 160));
  std::replace(snippet.begin(), snippet.end(), '\n', ' ');
  throw ParseError("cannot parse judge response (" + first_error + "): " + snippet);
}

}  // namespace

std::uint64_t derive_item_seed(std::uint64_t master_seed, std::string_view item_id,
                               std::string_view criterion_id,
                               std::string_view judge_name) {
  std::string key = std::to_string(master_seed);
  key += '|';
  key += item_id;
  key += '|';
  key += criterion_id;
  key += '|';
  key += judge_name;
  return fnv1a64(key);
}

ShuffledOptions shuffle_options(std::span<const CriterionOption> options,
                                std::uint64_t seed) {
  ShuffledOptions out;
  out.permutation.resize(options.size());
  for (std::size_t i = 0; i < options.size(); ++i) {
    out.permutation[i] = static_cast<int>(i);
  }
  SplitMix64 rng(seed);
  for (std::size_t i = options.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(out.permutation[i - 1], out.permutation[j]);
  }
  out.options.reserve(options.size());
  for (const int original : out.permutation) {
    out.options.push_back(options[static_cast<std::size_t>(original)]);
  }
  return out;
}

const std::string& default_binary_system_prompt() { return kBinarySystemPrompt; }
const std::string& default_choice_system_prompt() { return kChoiceSystemPrompt; }

PromptBundle build_binary_prompt(const Criterion& criterion, std::string_view submission,
                                 std::string_view task_prompt,
                                 std::string_view exemplar_block,
                                 const std::optional<std::string>& system_override) {
  PromptBundle bundle;
  bundle.system_text = system_override.value_or(kBinarySystemPrompt);
  std::string& user = bundle.user_text;
  if (!task_prompt.empty()) {
    append_tagged(user, "task_prompt", task_prompt);
  }
  append_tagged(user, "criterion_type", criterion.is_penalty() ? "negative" : "positive");
  append_tagged(user, "criterion", criterion.requirement);
  append_exemplars(user, exemplar_block);
  append_tagged(user, "submission", submission);
  while (!user.empty() && user.back() == '\n') user.pop_back();
  return bundle;
}

PromptBundle build_choice_prompt(const Criterion& criterion, std::string_view submission,
                                 std::uint64_t seed, bool shuffle,
                                 std::string_view task_prompt,
                                 std::string_view exemplar_block,
                                 const std::optional<std::string>& system_override) {
  if (criterion.options.size() < 2) {
    throw ConfigError("criterion \"" + criterion.id +
                      "\" has no option list to build a choice prompt from");
  }
  PromptBundle bundle;
  bundle.system_text = system_override.value_or(kChoiceSystemPrompt);

  ShuffledOptions shuffled;
  if (shuffle) {
    shuffled = shuffle_options(criterion.options, seed);
  } else {
    shuffled.options.assign(criterion.options.begin(), criterion.options.end());
    shuffled.permutation.resize(criterion.options.size());
    for (std::size_t i = 0; i < criterion.options.size(); ++i) {
      shuffled.permutation[i] = static_cast<int>(i);
    }
  }
  bundle.permutation = shuffled.permutation;

  std::string& user = bundle.user_text;
  if (!task_prompt.empty()) {
    append_tagged(user, "task_prompt", task_prompt);
  }
  append_tagged(user, "question", criterion.requirement);
  std::string options_body;
  for (std::size_t i = 0; i < shuffled.options.size(); ++i) {
    options_body += std::to_string(i + 1);
    options_body += ". ";
    options_body += shuffled.options[i].label;
    if (i + 1 < shuffled.options.size()) options_body += '\n';
  }
  append_tagged(user, "options", options_body);
  append_exemplars(user, exemplar_block);
  append_tagged(user, "submission", submission);
  while (!user.empty() && user.back() == '\n') user.pop_back();
  return bundle;
}

ParsedVerdict parse_binary_response(std::string_view raw_text) {
  return parse_response(raw_text,
                        [](const nlohmann::json& doc) { return decode_binary_object(doc); });
}

ParsedVerdict parse_choice_response(std::string_view raw_text,
                                    std::span<const int> permutation) {
  return parse_response(raw_text, [permutation](const nlohmann::json& doc) {
    return decode_choice_object(doc, permutation);
  });
}

JudgeCallResult judge_criterion(JudgeBackend& backend, const JudgeConfig& config,
                                const Criterion& criterion, std::string_view submission,
                                std::string_view task_prompt,
                                std::string_view exemplar_block,
                                std::uint64_t master_seed, std::string_view item_id,
                                std::string_view judge_name) {
  const bool binary = criterion.scale_type == ScaleType::Binary;
  const std::uint64_t seed =
      derive_item_seed(master_seed, item_id, criterion.id, judge_name);
  const PromptBundle bundle =
      binary ? build_binary_prompt(criterion, submission, task_prompt, exemplar_block,
                                   config.binary_system_prompt)
             : build_choice_prompt(criterion, submission, seed, config.shuffle_options,
                                   task_prompt, exemplar_block,
                                   config.choice_system_prompt);

  BackendRequest request;
  request.model_id = config.model_id;
  request.messages = {{"system", bundle.system_text}, {"user", bundle.user_text}};
  request.generation_params = config.generation_params;
  request.thinking_level = config.thinking_level;
  request.item_id = std::string(item_id);
  request.criterion_id = criterion.id;
  request.judge_name = std::string(judge_name);

  JudgeCallResult out;
  out.vote.judge_name = std::string(judge_name);

  auto call_with_transport_retries = [&]() {
    int attempt = 0;
    double backoff = config.retry_backoff_seconds;
    for (;;) {
      try {
        return backend.complete(request);
      } catch (const TransportError&) {
        if (++attempt >= std::max(1, config.max_attempts)) throw;
        std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
        backoff *= 2.0;
      }
    }
  };

  std::string parse_failure;
  // One shot plus at most one re-query when the response does not decode.
  for (int round = 0; round < 2; ++round) {
    request.bypass_cache = round > 0;
    const JudgeBackendResult result = call_with_transport_retries();
    out.raw_text = result.raw_text;
    out.prompt_tokens += result.prompt_tokens;
    out.completion_tokens += result.completion_tokens;
    out.cost += result.cost;
    out.cached = result.cached && round == 0;
    try {
      const ParsedVerdict parsed =
          binary ? parse_binary_response(result.raw_text)
                 : parse_choice_response(result.raw_text, bundle.permutation);
      out.vote.verdict = parsed.verdict;
      out.vote.reason = parsed.reason;
      return out;
    } catch (const ParseError& e) {
      parse_failure = e.what();
    }
  }
  out.vote.verdict = Verdict::cannot_assess();
  out.vote.reason = "unparseable judge response after re-query: " + parse_failure;
  return out;
}

}  // namespace rubriceval
