#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rubriceval/errors.hpp"

namespace rubriceval {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

struct BackendRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  // Passed through to the provider verbatim (temperature, max_tokens, ...).
  // std::map keeps serialization order stable for cache keys.
  std::map<std::string, nlohmann::json> generation_params;
  // "none"/"low"/"medium"/"high", or a decimal string meaning an explicit
  // token budget. Unset or "none" sends nothing.
  std::optional<std::string> thinking_level;

  // Routing metadata. Not part of the provider payload or cache identity;
  // the scripted backend keys canned responses on it and error messages
  // quote it.
  std::string item_id;
  std::string criterion_id;
  std::string judge_name;

  // Set on re-queries after an unparseable response so a caching layer
  // doesn't hand back the same bad text it just stored.
  bool bypass_cache = false;
};

struct JudgeBackendResult {
  std::string raw_text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  double cost = 0.0;
  bool cached = false;
};

class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  // Throws TransportError on network/provider failure (retryable) and
  // ConfigError on unusable setup (missing key, no scripted response).
  virtual JudgeBackendResult complete(const BackendRequest& request) = 0;
};

// Replays canned responses keyed by (item_id, criterion_id, judge_name).
// Each key holds a queue: repeated calls consume successive entries, the
// last entry repeating, which lets fixtures script "garbage then valid"
// re-query behavior. "*" in any key slot is a wildcard; lookup prefers the
// most specific match. Thread safe.
class ScriptedBackend : public JudgeBackend {
 public:
  struct Entry {
    std::string raw_text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    double cost = 0.0;
    bool transport_error = false;  // simulate a network failure instead
  };

  ScriptedBackend() = default;
  // Movable so the from_jsonl factories can return by value. Moving a
  // backend other threads are using is a caller bug.
  ScriptedBackend(ScriptedBackend&& other) noexcept;

  // One json object per line:
  //   {"item_id": "a", "criterion_id": "c0", "judge_name": "*",
  //    "responses": ["{...}"], "prompt_tokens": 10, "completion_tokens": 5,
  //    "cost": 0.001}
  // "response": "..." is shorthand for a single-element "responses" list.
  static ScriptedBackend from_jsonl(const std::filesystem::path& path);
  static ScriptedBackend from_jsonl_text(const std::string& text);

  void add(const std::string& item_id, const std::string& criterion_id,
           const std::string& judge_name, Entry entry);
  // Convenience: respond with `raw_text` for every request matching the key.
  void add_text(const std::string& item_id, const std::string& criterion_id,
                const std::string& judge_name, const std::string& raw_text);

  JudgeBackendResult complete(const BackendRequest& request) override;

  int call_count() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::deque<Entry>> entries_;
  int call_count_ = 0;
};

// Minimal OpenAI-style chat-completions client. The endpoint URL carries
// scheme, host, optional port, and path, e.g.
//   https://api.openai.com/v1/chat/completions
// The API key (if api_key_env_var is nonempty) is read from the process
// environment at call time and sent as a bearer token.
class HttpBackend : public JudgeBackend {
 public:
  struct Options {
    std::string endpoint_url;
    std::string api_key_env_var;
    // Per-million-token prices used to attribute cost to each call; zero
    // means cost is reported as 0 rather than guessed.
    double prompt_cost_per_million = 0.0;
    double completion_cost_per_million = 0.0;
    double timeout_seconds = 120.0;
  };

  explicit HttpBackend(Options options);

  JudgeBackendResult complete(const BackendRequest& request) override;

 private:
  Options options_;
  std::string scheme_host_port_;
  std::string path_;
};

// Provider payload for a request, shared by HttpBackend and cache keying:
// {"model": ..., "messages": [...], <generation_params...>,
//  "reasoning_effort" | "thinking_budget_tokens" when thinking is set}.
nlohmann::json build_provider_payload(const BackendRequest& request);

}  // namespace rubriceval
