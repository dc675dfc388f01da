#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "rubriceval/backend.hpp"

namespace rubriceval {

// Hex SHA-256 of arbitrary bytes (OpenSSL EVP).
std::string sha256_hex(std::string_view data);

// Content address of a judge request: canonical JSON (object keys sorted,
// message order preserved) over model, messages, generation params, and
// thinking level, hashed SHA-256. Any semantic change to the request
// changes the key; map iteration order cannot.
std::string compute_cache_key(const std::string& model_id,
                              std::span<const ChatMessage> messages,
                              const std::map<std::string, nlohmann::json>& generation_params,
                              const std::optional<std::string>& thinking_level);

// One file per entry under dir/<key>.json holding the raw response plus
// accounting: {key, raw_text, prompt_tokens, completion_tokens, cost,
// created_at}. Writers stage to a temp file and rename, so concurrent
// readers never observe a torn entry. TTL is enforced at read time;
// ttl_seconds <= 0 means entries never expire.
class ResponseCache {
 public:
  ResponseCache(std::filesystem::path dir, std::int64_t ttl_seconds);

  std::optional<JudgeBackendResult> lookup(const std::string& key) const;
  void store(const std::string& key, const JudgeBackendResult& result) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::int64_t ttl_seconds_;
};

// Wraps any backend with read-through caching. Hits cost nothing: the
// result comes back with cached=true, zero tokens, zero cost, so ledger
// totals reflect actual spend. Requests flagged bypass_cache skip the read
// but still refresh the entry.
class CachingBackend : public JudgeBackend {
 public:
  CachingBackend(std::shared_ptr<JudgeBackend> inner, ResponseCache cache);

  JudgeBackendResult complete(const BackendRequest& request) override;

 private:
  std::shared_ptr<JudgeBackend> inner_;
  ResponseCache cache_;
};

}  // namespace rubriceval
