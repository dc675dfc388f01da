#include "rubriceval/cache.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

namespace rubriceval {

namespace {

std::int64_t now_epoch_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static const char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(static_cast<std::size_t>(length) * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0x0f]);
  }
  return out;
}

std::string compute_cache_key(const std::string& model_id,
                              std::span<const ChatMessage> messages,
                              const std::map<std::string, nlohmann::json>& generation_params,
                              const std::optional<std::string>& thinking_level) {
  nlohmann::json canonical_messages = nlohmann::json::array();
  for (const ChatMessage& m : messages) {
    canonical_messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [key, value] : generation_params) {
    params[key] = value;
  }
  // nlohmann's default object is key-sorted, and dump() is deterministic,
  // so this serialization is canonical by construction.
  nlohmann::json request = {{"model", model_id},
                            {"messages", std::move(canonical_messages)},
                            {"params", std::move(params)}};
  if (thinking_level.has_value()) {
    request["thinking"] = *thinking_level;
  }
  return sha256_hex(request.dump());
}

ResponseCache::ResponseCache(std::filesystem::path dir, std::int64_t ttl_seconds)
    : dir_(std::move(dir)), ttl_seconds_(ttl_seconds) {
  std::filesystem::create_directories(dir_);
}

std::optional<JudgeBackendResult> ResponseCache::lookup(const std::string& key) const {
  const std::filesystem::path path = dir_ / (key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;  // torn or foreign file: treat as a miss
  }
  if (ttl_seconds_ > 0) {
    const std::int64_t created = doc.value("created_at", std::int64_t{0});
    if (now_epoch_seconds() - created > ttl_seconds_) return std::nullopt;
  }
  JudgeBackendResult result;
  result.raw_text = doc.value("raw_text", "");
  result.prompt_tokens = doc.value("prompt_tokens", std::int64_t{0});
  result.completion_tokens = doc.value("completion_tokens", std::int64_t{0});
  result.cost = doc.value("cost", 0.0);
  result.cached = true;
  return result;
}

void ResponseCache::store(const std::string& key, const JudgeBackendResult& result) const {
  const nlohmann::json doc = {{"key", key},
                              {"raw_text", result.raw_text},
                              {"prompt_tokens", result.prompt_tokens},
                              {"completion_tokens", result.completion_tokens},
                              {"cost", result.cost},
                              {"created_at", now_epoch_seconds()}};
  const std::filesystem::path path = dir_ / (key + ".json");
  // Unique temp name per writer; rename is atomic within the directory.
  std::ostringstream tmp_name;
  tmp_name << key << '.' << std::this_thread::get_id() << ".tmp";
  const std::filesystem::path tmp = dir_ / tmp_name.str();
  {
    std::ofstream out(tmp);
    if (!out) throw LoadError("cannot write cache entry: " + tmp.string());
    out << doc.dump();
  }
  std::filesystem::rename(tmp, path);
}

CachingBackend::CachingBackend(std::shared_ptr<JudgeBackend> inner, ResponseCache cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

JudgeBackendResult CachingBackend::complete(const BackendRequest& request) {
  const std::string key = compute_cache_key(request.model_id, request.messages,
                                            request.generation_params,
                                            request.thinking_level);
  if (!request.bypass_cache) {
    if (std::optional<JudgeBackendResult> hit = cache_.lookup(key)) {
      // The entry keeps the original accounting for inspection, but a hit
      // spends nothing.
      hit->cost = 0.0;
      hit->prompt_tokens = 0;
      hit->completion_tokens = 0;
      return *hit;
    }
  }
  const JudgeBackendResult result = inner_->complete(request);
  cache_.store(key, result);
  return result;
}

}  // namespace rubriceval
