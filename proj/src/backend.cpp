#include "rubriceval/backend.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>

namespace rubriceval {

namespace {

std::string script_key(const std::string& item_id, const std::string& criterion_id,
                       const std::string& judge_name) {
  // \x1f never appears in ids we accept, so the join is unambiguous.
  return item_id + '\x1f' + criterion_id + '\x1f' + judge_name;
}

ScriptedBackend::Entry entry_from_json(const nlohmann::json& line,
                                       const std::string& raw_text) {
  ScriptedBackend::Entry entry;
  entry.raw_text = raw_text;
  entry.prompt_tokens = line.value("prompt_tokens", std::int64_t{0});
  entry.completion_tokens = line.value("completion_tokens", std::int64_t{0});
  entry.cost = line.value("cost", 0.0);
  entry.transport_error = line.value("transport_error", false);
  return entry;
}

}  // namespace

ScriptedBackend::ScriptedBackend(ScriptedBackend&& other) noexcept {
  std::lock_guard lock(other.mutex_);
  entries_ = std::move(other.entries_);
  call_count_ = other.call_count_;
}

ScriptedBackend ScriptedBackend::from_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw LoadError("cannot open scripted responses file: " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_jsonl_text(buffer.str());
}

ScriptedBackend ScriptedBackend::from_jsonl_text(const std::string& text) {
  ScriptedBackend backend;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw LoadError("scripted responses line " + std::to_string(line_number) +
                      ": " + e.what());
    }
    const std::string item = doc.value("item_id", "*");
    const std::string criterion = doc.value("criterion_id", "*");
    const std::string judge = doc.value("judge_name", "*");
    if (doc.contains("responses")) {
      for (const nlohmann::json& r : doc["responses"]) {
        backend.add(item, criterion, judge, entry_from_json(doc, r.get<std::string>()));
      }
    } else if (doc.contains("response")) {
      backend.add(item, criterion, judge,
                  entry_from_json(doc, doc["response"].get<std::string>()));
    } else if (doc.value("transport_error", false)) {
      backend.add(item, criterion, judge, entry_from_json(doc, ""));
    } else {
      throw LoadError("scripted responses line " + std::to_string(line_number) +
                      ": needs \"response\" or \"responses\"");
    }
  }
  return backend;
}

void ScriptedBackend::add(const std::string& item_id, const std::string& criterion_id,
                          const std::string& judge_name, Entry entry) {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_[script_key(item_id, criterion_id, judge_name)].push_back(std::move(entry));
}

void ScriptedBackend::add_text(const std::string& item_id,
                               const std::string& criterion_id,
                               const std::string& judge_name,
                               const std::string& raw_text) {
  Entry entry;
  entry.raw_text = raw_text;
  add(item_id, criterion_id, judge_name, std::move(entry));
}

JudgeBackendResult ScriptedBackend::complete(const BackendRequest& request) {
  std::lock_guard<std::mutex> lock(mutex_);
  ++call_count_;
  // Most specific key first; each slot may independently fall back to "*".
  const std::string candidates[] = {
      script_key(request.item_id, request.criterion_id, request.judge_name),
      script_key(request.item_id, request.criterion_id, "*"),
      script_key(request.item_id, "*", request.judge_name),
      script_key("*", request.criterion_id, request.judge_name),
      script_key(request.item_id, "*", "*"),
      script_key("*", request.criterion_id, "*"),
      script_key("*", "*", request.judge_name),
      script_key("*", "*", "*"),
  };
  for (const std::string& key : candidates) {
    auto it = entries_.find(key);
    if (it == entries_.end() || it->second.empty()) continue;
    Entry entry = it->second.front();
    if (it->second.size() > 1) it->second.pop_front();  // last entry repeats
    if (entry.transport_error) {
      throw TransportError("scripted transport failure for item \"" +
                           request.item_id + "\" criterion \"" +
                           request.criterion_id + "\"");
    }
    JudgeBackendResult result;
    result.raw_text = entry.raw_text;
    result.prompt_tokens = entry.prompt_tokens;
    result.completion_tokens = entry.completion_tokens;
    result.cost = entry.cost;
    return result;
  }
  throw ConfigError("no scripted response for item \"" + request.item_id +
                    "\" criterion \"" + request.criterion_id + "\" judge \"" +
                    request.judge_name + "\"");
}

int ScriptedBackend::call_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return call_count_;
}

nlohmann::json build_provider_payload(const BackendRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const ChatMessage& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  nlohmann::json payload = {{"model", request.model_id},
                            {"messages", std::move(messages)}};
  for (const auto& [key, value] : request.generation_params) {
    payload[key] = value;
  }
  if (request.thinking_level.has_value() && *request.thinking_level != "none" &&
      !request.thinking_level->empty()) {
    const std::string& level = *request.thinking_level;
    const bool numeric =
        level.find_first_not_of("0123456789") == std::string::npos;
    if (numeric) {
      payload["thinking_budget_tokens"] = std::stoll(level);
    } else {
      payload["reasoning_effort"] = level;
    }
  }
  return payload;
}

HttpBackend::HttpBackend(Options options) : options_(std::move(options)) {
  const std::string& url = options_.endpoint_url;
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint_url needs a scheme: \"" + url + "\"");
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = url;
    path_ = "/";
  } else {
    scheme_host_port_ = url.substr(0, path_start);
    path_ = url.substr(path_start);
  }
}

JudgeBackendResult HttpBackend::complete(const BackendRequest& request) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(static_cast<time_t>(options_.timeout_seconds), 0);
  client.set_read_timeout(static_cast<time_t>(options_.timeout_seconds), 0);

  httplib::Headers headers;
  if (!options_.api_key_env_var.empty()) {
    const char* key = std::getenv(options_.api_key_env_var.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError("environment variable " + options_.api_key_env_var +
                        " is not set (needed for " + scheme_host_port_ + ")");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const std::string body = build_provider_payload(request).dump();
  httplib::Result response = client.Post(path_, headers, body, "application/json");
  if (!response) {
    throw TransportError("request to " + scheme_host_port_ + path_ + " failed: " +
                         httplib::to_string(response.error()));
  }
  if (response->status < 200 || response->status >= 300) {
    throw TransportError("request to " + scheme_host_port_ + path_ +
                         " returned HTTP " + std::to_string(response->status) +
                         ": " + response->body.substr(0, 512));
  }

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(response->body);
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("provider returned non-json body: ") + e.what());
  }

  JudgeBackendResult result;
  try {
    result.raw_text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw TransportError("provider response missing choices[0].message.content");
  }
  if (doc.contains("usage")) {
    result.prompt_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
    result.completion_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
  }
  result.cost =
      static_cast<double>(result.prompt_tokens) * options_.prompt_cost_per_million / 1e6 +
      static_cast<double>(result.completion_tokens) * options_.completion_cost_per_million / 1e6;
  return result;
}

}  // namespace rubriceval
