/// @file llm_gateway.cpp

#include "sage/llm_gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "sage/error.hpp"

namespace sage::gateway {

std::string_view to_string(Role role) noexcept {
  return role == Role::User ? "user" : "assistant";
}

ChatResponse complete(ChatBackend& backend, const ChatRequest& request) {
  if (request.messages.empty() && request.system_prompt.empty()) {
    throw ValidationError("chat request has neither messages nor a system prompt");
  }
  if (request.temperature < 0.0) throw ValidationError("temperature must be >= 0");
  return backend.complete(request);
}

std::int64_t whitespace_token_count(std::string_view text) {
  std::int64_t count = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

std::int64_t usage_of(const DialogueRecord& record) {
  std::int64_t total = 0;
  for (const auto& turn : record.turns) total += turn.target_token_usage.total();
  return total;
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
}

}  // namespace

std::string fingerprint(const ChatRequest& request) {
  std::uint64_t h = kFnvOffset;
  fnv_mix(h, request.system_prompt);
  for (const auto& m : request.messages) {
    fnv_mix(h, "\x1f");
    fnv_mix(h, m.content);
  }
  return fmt::format("{:016x}", h);
}

// ---------------------------------------------------------------------------
// Scripted backend

std::vector<ScriptEntry> load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open script " + path.string());
  std::vector<ScriptEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ScriptEntry e;
      e.content = j.at("content").get<std::string>();
      if (j.contains("fingerprint") && !j["fingerprint"].is_null()) {
        e.fingerprint = j["fingerprint"].get<std::string>();
      }
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(fmt::format("{}:{}: bad script line: {}", path.string(), line_no, ex.what()));
    }
  }
  return entries;
}

void save_script(const std::filesystem::path& path, const std::vector<ScriptEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write script " + path.string());
  for (const auto& e : entries) {
    nlohmann::json j{{"content", e.content}};
    if (e.fingerprint) j["fingerprint"] = *e.fingerprint;
    out << j.dump() << '\n';
  }
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries, std::string id)
    : id_(std::move(id)) {
  for (auto& e : entries) {
    if (e.fingerprint) {
      keyed_[*e.fingerprint] = std::move(e.content);
    } else {
      ordered_.push_back(std::move(e.content));
    }
  }
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_texts(const std::vector<std::string>& texts,
                                                             std::string id) {
  std::vector<ScriptEntry> entries;
  entries.reserve(texts.size());
  for (const auto& t : texts) entries.push_back({std::nullopt, t});
  return std::make_unique<ScriptedBackend>(std::move(entries), std::move(id));
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  seen_.push_back(request);
  std::string content;
  if (!keyed_.empty()) {
    if (auto it = keyed_.find(fingerprint(request)); it != keyed_.end()) content = it->second;
  }
  if (content.empty()) {
    if (cursor_ >= ordered_.size()) {
      throw ScriptExhausted(fmt::format("script '{}' exhausted after {} replies", id_, cursor_));
    }
    content = ordered_[cursor_++];
  }
  ChatResponse response;
  response.content = std::move(content);
  response.backend_id = id_;
  std::int64_t prompt = whitespace_token_count(request.system_prompt);
  for (const auto& m : request.messages) prompt += whitespace_token_count(m.content);
  response.usage.prompt_tokens = prompt;
  response.usage.completion_tokens = whitespace_token_count(response.content);
  return response;
}

std::size_t ScriptedBackend::cursor() const {
  std::lock_guard lock(mutex_);
  return cursor_;
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mutex_);
  return seen_.size();
}

std::vector<ChatRequest> ScriptedBackend::requests() const {
  std::lock_guard lock(mutex_);
  return seen_;
}

// ---------------------------------------------------------------------------
// Retry and rate limiting

std::chrono::milliseconds RetryPolicy::backoff_for(int retry) const {
  double ms = static_cast<double>(initial_backoff.count());
  for (int i = 0; i < retry; ++i) ms *= multiplier;
  ms = std::min(ms, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

TokenBucket::TokenBucket(double requests_per_minute)
    : rate_per_second_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, requests_per_minute / 60.0)),
      tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire() {
  if (rate_per_second_ <= 0.0) return;
  for (;;) {
    std::chrono::duration<double> wait{};
    {
      std::lock_guard lock(mutex_);
      const auto now = std::chrono::steady_clock::now();
      const std::chrono::duration<double> elapsed = now - last_;
      last_ = now;
      tokens_ = std::min(capacity_, tokens_ + elapsed.count() * rate_per_second_);
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double>((1.0 - tokens_) / rate_per_second_);
    }
    std::this_thread::sleep_for(wait);
  }
}

// ---------------------------------------------------------------------------
// HTTP backend

namespace {

std::string env_name(std::string_view backend) {
  std::string out;
  for (unsigned char c : backend) {
    out += std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_';
  }
  return out;
}

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // may be empty
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpBackendConfig http_config_from_env(const std::string& backend_name) {
  HttpBackendConfig cfg;
  cfg.name = backend_name;
  const std::string key = env_name(backend_name);
  if (const char* url = std::getenv(("SAGE_BASE_URL_" + key).c_str())) cfg.base_url = url;
  if (const char* k = std::getenv(("SAGE_API_KEY_" + key).c_str())) cfg.api_key = k;
  if (cfg.base_url.empty()) {
    throw ConfigError("SAGE_BASE_URL_" + key + " is not set for backend '" + backend_name + "'");
  }
  return cfg;
}

std::string completions_path(std::string_view base_path) {
  std::string p(base_path);
  while (!p.empty() && p.back() == '/') p.pop_back();
  if (p.size() >= 3 && p.compare(p.size() - 3, 3, "/v1") == 0) return p + "/chat/completions";
  return p + "/v1/chat/completions";
}

nlohmann::json to_wire(const ChatRequest& request, const std::string& model_override) {
  nlohmann::json messages = nlohmann::json::array();
  if (!request.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
  }
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return {{"model", model_override.empty() ? request.model_id : model_override},
          {"messages", std::move(messages)},
          {"temperature", request.temperature},
          {"max_tokens", request.max_output_tokens}};
}

ChatResponse from_wire(const nlohmann::json& body, const std::string& backend_id) {
  ChatResponse r;
  r.backend_id = backend_id;
  try {
    const auto& content = body.at("choices").at(0).at("message").at("content");
    if (content.is_string()) r.content = content.get<std::string>();
    if (body.contains("usage") && body["usage"].is_object()) {
      const auto& u = body["usage"];
      r.usage.prompt_tokens = u.value("prompt_tokens", std::int64_t{0});
      r.usage.completion_tokens = u.value("completion_tokens", std::int64_t{0});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw GatewayError(std::string("unexpected response shape: ") + ex.what());
  }
  if (r.content.empty()) throw GatewayError("backend returned empty content");
  if (r.usage.prompt_tokens < 0 || r.usage.completion_tokens < 0) {
    throw GatewayError("backend returned negative usage");
  }
  return r;
}

HttpChatBackend::HttpChatBackend(HttpBackendConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleep_(std::move(sleeper)) {
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (config_.requests_per_minute > 0.0) {
    bucket_ = std::make_unique<TokenBucket>(config_.requests_per_minute);
  }
  split_url(config_.base_url);  // validate early
}

HttpChatBackend::~HttpChatBackend() = default;

ChatResponse HttpChatBackend::complete(const ChatRequest& request) {
  const auto [origin, base_path] = split_url(config_.base_url);
  const std::string path = completions_path(base_path);
  const std::string body = to_wire(request, config_.model).dump();

  httplib::Client client(origin);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const int max_attempts = config_.retry.max_retries + 1;
  std::string last_problem;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) sleep_(config_.retry.backoff_for(attempt - 2));
    if (bucket_) bucket_->acquire();

    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_problem = "transport: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      nlohmann::json parsed;
      try {
        parsed = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception&) {
        last_problem = "unparseable response body";
        spdlog::warn("backend {}: attempt {} returned non-JSON body", config_.name, attempt);
        continue;
      }
      auto out = from_wire(parsed, config_.name);
      out.attempts = attempt;
      return out;
    } else if (retryable_status(res->status)) {
      last_problem = fmt::format("HTTP {}", res->status);
    } else {
      throw BackendRefusal(res->status, res->body.substr(0, 300));
    }
    spdlog::warn("backend {}: attempt {}/{} failed ({})", config_.name, attempt, max_attempts,
                 last_problem);
  }
  throw TransportExhausted(last_problem, max_attempts);
}

// ---------------------------------------------------------------------------
// Providers

std::shared_ptr<ScriptedBackendProvider> ScriptedBackendProvider::from_file(
    std::filesystem::path file) {
  if (!std::filesystem::is_regular_file(file)) {
    throw ConfigError("script file not found: " + file.string());
  }
  auto p = std::make_shared<ScriptedBackendProvider>();
  p->file_ = std::move(file);
  return p;
}

std::shared_ptr<ScriptedBackendProvider> ScriptedBackendProvider::from_directory(
    std::filesystem::path dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("script directory not found: " + dir.string());
  }
  auto p = std::make_shared<ScriptedBackendProvider>();
  p->dir_ = std::move(dir);
  return p;
}

std::filesystem::path ScriptedBackendProvider::script_for(const std::string& scenario_id,
                                                          const std::string& model_id) const {
  if (!file_.empty()) return file_;
  const std::string candidates[] = {scenario_id + "__" + model_id + ".jsonl",
                                    scenario_id + ".jsonl", model_id + ".jsonl", "default.jsonl"};
  for (const auto& name : candidates) {
    auto path = dir_ / name;
    if (std::filesystem::is_regular_file(path)) return path;
  }
  throw ConfigError(fmt::format("no script for cell ({}, {}) in {}", scenario_id, model_id,
                                dir_.string()));
}

std::shared_ptr<ChatBackend> ScriptedBackendProvider::for_cell(const std::string& scenario_id,
                                                               const std::string& model_id) {
  const auto path = script_for(scenario_id, model_id);
  return std::make_shared<ScriptedBackend>(load_script(path), "scripted:" + path.filename().string());
}

std::string ScriptedBackendProvider::describe() const {
  return "scripted:" + (file_.empty() ? dir_.string() : file_.string());
}

std::shared_ptr<BackendProvider> make_provider(const nlohmann::json& spec,
                                               const std::filesystem::path& base_dir) {
  if (!spec.is_object()) throw ConfigError("backend spec must be an object");
  const std::string kind = spec.value("kind", std::string{});
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  if (kind == "scripted") {
    if (spec.contains("script")) {
      return ScriptedBackendProvider::from_file(resolve(spec["script"].get<std::string>()));
    }
    if (spec.contains("script_dir")) {
      return ScriptedBackendProvider::from_directory(resolve(spec["script_dir"].get<std::string>()));
    }
    throw ConfigError("scripted backend needs 'script' or 'script_dir'");
  }
  if (kind == "live") {
    const std::string name = spec.value("backend", std::string{});
    if (name.empty()) throw ConfigError("live backend needs 'backend'");
    auto cfg = http_config_from_env(name);
    cfg.model = spec.value("model", std::string{});
    cfg.timeout = std::chrono::seconds(spec.value("timeout_s", 120));
    cfg.retry.max_retries = spec.value("max_retries", 3);
    cfg.requests_per_minute = spec.value("requests_per_minute", 0.0);
    if (cfg.retry.max_retries < 0) throw ConfigError("max_retries must be >= 0");
    return std::make_shared<SharedBackendProvider>(std::make_shared<HttpChatBackend>(std::move(cfg)));
  }
  throw ConfigError("unknown backend kind '" + kind + "' (expected scripted or live)");
}

}  // namespace sage::gateway
