/// @file llm_gateway.hpp
/// @brief Uniform access to chat-completion backends: a live HTTP client
/// speaking the chat-completions wire format, a deterministic scripted
/// backend, retry/backoff, rate limiting and token accounting.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sage/domain.hpp"

namespace sage::gateway {

enum class Role { User, Assistant };
std::string_view to_string(Role role) noexcept;

struct Message {
  Role role = Role::User;
  std::string content;

  bool operator==(const Message&) const = default;
};

struct ChatRequest {
  std::string model_id;
  std::string system_prompt;
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_output_tokens = 4096;
};

struct ChatResponse {
  std::string content;
  TokenUsage usage;
  std::string backend_id;
  int attempts = 1;
};

/// A chat-completion endpoint. Implementations must be safe to call from
/// several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual std::string id() const = 0;
};

/// Validates the request, then forwards to the backend.
ChatResponse complete(ChatBackend& backend, const ChatRequest& request);

/// Number of whitespace-separated tokens.
std::int64_t whitespace_token_count(std::string_view text);

/// Sum of the target model's prompt and completion tokens across all turns.
std::int64_t usage_of(const DialogueRecord& record);

/// Hex FNV-1a 64 over the system prompt and the message contents.
std::string fingerprint(const ChatRequest& request);

// ---------------------------------------------------------------------------
// Scripted backend
// ---------------------------------------------------------------------------

struct ScriptEntry {
  std::optional<std::string> fingerprint;
  std::string content;
};

/// Reads a JSONL script: one {"content": ..., "fingerprint"?: ...} per line.
std::vector<ScriptEntry> load_script(const std::filesystem::path& path);
void save_script(const std::filesystem::path& path, const std::vector<ScriptEntry>& entries);

/// Replays canned responses. Entries with a fingerprint answer any request
/// whose fingerprint matches (repeatable); the remaining entries are served
/// in order, one per call. Usage is synthesised from whitespace token counts.
class ScriptedBackend final : public ChatBackend {
 public:
  explicit ScriptedBackend(std::vector<ScriptEntry> entries, std::string id = "scripted");
  static std::unique_ptr<ScriptedBackend> from_texts(const std::vector<std::string>& texts,
                                                     std::string id = "scripted");

  ChatResponse complete(const ChatRequest& request) override;
  std::string id() const override { return id_; }

  std::size_t cursor() const;
  std::size_t calls() const;
  std::vector<ChatRequest> requests() const;  // every request seen, in order

 private:
  std::string id_;
  std::map<std::string, std::string> keyed_;
  std::vector<std::string> ordered_;
  mutable std::mutex mutex_;
  std::size_t cursor_ = 0;
  std::vector<ChatRequest> seen_;
};

// ---------------------------------------------------------------------------
// Live HTTP backend
// ---------------------------------------------------------------------------

struct RetryPolicy {
  int max_retries = 3;  // attempts = max_retries + 1
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};

  std::chrono::milliseconds backoff_for(int retry) const;
};

/// Requests-per-minute limiter shared by all callers of one backend.
class TokenBucket {
 public:
  explicit TokenBucket(double requests_per_minute);
  void acquire();

 private:
  double rate_per_second_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mutex_;
};

struct HttpBackendConfig {
  std::string name;      // logical backend name, e.g. "OPENAI"
  std::string base_url;  // scheme://host[:port][/prefix]
  std::string api_key;   // never logged or persisted
  std::string model;     // provider model name; empty = request.model_id
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
  double requests_per_minute = 0.0;  // 0 = unlimited
};

/// Fills base_url and api_key from SAGE_BASE_URL_<NAME> / SAGE_API_KEY_<NAME>.
HttpBackendConfig http_config_from_env(const std::string& backend_name);

/// Path of the completions endpoint for a base URL ("/v1/chat/completions",
/// or "/chat/completions" when the base already ends in "/v1").
std::string completions_path(std::string_view base_url_path);

/// Serializes a request to the chat-completions body.
nlohmann::json to_wire(const ChatRequest& request, const std::string& model_override);

/// Parses a chat-completions response body. Throws GatewayError on bad shape.
ChatResponse from_wire(const nlohmann::json& body, const std::string& backend_id);

class HttpChatBackend final : public ChatBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpChatBackend(HttpBackendConfig config, Sleeper sleeper = {});
  ~HttpChatBackend() override;

  ChatResponse complete(const ChatRequest& request) override;
  std::string id() const override { return config_.name; }

 private:
  HttpBackendConfig config_;
  Sleeper sleep_;
  std::unique_ptr<TokenBucket> bucket_;
};

// ---------------------------------------------------------------------------
// Backend specs and per-cell providers
// ---------------------------------------------------------------------------

/// Hands out the backend to use for one (scenario, target model) cell. Live
/// providers share one backend; scripted providers give every cell a fresh
/// script cursor so concurrent dialogues stay deterministic.
class BackendProvider {
 public:
  virtual ~BackendProvider() = default;
  virtual std::shared_ptr<ChatBackend> for_cell(const std::string& scenario_id,
                                                const std::string& model_id) = 0;
  virtual std::string describe() const = 0;
};

class SharedBackendProvider final : public BackendProvider {
 public:
  explicit SharedBackendProvider(std::shared_ptr<ChatBackend> backend)
      : backend_(std::move(backend)) {}
  std::shared_ptr<ChatBackend> for_cell(const std::string&, const std::string&) override {
    return backend_;
  }
  std::string describe() const override { return backend_->id(); }

 private:
  std::shared_ptr<ChatBackend> backend_;
};

/// Scripted provider. With a single script file every cell replays it from
/// the start. With a directory, a cell uses the first existing file among
/// `<scenario>__<model>.jsonl`, `<scenario>.jsonl`, `<model>.jsonl`,
/// `default.jsonl`.
class ScriptedBackendProvider final : public BackendProvider {
 public:
  static std::shared_ptr<ScriptedBackendProvider> from_file(std::filesystem::path file);
  static std::shared_ptr<ScriptedBackendProvider> from_directory(std::filesystem::path dir);

  std::shared_ptr<ChatBackend> for_cell(const std::string& scenario_id,
                                        const std::string& model_id) override;
  std::string describe() const override;
  std::filesystem::path script_for(const std::string& scenario_id,
                                   const std::string& model_id) const;

 private:
  std::filesystem::path file_;
  std::filesystem::path dir_;
};

/// Builds a provider from a JSON backend spec:
///   {"kind": "scripted", "script": "file.jsonl"}
///   {"kind": "scripted", "script_dir": "dir"}
///   {"kind": "live", "backend": "OPENAI", "model": "gpt-4o", "timeout_s": 120,
///    "max_retries": 3, "requests_per_minute": 60}
/// Relative paths resolve against `base_dir`. Throws ConfigError.
std::shared_ptr<BackendProvider> make_provider(const nlohmann::json& spec,
                                               const std::filesystem::path& base_dir);

}  // namespace sage::gateway
