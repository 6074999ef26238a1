/// @file test_http_backend.cpp
/// @brief Live backend against an in-process stub chat-completions server.

#include <atomic>
#include <mutex>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "sage/error.hpp"
#include "sage/llm_gateway.hpp"

namespace {

using namespace sage;
using namespace sage::gateway;

constexpr const char* kSecret = "sk-unit-test-do-not-log";

class StubServer {
 public:
  /// `statuses` are served in order; after they run out every call succeeds.
  explicit StubServer(std::vector<int> statuses) : statuses_(std::move(statuses)) {
    server_.Post(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mutex_);
      paths_.push_back(req.path);
      auth_.push_back(req.get_header_value("Authorization"));
      bodies_.push_back(req.body);
      const std::size_t n = calls_++;
      if (n < statuses_.size() && statuses_[n] != 200) {
        res.status = statuses_[n];
        res.set_content(R"({"error":"stub"})", "application/json");
        return;
      }
      res.set_content(
          R"({"choices":[{"message":{"role":"assistant","content":"stub reply"}}],)"
          R"("usage":{"prompt_tokens":12,"completion_tokens":2}})",
          "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& prefix = "") const {
    return "http://127.0.0.1:" + std::to_string(port_) + prefix;
  }
  std::size_t calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
  }
  std::vector<std::string> paths() const {
    std::lock_guard lock(mutex_);
    return paths_;
  }
  std::vector<std::string> auth() const {
    std::lock_guard lock(mutex_);
    return auth_;
  }
  std::vector<std::string> bodies() const {
    std::lock_guard lock(mutex_);
    return bodies_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::vector<int> statuses_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
  std::vector<std::string> paths_;
  std::vector<std::string> auth_;
  std::vector<std::string> bodies_;
};

struct Backoffs {
  std::vector<long> waits;
  HttpChatBackend::Sleeper sleeper() {
    return [this](std::chrono::milliseconds d) { waits.push_back(static_cast<long>(d.count())); };
  }
};

HttpBackendConfig config_for(const StubServer& s, const std::string& prefix = "") {
  HttpBackendConfig c;
  c.name = "stub";
  c.base_url = s.url(prefix);
  c.api_key = kSecret;
  c.timeout = std::chrono::seconds(5);
  return c;
}

ChatRequest request() { return {"target-x", "be kind", {{Role::User, "hello there"}}, 0.0, 64}; }

TEST(HttpBackend, TwoTransientFailuresThenSuccess) {
  StubServer server({503, 500, 200});
  Backoffs b;
  HttpChatBackend backend(config_for(server), b.sleeper());
  const auto r = complete(backend, request());
  EXPECT_EQ(r.content, "stub reply");
  EXPECT_EQ(r.attempts, 3);
  EXPECT_EQ(r.usage.total(), 14);
  EXPECT_EQ(server.calls(), 3u);
  EXPECT_EQ(b.waits, (std::vector<long>{500, 1000}));
}

TEST(HttpBackend, RateLimitIsRetried) {
  StubServer server({429, 200});
  Backoffs b;
  HttpChatBackend backend(config_for(server), b.sleeper());
  EXPECT_EQ(complete(backend, request()).attempts, 2);
}

TEST(HttpBackend, RefusalIsNotRetried) {
  StubServer server({400, 200});
  Backoffs b;
  HttpChatBackend backend(config_for(server), b.sleeper());
  try {
    complete(backend, request());
    FAIL() << "expected BackendRefusal";
  } catch (const BackendRefusal& e) {
    EXPECT_EQ(e.status(), 400);
  }
  EXPECT_EQ(server.calls(), 1u);
  EXPECT_TRUE(b.waits.empty());
}

TEST(HttpBackend, ExhaustedRetries) {
  StubServer server({500, 500, 500, 500, 500});
  Backoffs b;
  auto cfg = config_for(server);
  cfg.retry.max_retries = 2;
  HttpChatBackend backend(cfg, b.sleeper());
  try {
    complete(backend, request());
    FAIL() << "expected TransportExhausted";
  } catch (const TransportExhausted& e) {
    EXPECT_EQ(e.attempts(), 3);
  }
  EXPECT_EQ(server.calls(), 3u);
}

TEST(HttpBackend, ConnectionRefusedExhausts) {
  HttpBackendConfig cfg;
  cfg.name = "nowhere";
  cfg.base_url = "http://127.0.0.1:1";
  cfg.timeout = std::chrono::seconds(1);
  cfg.retry.max_retries = 1;
  Backoffs b;
  HttpChatBackend backend(cfg, b.sleeper());
  EXPECT_THROW(complete(backend, request()), TransportExhausted);
}

TEST(HttpBackend, WireFormatAndAuthHeader) {
  StubServer server({});
  HttpChatBackend backend(config_for(server, "/v1"));
  complete(backend, request());
  ASSERT_EQ(server.paths().size(), 1u);
  EXPECT_EQ(server.paths()[0], "/v1/chat/completions");
  EXPECT_EQ(server.auth()[0], std::string("Bearer ") + kSecret);
  const auto body = nlohmann::json::parse(server.bodies()[0]);
  EXPECT_EQ(body["model"], "target-x");
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "hello there");
}

TEST(HttpBackend, CredentialNeverLogged) {
  std::ostringstream captured;
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(captured);
  auto previous = spdlog::default_logger();
  auto logger = std::make_shared<spdlog::logger>("capture", sink);
  logger->set_level(spdlog::level::trace);
  spdlog::set_default_logger(logger);
  {
    StubServer server({500, 503, 400});
    Backoffs b;
    HttpChatBackend backend(config_for(server), b.sleeper());
    EXPECT_THROW(complete(backend, request()), BackendRefusal);
  }
  spdlog::set_default_logger(previous);
  EXPECT_NE(captured.str().find("attempt"), std::string::npos);
  EXPECT_EQ(captured.str().find(kSecret), std::string::npos);
}

}  // namespace
