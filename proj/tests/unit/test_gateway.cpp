/// @file test_gateway.cpp

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "sage/error.hpp"
#include "sage/llm_gateway.hpp"
#include "testkit.hpp"

namespace {

using namespace sage;
using namespace sage::gateway;

ChatRequest user_request(const std::string& text, const std::string& system = "") {
  return {"m", system, {{Role::User, text}}, 0.0, 4096};
}

TEST(Scripted, ReturnsCannedTextAndAdvances) {
  auto b = ScriptedBackend::from_texts({"hello"});
  const auto r = complete(*b, user_request("anything"));
  EXPECT_EQ(r.content, "hello");
  EXPECT_EQ(b->cursor(), 1u);
  EXPECT_THROW(complete(*b, user_request("again")), ScriptExhausted);
}

TEST(Scripted, KeyedEntriesAnswerByFingerprint) {
  const auto req = user_request("ping", "sys");
  ScriptedBackend b({{fingerprint(req), "pong"}, {std::nullopt, "first"}});
  EXPECT_EQ(complete(b, req).content, "pong");
  EXPECT_EQ(complete(b, req).content, "pong");
  EXPECT_EQ(complete(b, user_request("other")).content, "first");
  EXPECT_EQ(b.calls(), 3u);
}

TEST(Scripted, FingerprintSeparatesMessageBoundaries) {
  ChatRequest a{"m", "", {{Role::User, "ab"}, {Role::User, "c"}}, 0.0, 1};
  ChatRequest b{"m", "", {{Role::User, "a"}, {Role::User, "bc"}}, 0.0, 1};
  EXPECT_NE(fingerprint(a), fingerprint(b));
  EXPECT_EQ(fingerprint(a), fingerprint(a));
}

TEST(Scripted, UsageIsWhitespaceTokenCount) {
  auto b = ScriptedBackend::from_texts({"one two  three\nfour"});
  const auto r = complete(*b, user_request("a b c", "sys prompt"));
  EXPECT_EQ(r.usage.prompt_tokens, 5);
  EXPECT_EQ(r.usage.completion_tokens, 4);
}

TEST(Scripted, ReplayIsDeterministic) {
  const std::vector<std::string> texts = {"x", "y", "z"};
  auto a = ScriptedBackend::from_texts(texts);
  auto b = ScriptedBackend::from_texts(texts);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(complete(*a, user_request("q")).content, complete(*b, user_request("q")).content);
  }
}

TEST(Complete, RejectsEmptyRequest) {
  auto b = ScriptedBackend::from_texts({"x"});
  EXPECT_THROW(complete(*b, ChatRequest{"m", "", {}, 0.0, 1}), ValidationError);
  EXPECT_THROW(complete(*b, ChatRequest{"m", "s", {}, -1.0, 1}), ValidationError);
}

TEST(Usage, SumsTurns) {
  DialogueRecord r;
  EXPECT_EQ(usage_of(r), 0);
  Turn t1;
  t1.target_token_usage = {10, 20};
  Turn t2;
  t2.target_token_usage = {15, 25};
  r.turns = {t1, t2};
  EXPECT_EQ(usage_of(r), 70);
}

TEST(Scripts, SaveLoadRoundTrip) {
  testkit::TempDir dir;
  const std::vector<ScriptEntry> entries = {{std::nullopt, "a\nb"}, {"00ff", "keyed"}};
  save_script(dir / "s.jsonl", entries);
  const auto back = load_script(dir / "s.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].content, "a\nb");
  EXPECT_FALSE(back[0].fingerprint);
  EXPECT_EQ(back[1].fingerprint, "00ff");
}

TEST(Scripts, BadLineIsConfigError) {
  testkit::TempDir dir;
  std::ofstream(dir / "bad.jsonl") << "{\"content\": \"ok\"}\nnot json\n";
  EXPECT_THROW(load_script(dir / "bad.jsonl"), ConfigError);
}

TEST(Provider, DirectoryLookupOrder) {
  testkit::TempDir dir;
  testkit::write_script(dir / "default.jsonl", {"d"});
  testkit::write_script(dir / "m1.jsonl", {"model"});
  testkit::write_script(dir / "s1.jsonl", {"scenario"});
  testkit::write_script(dir / "s1__m1.jsonl", {"cell"});
  auto p = ScriptedBackendProvider::from_directory(dir.path());
  EXPECT_EQ(p->script_for("s1", "m1").filename(), "s1__m1.jsonl");
  EXPECT_EQ(p->script_for("s1", "m2").filename(), "s1.jsonl");
  EXPECT_EQ(p->script_for("s2", "m1").filename(), "m1.jsonl");
  EXPECT_EQ(p->script_for("s2", "m2").filename(), "default.jsonl");
  auto a = p->for_cell("s1", "m1");
  auto b = p->for_cell("s1", "m1");
  EXPECT_EQ(complete(*a, user_request("q")).content, "cell");
  EXPECT_EQ(complete(*b, user_request("q")).content, "cell");
}

TEST(Provider, MakeProviderValidates) {
  testkit::TempDir dir;
  EXPECT_THROW(make_provider(nlohmann::json{{"kind", "telepathy"}}, dir.path()), ConfigError);
  EXPECT_THROW(make_provider(nlohmann::json{{"kind", "scripted"}}, dir.path()), ConfigError);
  EXPECT_THROW(make_provider(nlohmann::json{{"kind", "scripted"}, {"script", "missing.jsonl"}}, dir.path()),
               ConfigError);
  testkit::write_script(dir / "x.jsonl", {"ok"});
  auto p = make_provider(nlohmann::json{{"kind", "scripted"}, {"script", "x.jsonl"}}, dir.path());
  EXPECT_EQ(complete(*p->for_cell("a", "b"), user_request("q")).content, "ok");
}

TEST(Wire, CompletionsPath) {
  EXPECT_EQ(completions_path(""), "/v1/chat/completions");
  EXPECT_EQ(completions_path("/"), "/v1/chat/completions");
  EXPECT_EQ(completions_path("/v1"), "/v1/chat/completions");
  EXPECT_EQ(completions_path("/api/v1/"), "/api/v1/chat/completions");
  EXPECT_EQ(completions_path("/proxy"), "/proxy/v1/chat/completions");
}

TEST(Wire, RequestShape) {
  const auto j = to_wire(ChatRequest{"m", "sys", {{Role::User, "u"}, {Role::Assistant, "a"}}, 0.5, 99}, "");
  EXPECT_EQ(j["model"], "m");
  ASSERT_EQ(j["messages"].size(), 3u);
  EXPECT_EQ(j["messages"][0]["role"], "system");
  EXPECT_EQ(j["messages"][1]["role"], "user");
  EXPECT_EQ(j["messages"][2]["role"], "assistant");
  EXPECT_EQ(j["temperature"], 0.5);
  EXPECT_EQ(j["max_tokens"], 99);
  EXPECT_EQ(to_wire(ChatRequest{"m", "", {{Role::User, "u"}}, 0, 1}, "override")["model"], "override");
}

TEST(Wire, ResponseShape) {
  const auto r = from_wire(nlohmann::json::parse(
                               R"({"choices":[{"message":{"role":"assistant","content":"hi"}}],
                                   "usage":{"prompt_tokens":3,"completion_tokens":1}})"),
                           "b");
  EXPECT_EQ(r.content, "hi");
  EXPECT_EQ(r.usage.total(), 4);
  EXPECT_THROW(from_wire(nlohmann::json::parse(R"({"choices":[]})"), "b"), GatewayError);
  EXPECT_THROW(from_wire(nlohmann::json::parse(R"({"choices":[{"message":{"content":""}}]})"), "b"),
               GatewayError);
}

TEST(Env, ConfigFromEnvironment) {
  ::setenv("SAGE_BASE_URL_MY_LAB", "http://127.0.0.1:9", 1);
  ::setenv("SAGE_API_KEY_MY_LAB", "sk-test-secret", 1);
  const auto cfg = http_config_from_env("my-lab");
  EXPECT_EQ(cfg.base_url, "http://127.0.0.1:9");
  EXPECT_EQ(cfg.api_key, "sk-test-secret");
  ::unsetenv("SAGE_BASE_URL_MY_LAB");
  ::unsetenv("SAGE_API_KEY_MY_LAB");
  EXPECT_THROW(http_config_from_env("my-lab"), ConfigError);
}

TEST(Retry, BackoffIsCappedExponential) {
  RetryPolicy p;
  EXPECT_EQ(p.backoff_for(0).count(), 500);
  EXPECT_EQ(p.backoff_for(1).count(), 1000);
  EXPECT_EQ(p.backoff_for(2).count(), 2000);
  EXPECT_EQ(p.backoff_for(10).count(), 8000);
}

}  // namespace
