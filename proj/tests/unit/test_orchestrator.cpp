/// @file test_orchestrator.cpp

#include <algorithm>
#include <fstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "sage/error.hpp"
#include "sage/orchestrator.hpp"
#include "sage/serialization.hpp"
#include "testkit.hpp"

namespace {

using namespace sage;
using namespace sage::orchestrator;
namespace fs = std::filesystem;

const std::vector<std::string> kModels{"alpha", "beta"};

std::vector<Scenario> scenarios(int n) {
  std::vector<Scenario> out;
  for (int i = 1; i <= n; ++i) out.push_back(testkit::sample_scenario("s" + std::to_string(i)));
  return out;
}

std::vector<testkit::CellPlan> cells(int n_scenarios, int max_turns) {
  std::vector<testkit::CellPlan> out;
  for (int i = 1; i <= n_scenarios; ++i) {
    for (std::size_t m = 0; m < kModels.size(); ++m) {
      std::vector<std::string> changes;
      for (int t = 0; t < max_turns; ++t) {
        changes.push_back(fmt::format("{:+d}", (m == 0 ? 1 : -1) * (i + t) % 11));
      }
      out.push_back({"s" + std::to_string(i), kModels[m], changes, {}});
    }
  }
  return out;
}

std::vector<DialogueRecord> sorted_records(const fs::path& out) {
  auto r = read_jsonl<DialogueRecord>(out / std::string(kRecordsFile));
  std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) {
    return std::tie(a.scenario_id, a.target_model_id) < std::tie(b.scenario_id, b.target_model_id);
  });
  return r;
}

TEST(RunConfig, ParsesAndResolvesPaths) {
  const auto j = nlohmann::json::parse(R"({
    "scenario_set": "scen", "output_dir": "out",
    "target_models": [{"model_id": "m", "backend": {"kind": "scripted", "script_dir": "t"}}],
    "judge_model": {"model_id": "j", "backend": {"kind": "live", "backend": "X", "api_key": "sk-leak"}},
    "max_turns": 7, "parallelism": 3, "seed": 11})");
  const auto c = run_config_from_json(j, "/base");
  EXPECT_EQ(c.scenario_set, fs::path("/base/scen"));
  EXPECT_EQ(c.output_dir, fs::path("/base/out"));
  EXPECT_EQ(c.max_turns, 7);
  EXPECT_EQ(c.parallelism, 3);
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.initial_emotion, 50);
  EXPECT_EQ(c.judge_model.model_id, "j");
  EXPECT_EQ(c.source.dump().find("sk-leak"), std::string::npos);
}

TEST(RunConfig, RejectsMissingFields) {
  EXPECT_THROW(run_config_from_json(nlohmann::json::array(), "."), ConfigError);
  EXPECT_THROW(run_config_from_json(nlohmann::json{{"scenario_set", "x"}}, "."), ConfigError);
}

TEST(RunDialogue, ProducesConsistentRecord) {
  const auto s = testkit::sample_scenario("s1");
  auto target = gateway::ScriptedBackend::from_texts(testkit::target_lines("m", 5));
  std::shared_ptr<gateway::ScriptedBackend> judge(
      gateway::ScriptedBackend::from_texts(testkit::judge_script(std::vector<int>{4, -2, 7})));
  DialogueLimits limits;
  limits.max_turns = 3;
  const auto result = run_dialogue(s, "m", *target, judge, "judge", limits);
  ASSERT_TRUE(std::holds_alternative<DialogueRecord>(result));
  const auto& r = std::get<DialogueRecord>(result);
  EXPECT_EQ(r.final_emotion, 59);
  EXPECT_EQ(r.turns.size(), 3u);
  EXPECT_EQ(r.termination, Termination::TurnLimit);
  EXPECT_TRUE(check_record(r).empty());
  EXPECT_GT(r.total_target_tokens, 0);

  const auto seen = target->requests();
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_FALSE(seen[0].system_prompt.empty());
  EXPECT_EQ(seen[0].messages.size(), 1u);
  EXPECT_EQ(seen[2].messages.size(), 5u);
  EXPECT_EQ(seen[2].messages[1].role, gateway::Role::Assistant);
  EXPECT_EQ(seen[0].temperature, 0.0);
}

TEST(RunDialogue, ExhaustedJudgeAborts) {
  const auto s = testkit::sample_scenario("s1");
  auto target = gateway::ScriptedBackend::from_texts(testkit::target_lines("m", 5));
  std::shared_ptr<gateway::ScriptedBackend> judge(
      gateway::ScriptedBackend::from_texts(testkit::judge_script(std::vector<int>{4})));
  DialogueLimits limits;
  limits.max_turns = 3;
  const auto result = run_dialogue(s, "m", *target, judge, "judge", limits);
  ASSERT_TRUE(std::holds_alternative<AbortedDialogue>(result));
  const auto& a = std::get<AbortedDialogue>(result);
  EXPECT_EQ(a.turns_completed, 1);
  EXPECT_FALSE(a.reason.empty());
}

TEST(RunBenchmark, RunsEveryCellAndWritesManifest) {
  testkit::TempDir dir;
  const auto ws = testkit::write_workspace(dir.path(), scenarios(3), kModels, cells(3, 4), 4, 2);
  const auto summary = run_benchmark(load_run_config(ws.config), false);
  EXPECT_EQ(summary.cells_total, 6u);
  EXPECT_EQ(summary.executed, 6u);
  EXPECT_EQ(summary.records, 6u);
  EXPECT_FALSE(summary.interrupted);
  const auto records = sorted_records(ws.out);
  ASSERT_EQ(records.size(), 6u);
  for (const auto& r : records) EXPECT_TRUE(check_record(r).empty()) << r.scenario_id;
  const auto manifest = read_json_file(ws.out / std::string(kManifestFile));
  EXPECT_EQ(manifest["cells_total"], 6);
  EXPECT_TRUE(manifest["complete"].get<bool>());
  int counted = 0;
  for (const auto& [model, c] : manifest["counts"].items()) {
    counted += c["success"].get<int>() + c["failure"].get<int>() + c["max_turns"].get<int>();
  }
  EXPECT_EQ(counted, 6);
  EXPECT_TRUE(fs::exists(ws.out / std::string(kConfigSnapshotFile)));
}

TEST(RunBenchmark, ExistingOutputNeedsResume) {
  testkit::TempDir dir;
  const auto ws = testkit::write_workspace(dir.path(), scenarios(1), kModels, cells(1, 2), 2, 1);
  const auto config = load_run_config(ws.config);
  run_benchmark(config, false);
  EXPECT_THROW(run_benchmark(config, false), ConfigError);
  const auto again = run_benchmark(config, true);
  EXPECT_EQ(again.skipped, 2u);
  EXPECT_EQ(again.executed, 0u);
}

TEST(RunBenchmark, StopThenResumeFinishesRemainder) {
  testkit::TempDir dir;
  const auto ws = testkit::write_workspace(dir.path(), scenarios(4), kModels, cells(4, 3), 3, 1);
  const auto config = load_run_config(ws.config);
  RunControl control;
  int finished = 0;
  control.on_result = [&](const CellResult&) {
    if (++finished == 5) control.stop.request_stop();
  };
  const auto first = run_benchmark(config, false, &control);
  EXPECT_EQ(first.executed, 5u);
  EXPECT_TRUE(first.interrupted);
  const auto second = run_benchmark(config, true);
  EXPECT_EQ(second.skipped, 5u);
  EXPECT_EQ(second.executed, 3u);
  EXPECT_TRUE(second.complete());

  testkit::TempDir fresh;
  const auto ws2 = testkit::write_workspace(fresh.path(), scenarios(4), kModels, cells(4, 3), 3, 1);
  run_benchmark(load_run_config(ws2.config), false);
  EXPECT_EQ(sorted_records(ws.out), sorted_records(ws2.out));
}

TEST(RunBenchmark, ParallelismDoesNotChangeRecords) {
  testkit::TempDir a;
  testkit::TempDir b;
  const auto wa = testkit::write_workspace(a.path(), scenarios(4), kModels, cells(4, 5), 5, 1);
  const auto wb = testkit::write_workspace(b.path(), scenarios(4), kModels, cells(4, 5), 5, 4);
  run_benchmark(load_run_config(wa.config), false);
  run_benchmark(load_run_config(wb.config), false);
  EXPECT_EQ(sorted_records(wa.out), sorted_records(wb.out));
}

TEST(RunBenchmark, AbortedDialogueIsRecordedSeparately) {
  testkit::TempDir dir;
  auto plan = cells(2, 3);
  plan[1].change_texts.resize(1);
  const auto ws = testkit::write_workspace(dir.path(), scenarios(2), kModels, plan, 3, 1);
  const auto summary = run_benchmark(load_run_config(ws.config), false);
  EXPECT_EQ(summary.records, 3u);
  EXPECT_EQ(summary.aborted, 1u);
  const auto aborted = read_jsonl<AbortedDialogue>(ws.out / std::string(kAbortedFile));
  ASSERT_EQ(aborted.size(), 1u);
  EXPECT_EQ(aborted[0].scenario_id, "s1");
  EXPECT_EQ(aborted[0].target_model_id, "beta");
  const auto manifest = read_json_file(ws.out / std::string(kManifestFile));
  EXPECT_EQ(manifest["counts"]["beta"]["aborted"], 1);
  const auto again = run_benchmark(load_run_config(ws.config), true);
  EXPECT_EQ(again.executed, 0u);
}

}  // namespace
