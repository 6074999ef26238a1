/// @file bench_dialogue.cpp
/// @brief One scripted dialogue end to end: prompt rendering, parsing and
/// the emotion state machine, with no model latency.

#include <fmt/format.h>
#include <benchmark/benchmark.h>

#include "sage/orchestrator.hpp"

namespace {

using namespace sage;

Scenario scenario() {
  Scenario s;
  s.id = "bench";
  s.persona = {"Li Jiajun", 28, "Male", "Vocal teacher", {"Exercises every day."},
               {"Running.", "Online novels.", "Livehouse jazz."}, "Direct and impatient.",
               "extrovert, casual, and impatient"};
  s.scene.topic = "deep_empathy";
  s.scene.theme = "family caregiving";
  s.scene.hidden_intention = "Wants his effort to be recognised.";
  s.scene.background = {"", "His mother fell.", "Two weeks at the hospital.", "Siblings did not help.",
                        "Exhausted.", "Resentful."};
  s.scene.reaction_rules = "Recognition softens him.";
  return s;
}

void BM_ScriptedDialogue(benchmark::State& state) {
  const int turns = static_cast<int>(state.range(0));
  std::vector<std::string> judge{"Thinking:\nOpen up.\nResponse:\nIt has been a rough month."};
  std::vector<std::string> target;
  for (int t = 1; t <= turns; ++t) {
    judge.push_back(fmt::format("Content:\nc\nTargetCompletion:\nt\nActivity:\na\nAnalyze:\nz\nChange:\n{:+d}\n",
                                t % 2 ? 1 : -1));
    judge.push_back(fmt::format("Thinking:\nt\nResponse:\nreply {}", t));
    target.push_back(fmt::format("supporter line {}", t));
  }
  const auto s = scenario();
  orchestrator::DialogueLimits limits;
  limits.max_turns = turns;
  for (auto _ : state) {
    auto target_backend = gateway::ScriptedBackend::from_texts(target);
    std::shared_ptr<gateway::ChatBackend> judge_backend = gateway::ScriptedBackend::from_texts(judge);
    benchmark::DoNotOptimize(orchestrator::run_dialogue(s, "bench", *target_backend, judge_backend, "judge", limits));
  }
}
BENCHMARK(BM_ScriptedDialogue)->Arg(5)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace
