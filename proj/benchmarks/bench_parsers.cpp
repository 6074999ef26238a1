/// @file bench_parsers.cpp
/// @brief Structured-output parser throughput on canonical judge replies.

#include <benchmark/benchmark.h>

#include "sage/prompt_kit.hpp"

namespace {

using namespace sage;
using namespace sage::prompt;

void BM_ParseEmotionEstimate(benchmark::State& state) {
  const auto text = format_emotion_estimate(
      {"The NPC asked how my mother is doing.", "Partly.", "It picked up on the hospital stay.",
       "It feels like someone finally listened, though the advice was generic.", 4});
  for (auto _ : state) benchmark::DoNotOptimize(parse_emotion_estimate(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseEmotionEstimate);

void BM_ParseBlri(benchmark::State& state) {
  const auto text = format_blri({'A', 'B', 'C', 'D', 'E', 'F', 'A', 'B', 'C', 'D', 'E', 'F'});
  for (auto _ : state) benchmark::DoNotOptimize(parse_blri(text));
}
BENCHMARK(BM_ParseBlri);

void BM_ParseUtteranceRatings(benchmark::State& state) {
  UtteranceRatings r{};
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<int>(i % 6) + 1;
  const auto text = format_utterance_ratings(r);
  for (auto _ : state) benchmark::DoNotOptimize(parse_utterance_ratings(text));
}
BENCHMARK(BM_ParseUtteranceRatings);

void BM_ParseStrategies(benchmark::State& state) {
  const auto text = format_strategies({{{'B', 2}, {'C', 1}}, {{'F', 5}}, {{'A', 1}, {'E', 2}, {'D', 3}}});
  for (auto _ : state) benchmark::DoNotOptimize(parse_strategies(text));
}
BENCHMARK(BM_ParseStrategies);

void BM_ParseCoordinates(benchmark::State& state) {
  const std::vector<std::string> models{"gpt-4o", "o3-mini", "Claude-3.7-Sonnet", "DeepSeek-R1"};
  const auto text = format_coordinates(
      {{"gpt-4o", {0.4, 0.6}}, {"o3-mini", {-0.2, 0.1}}, {"Claude-3.7-Sonnet", {0.5, -0.3}}, {"DeepSeek-R1", {0.0, 0.9}}});
  for (auto _ : state) benchmark::DoNotOptimize(parse_coordinates(text, models));
}
BENCHMARK(BM_ParseCoordinates);

}  // namespace
