/// @file bench_alignment.cpp
/// @brief Strategy-sequence alignment and SSRR throughput.

#include <random>

#include <benchmark/benchmark.h>

#include "sage/analytics.hpp"

namespace {

using namespace sage;

StrategySequence random_sequence(std::mt19937& rng, std::size_t len) {
  const auto taxonomy = strategy_taxonomy();
  std::uniform_int_distribution<std::size_t> pick(0, taxonomy.size() - 1);
  StrategySequence s(len);
  for (auto& c : s) c = taxonomy[pick(rng)].code;
  return s;
}

void BM_NwSimilarity(benchmark::State& state) {
  std::mt19937 rng(1);
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto a = random_sequence(rng, len);
  const auto b = random_sequence(rng, len);
  for (auto _ : state) benchmark::DoNotOptimize(analytics::nw_similarity(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NwSimilarity)->RangeMultiplier(2)->Range(2, 64)->Complexity(benchmark::oNSquared);

void BM_Ssrr(benchmark::State& state) {
  std::mt19937 rng(2);
  std::vector<std::vector<StrategySequence>> dialogues(static_cast<std::size_t>(state.range(0)));
  for (auto& d : dialogues) {
    for (int t = 0; t < 10; ++t) d.push_back(random_sequence(rng, 3));
  }
  for (auto _ : state) benchmark::DoNotOptimize(analytics::ssrr(dialogues));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Ssrr)->Arg(100)->Arg(1000);

}  // namespace
