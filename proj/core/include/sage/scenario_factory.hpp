/// @file scenario_factory.hpp
/// @brief Seed pools, persona and scene generation, and benchmark assembly.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sage/domain.hpp"
#include "sage/llm_gateway.hpp"

namespace sage::scenario {

struct HiddenIntention {
  std::string id;  // topic id, e.g. "deep_empathy"
  IntentionCategory category = IntentionCategory::Emotional;
  std::string text;

  bool operator==(const HiddenIntention&) const = default;
};

struct SeedPools {
  std::vector<std::string> keywords;
  std::vector<std::string> sentences;
  std::vector<int> ages;
  std::vector<std::string> themes;
  std::vector<HiddenIntention> hidden_intentions;

  /// The starter pools shipped with the library.
  static SeedPools builtin();
  static SeedPools from_json(const nlohmann::json& j);
  static SeedPools load(const std::filesystem::path& path);

  /// Throws PoolTooSmall or ConfigError.
  void validate() const;
  const HiddenIntention& intention(const std::string& id) const;
};

struct PersonaSeed {
  std::array<std::string, 3> keywords;
  std::array<std::string, 3> sentences;
  int age = 0;

  bool operator==(const PersonaSeed&) const = default;
};

using Rng = std::mt19937_64;

/// Independent generator for scenario `index` under `seed`.
Rng scenario_rng(std::uint64_t seed, std::uint64_t index);

/// Three keywords and three sentences without replacement, one age.
/// Throws PoolTooSmall.
PersonaSeed sample_persona_seed(const SeedPools& pools, Rng& rng);

/// Ordered topic → scenario count.
using Plan = std::vector<std::pair<std::string, int>>;
Plan default_plan();
Plan plan_from_json(const nlohmann::ordered_json& j);
Plan load_plan(const std::filesystem::path& path);

struct GenerationOptions {
  std::string model_id = "generator";
  double temperature = 0.7;
  int format_retries = 1;
};

/// "extrovert, casual, and impatient" style listing of the seed keywords.
std::string characteristics_text(const PersonaSeed& seed);

Persona generate_persona(const PersonaSeed& seed, gateway::ChatBackend& backend,
                         const GenerationOptions& options = {});

Scene generate_scene(const Persona& persona, const std::string& theme,
                     const HiddenIntention& intention, gateway::ChatBackend& backend,
                     const GenerationOptions& options = {});

struct GenerationFailure {
  std::string scenario_id;
  std::string reason;
};

struct ScenarioSet {
  std::vector<Scenario> scenarios;
  std::map<std::string, int> topic_counts;
  std::vector<GenerationFailure> failures;
};

struct BuildOptions {
  GenerationOptions generation;
  int parallelism = 1;
  /// When set, scenarios go to `<out_dir>/scenarios/<id>.json` and the
  /// failure report to `<out_dir>/generation_report.json`.
  std::filesystem::path out_dir;
};

/// Generates every planned scenario. Ids are `<topic>-<k>` with k from 1.
/// Failed scenarios are logged, skipped and listed in `failures`.
ScenarioSet build_benchmark(const SeedPools& pools, const Plan& plan, std::uint64_t seed,
                            gateway::BackendProvider& provider, const BuildOptions& options = {});

void save_scenario(const Scenario& scenario, const std::filesystem::path& dir);

/// Loads every `*.json` scenario in `path`, or in `path/scenarios` when that
/// directory exists. Sorted by id.
std::vector<Scenario> load_scenario_set(const std::filesystem::path& path);

}  // namespace sage::scenario
