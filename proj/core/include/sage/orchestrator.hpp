/// @file orchestrator.hpp
/// @brief Benchmark runs over the scenario × target-model matrix with
/// crash-safe persistence and resume.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stop_token>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sage/domain.hpp"
#include "sage/llm_gateway.hpp"
#include "sage/prompt_kit.hpp"

namespace sage::orchestrator {

struct ModelEndpoint {
  std::string model_id;
  nlohmann::json backend;  // backend spec, see gateway::make_provider
};

struct RunConfig {
  std::filesystem::path scenario_set;
  std::vector<ModelEndpoint> target_models;
  ModelEndpoint judge_model;
  int max_turns = kDefaultMaxTurns;
  int initial_emotion = kDefaultInitialEmotion;
  int parallelism = 1;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  int format_retries = 1;
  double target_temperature = 0.0;
  double judge_temperature = 0.0;
  std::filesystem::path base_dir;  // relative backend paths resolve here
  nlohmann::json source;           // the config as written, kept as a snapshot
};

/// Parses a run config. Relative paths resolve against `base_dir`.
/// Throws ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

struct DialogueLimits {
  int max_turns = kDefaultMaxTurns;
  int initial_emotion = kDefaultInitialEmotion;
  int format_retries = 1;
  double target_temperature = 0.0;
  double judge_temperature = 0.0;
  int max_output_tokens = 4096;
  const prompt::TemplateStore* templates = nullptr;
};

using DialogueResult = std::variant<DialogueRecord, AbortedDialogue>;

/// Runs one dialogue to termination. Gateway and parse failures become an
/// AbortedDialogue; nothing propagates except programming errors.
DialogueResult run_dialogue(const Scenario& scenario, const std::string& target_model_id,
                            gateway::ChatBackend& target,
                            std::shared_ptr<gateway::ChatBackend> judge,
                            const std::string& judge_model_id, const DialogueLimits& limits);

struct CellResult {
  std::string scenario_id;
  std::string target_model_id;
  bool aborted = false;
  int final_emotion = 0;
};

struct RunControl {
  /// Called after each finished cell has been persisted (serialized).
  std::function<void(const CellResult&)> on_result;
  /// Requesting stop lets in-flight dialogues finish but starts no new ones.
  std::stop_source stop;
};

struct RunSummary {
  std::size_t cells_total = 0;
  std::size_t skipped = 0;   // already present from an earlier run
  std::size_t executed = 0;  // dialogues run by this call
  std::size_t records = 0;   // completed records in this call
  std::size_t aborted = 0;   // aborted dialogues in this call
  bool interrupted = false;
  bool complete() const noexcept { return skipped + executed == cells_total; }
};

inline constexpr std::string_view kRecordsFile = "records.jsonl";
inline constexpr std::string_view kAbortedFile = "aborted.jsonl";
inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kConfigSnapshotFile = "config.json";

/// Executes every cell not yet present in the output directory. Without
/// `resume`, an existing records file is a ConfigError.
RunSummary run_benchmark(const RunConfig& config, bool resume, RunControl* control = nullptr);

}  // namespace sage::orchestrator
