/// @file testkit.hpp
/// @brief Shared test helpers: temp dirs, sample agent factors, canned judge
/// outputs and scripted run workspaces.
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sage/domain.hpp"
#include "sage/llm_gateway.hpp"
#include "sage/strategy.hpp"

namespace sage::testkit {

/// Directory holding tests/fixtures.
std::filesystem::path fixtures_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "sage");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

Persona sample_persona();
Scene sample_scene(const std::string& topic = "deep_empathy");
Scenario sample_scenario(const std::string& id, const std::string& topic = "deep_empathy");

/// A well-formed emotion estimate whose Change section reads `change_text`.
std::string estimate_text(const std::string& change_text);
std::string estimate_text(int change);
std::string reply_text(const std::string& response, const std::string& thinking = "Keep talking.");

/// Every judge reply one dialogue consumes: the opening, then (estimate,
/// reply) per turn. A turn listed in `farewell_turns` replies with "Goodbye".
std::vector<std::string> judge_script(const std::vector<std::string>& change_texts,
                                      const std::vector<int>& farewell_turns = {});
std::vector<std::string> judge_script(const std::vector<int>& changes,
                                      const std::vector<int>& farewell_turns = {});

void write_script(const std::filesystem::path& path, const std::vector<std::string>& texts);

/// Target utterances for a scripted target model.
std::vector<std::string> target_lines(const std::string& model, int n);

/// Scripted run workspace:
///   scenarios/<id>.json, targets/<model>/default.jsonl,
///   judge/<scenario>__<model>.jsonl, run.json
struct Workspace {
  std::filesystem::path root;
  std::filesystem::path config;
  std::filesystem::path out;
};

struct CellPlan {
  std::string scenario_id;
  std::string model;
  std::vector<std::string> change_texts;
  std::vector<int> farewell_turns;
};

Workspace write_workspace(const std::filesystem::path& root, const std::vector<Scenario>& scenarios,
                          const std::vector<std::string>& models, const std::vector<CellPlan>& cells,
                          int max_turns, int parallelism = 1);

/// Independent replay of the emotion rules for one scripted trajectory.
struct Trajectory {
  int final_emotion;
  int turns;
  Termination termination;
};
Trajectory replay(int initial, const std::vector<int>& raw_changes, int max_turns,
                  const std::vector<int>& farewell_turns = {});

/// Every alignment of a and b enumerated explicitly; best score under
/// match = 1, mismatch = 0, gap = 0, divided by max length.
double brute_force_similarity(const StrategySequence& a, const StrategySequence& b);

/// Ranks from explicit pairwise counting: rank = 1 + #smaller + #equal-others / 2.
std::vector<double> brute_force_ranks(const std::vector<double>& values);

}  // namespace sage::testkit
