/// @file judges.hpp
/// @brief Post-hoc LLM-judged assessments of finished dialogues: BLRI thought
/// scoring, utterance empathy scoring, strategy annotation, model profiling
/// and coordinate placement. All operations are read-only over records.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sage/domain.hpp"
#include "sage/llm_gateway.hpp"
#include "sage/prompt_kit.hpp"
#include "sage/strategy.hpp"

namespace sage::judges {

/// 1-based item numbers scored in reverse.
struct ReverseItems {
  std::set<int> blri{12};
  std::set<int> utterance{4, 6};

  static ReverseItems none() { return {{}, {}}; }
};

struct Dimension {
  std::string_view name;
  int first_item;  // 1-based, inclusive
  int last_item;
};

std::span<const Dimension> blri_dimensions();       // 1-4, 5-8, 9-10, 11-12
std::span<const Dimension> utterance_dimensions();  // 1-6, 7-10, 11-15

/// A..F → 100, 80, 60, 40, 20, 0.
int blri_label_score(char label);

/// Item scores on 0..100; reversed items become 100 - score.
std::array<double, prompt::kBlriItems> score_blri(const prompt::BlriLabels& labels,
                                                  const std::set<int>& reverse);

/// 1..6 → 1..5 by r' = 1 + (r - 1) * 0.8.
double rescale_utterance(int rating);

/// Reversed items use 7 - r before rescaling.
std::array<double, prompt::kUtteranceItems> score_utterance(const prompt::UtteranceRatings& ratings,
                                                            const std::set<int>& reverse);

struct BlriScores {
  std::string scenario_id;
  std::string target_model_id;
  std::array<double, prompt::kBlriItems> item_scores{};
  std::vector<double> dimension_means;  // one per blri_dimensions()
  int repeats = 0;                      // passes that survived
  std::vector<std::string> passes;      // raw labels per pass, e.g. "ABBCDDEFAACB"

  double overall() const;  // mean of the item scores
};

struct UtteranceScores {
  std::string scenario_id;
  std::string target_model_id;
  std::array<double, prompt::kUtteranceItems> item_scores{};
  std::vector<double> dimension_means;  // one per utterance_dimensions()
  int repeats = 0;
  std::vector<std::vector<int>> passes;  // raw ratings per pass

  double overall() const;
};

/// Averages per-pass item scores and fills the dimension means.
BlriScores aggregate_blri(const std::vector<prompt::BlriLabels>& passes, const std::set<int>& reverse);
UtteranceScores aggregate_utterance(const std::vector<prompt::UtteranceRatings>& passes,
                                    const std::set<int>& reverse);

enum class AnnotationContext {
  LastExchange,  // the agent message before the response, then the response
  FullHistory,   // every exchange up to and including the response
};

struct JudgeOptions {
  std::string judge_model_id = "judge";
  int repeats = 3;
  int format_retries = 1;
  double temperature = 0.0;
  ReverseItems reverse;
  AnnotationContext annotation_context = AnnotationContext::LastExchange;
  const prompt::TemplateStore* templates = nullptr;
};

/// Per-turn Activity and Analyze sections, the judge's view of the user's thoughts.
std::string internal_thoughts_text(const DialogueRecord& record);

/// "User: ..." / "Partner: ..." transcript starting with the opening message.
std::string transcript_text(const DialogueRecord& record);

/// Failed passes (parse errors after retry) are dropped; JudgeFailed when none survive.
BlriScores judge_blri(const DialogueRecord& record, gateway::ChatBackend& judge, const JudgeOptions& options);
UtteranceScores judge_utterance(const DialogueRecord& record, gateway::ChatBackend& judge,
                                const JudgeOptions& options);

/// The text handed to the annotator for turn position `pos`.
std::string annotation_input(const DialogueRecord& record, std::size_t pos, AnnotationContext context);

/// Union of paragraph sequences, first appearance order.
StrategySequence union_sequences(const std::vector<StrategySequence>& paragraphs);

/// One entry per turn. Turns whose output still fails to parse after the
/// retry get an empty, flagged sequence.
StrategyAnnotation annotate_strategies(const DialogueRecord& record, gateway::ChatBackend& judge,
                                       const JudgeOptions& options);

// ---------------------------------------------------------------------------
// Profiling and coordinates
// ---------------------------------------------------------------------------

struct CaseSelection {
  std::vector<const DialogueRecord*> cases;
  bool insufficient = false;  // fewer than requested in some bucket
  std::vector<std::string> notes;
};

/// Up to `per_bucket` Success and `per_bucket` Failure records for each
/// intention category, sampled reproducibly from `seed`.
CaseSelection select_profile_cases(const std::vector<DialogueRecord>& records, const std::string& model_id,
                                   std::uint64_t seed, int per_bucket = 5);

struct CaseAnalysis {
  std::string scenario_id;
  Outcome outcome = Outcome::MaxTurns;
  std::string analysis;
};

struct ModelProfile {
  std::string model_id;
  std::string summary;
  std::vector<CaseAnalysis> cases;
  bool insufficient = false;
};

ModelProfile profile_model(const std::string& model_id, const CaseSelection& selection,
                           gateway::ChatBackend& judge, const JudgeOptions& options);

/// Code → share of annotated strategy instances (values sum to 1).
using StrategyDistribution = std::map<StrategyCode, double>;

std::string distribution_text(const std::map<std::string, StrategyDistribution>& distributions);

struct Coordinates {
  std::map<std::string, prompt::Point> points;
  std::map<std::string, int> passes_used;
};

/// Averages per-model coordinates over `options.repeats` passes. A pass that
/// omits a model is ignored for that model; JudgeFailed when a model has none.
Coordinates place_coordinates(const std::map<std::string, std::string>& profiles,
                              const std::map<std::string, StrategyDistribution>& distributions,
                              gateway::ChatBackend& judge, const JudgeOptions& options);

void to_json(nlohmann::json& j, const BlriScores& v);
void from_json(const nlohmann::json& j, BlriScores& v);
void to_json(nlohmann::json& j, const UtteranceScores& v);
void from_json(const nlohmann::json& j, UtteranceScores& v);
void to_json(nlohmann::json& j, const ModelProfile& v);
void from_json(const nlohmann::json& j, ModelProfile& v);

}  // namespace sage::judges
