/// @file domain.hpp
/// @brief Core data model: agent factors, the emotion band machine, turns and
/// dialogue records. All types are plain values.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sage {

inline constexpr int kMinEmotion = 0;
inline constexpr int kMaxEmotion = 110;
inline constexpr int kMaxDelta = 10;
inline constexpr int kSuccessThreshold = 100;
inline constexpr int kFailureThreshold = 10;
inline constexpr int kDefaultInitialEmotion = 50;
inline constexpr int kDefaultMaxTurns = 30;

// ---------------------------------------------------------------------------
// Emotion score and bands
// ---------------------------------------------------------------------------

/// Five emotion bands. S and F end the dialogue.
enum class EmotionState { S, A, B, C, F };

/// S >= 100 > A >= 70 > B >= 40 > C >= 10 > F.
EmotionState emotion_state(int score) noexcept;
bool is_terminal(EmotionState state) noexcept;
std::string_view to_string(EmotionState state) noexcept;

int clamp_delta(int change) noexcept;

/// Clamps `change` to [-10, 10], adds it, then clamps the sum to [0, 110].
int apply_delta(int previous, int change) noexcept;

enum class Outcome { Success, Failure, MaxTurns };

/// Success iff >= 100, Failure iff < 10, MaxTurns otherwise.
Outcome classify_outcome(int final_emotion) noexcept;
std::string_view to_string(Outcome outcome) noexcept;
Outcome outcome_from_string(std::string_view text);

/// Why a dialogue closed. Outcome depends on the score only; this records the trigger.
enum class Termination { EmotionThreshold, Farewell, TurnLimit };
std::string_view to_string(Termination termination) noexcept;
Termination termination_from_string(std::string_view text);

enum class IntentionCategory { Emotional, Rational };
std::string_view to_string(IntentionCategory category) noexcept;
IntentionCategory category_from_string(std::string_view text);

// ---------------------------------------------------------------------------
// Agent factors
// ---------------------------------------------------------------------------

struct Persona {
  std::string name;
  int age = 0;
  std::string gender;
  std::string occupation;
  std::vector<std::string> habits_and_behaviors;
  std::vector<std::string> hobbies;  // exactly three
  std::string speaking_style;
  std::string characteristics;  // the three seed keywords

  bool operator==(const Persona&) const = default;
};

struct Background {
  std::string confide_topics;  // optional
  std::string cause;
  std::string course;
  std::string conflicts;
  std::string difficulties;
  std::string current_state;

  bool operator==(const Background&) const = default;
};

struct Scene {
  std::string topic;  // hidden-intention topic id, e.g. "deep_empathy"
  std::string theme;  // background event theme drawn from the pool
  std::string hidden_intention;
  IntentionCategory category = IntentionCategory::Emotional;
  Background background;
  std::string reaction_rules;

  bool operator==(const Scene&) const = default;
};

struct Scenario {
  std::string id;
  Persona persona;
  Scene scene;

  bool operator==(const Scenario&) const = default;
};

/// Everything needed to instantiate a sentient agent except the judge backend,
/// which is supplied to the session separately.
struct AgentSpec {
  Persona persona;
  Scene scene;
  std::string judge_model_id;
  int initial_emotion = kDefaultInitialEmotion;

  bool operator==(const AgentSpec&) const = default;
};

/// Throws ValidationError describing the first violated invariant.
void validate(const Persona& persona);
void validate(const Scene& scene);
void validate(const Scenario& scenario);
void validate(const AgentSpec& spec);

// ---------------------------------------------------------------------------
// Turns and records
// ---------------------------------------------------------------------------

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  std::int64_t total() const noexcept { return prompt_tokens + completion_tokens; }
  TokenUsage& operator+=(const TokenUsage& other) noexcept {
    prompt_tokens += other.prompt_tokens;
    completion_tokens += other.completion_tokens;
    return *this;
  }
  bool operator==(const TokenUsage&) const = default;
};

struct EmotionEstimate {
  std::string content;
  std::string target_completion;
  std::string activity;
  std::string analyze;
  int change = 0;

  bool operator==(const EmotionEstimate&) const = default;
};

struct Turn {
  int index = 0;  // 1-based
  std::string target_utterance;
  EmotionEstimate estimate;
  int emotion_after = 0;
  std::string reply_thinking;
  std::string agent_reply;
  TokenUsage target_token_usage;

  bool operator==(const Turn&) const = default;
};

struct DialogueRecord {
  std::string scenario_id;
  std::string target_model_id;
  std::string judge_model_id;
  std::string topic;
  IntentionCategory intention_category = IntentionCategory::Emotional;
  int initial_emotion = kDefaultInitialEmotion;
  std::string opening_message;
  std::vector<Turn> turns;
  int final_emotion = kDefaultInitialEmotion;
  Outcome outcome = Outcome::MaxTurns;
  Termination termination = Termination::TurnLimit;
  std::int64_t total_target_tokens = 0;

  bool operator==(const DialogueRecord&) const = default;
};

/// Diagnostic for a dialogue that could not complete. Excluded from scoring.
struct AbortedDialogue {
  std::string scenario_id;
  std::string target_model_id;
  std::string judge_model_id;
  std::string reason;
  int turns_completed = 0;

  bool operator==(const AbortedDialogue&) const = default;
};

/// Replays the trajectory and returns every invariant violation found
/// (empty when the record is consistent).
std::vector<std::string> check_record(const DialogueRecord& record);

/// Emotion before turn `turn_position` (0-based position in record.turns).
int emotion_before(const DialogueRecord& record, std::size_t turn_position);

}  // namespace sage
