/// @file domain.cpp

#include "sage/domain.hpp"

#include <algorithm>

#include "sage/error.hpp"

namespace sage {

EmotionState emotion_state(int score) noexcept {
  if (score >= 100) return EmotionState::S;
  if (score >= 70) return EmotionState::A;
  if (score >= 40) return EmotionState::B;
  if (score >= 10) return EmotionState::C;
  return EmotionState::F;
}

bool is_terminal(EmotionState state) noexcept {
  return state == EmotionState::S || state == EmotionState::F;
}

std::string_view to_string(EmotionState state) noexcept {
  switch (state) {
    case EmotionState::S: return "Emotion-S";
    case EmotionState::A: return "Emotion-A";
    case EmotionState::B: return "Emotion-B";
    case EmotionState::C: return "Emotion-C";
    case EmotionState::F: return "Emotion-F";
  }
  return "Emotion-?";
}

int clamp_delta(int change) noexcept { return std::clamp(change, -kMaxDelta, kMaxDelta); }

int apply_delta(int previous, int change) noexcept {
  return std::clamp(previous + clamp_delta(change), kMinEmotion, kMaxEmotion);
}

Outcome classify_outcome(int final_emotion) noexcept {
  if (final_emotion >= kSuccessThreshold) return Outcome::Success;
  if (final_emotion < kFailureThreshold) return Outcome::Failure;
  return Outcome::MaxTurns;
}

std::string_view to_string(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::Success: return "Success";
    case Outcome::Failure: return "Failure";
    case Outcome::MaxTurns: return "MaxTurns";
  }
  return "MaxTurns";
}

Outcome outcome_from_string(std::string_view text) {
  if (text == "Success") return Outcome::Success;
  if (text == "Failure") return Outcome::Failure;
  if (text == "MaxTurns") return Outcome::MaxTurns;
  throw ValidationError("unknown outcome '" + std::string(text) + "'");
}

std::string_view to_string(Termination termination) noexcept {
  switch (termination) {
    case Termination::EmotionThreshold: return "EmotionThreshold";
    case Termination::Farewell: return "Farewell";
    case Termination::TurnLimit: return "TurnLimit";
  }
  return "TurnLimit";
}

Termination termination_from_string(std::string_view text) {
  if (text == "EmotionThreshold") return Termination::EmotionThreshold;
  if (text == "Farewell") return Termination::Farewell;
  if (text == "TurnLimit") return Termination::TurnLimit;
  throw ValidationError("unknown termination '" + std::string(text) + "'");
}

std::string_view to_string(IntentionCategory category) noexcept {
  return category == IntentionCategory::Emotional ? "emotional" : "rational";
}

IntentionCategory category_from_string(std::string_view text) {
  if (text == "emotional") return IntentionCategory::Emotional;
  if (text == "rational") return IntentionCategory::Rational;
  throw ValidationError("unknown intention category '" + std::string(text) + "'");
}

namespace {

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

void validate(const Persona& p) {
  require(!blank(p.name), "persona name is empty");
  require(p.age >= 10 && p.age <= 100, "persona age " + std::to_string(p.age) + " outside [10, 100]");
  require(!blank(p.gender), "persona gender is empty");
  require(!blank(p.occupation), "persona occupation is empty");
  require(!p.habits_and_behaviors.empty(), "persona has no habits");
  for (const auto& h : p.habits_and_behaviors) require(!blank(h), "persona habit is empty");
  require(p.hobbies.size() == 3,
          "persona must have exactly 3 hobbies, has " + std::to_string(p.hobbies.size()));
  for (const auto& h : p.hobbies) require(!blank(h), "persona hobby is empty");
  require(!blank(p.speaking_style), "persona speaking style is empty");
  require(!blank(p.characteristics), "persona characteristics are empty");
}

void validate(const Scene& s) {
  require(!blank(s.topic), "scene topic is empty");
  require(!blank(s.hidden_intention), "scene hidden intention is empty");
  require(!blank(s.background.cause), "scene cause is empty");
  require(!blank(s.background.course), "scene course is empty");
  require(!blank(s.background.conflicts), "scene conflicts are empty");
  require(!blank(s.background.difficulties), "scene difficulties are empty");
  require(!blank(s.background.current_state), "scene current state is empty");
  require(!blank(s.reaction_rules), "scene reaction rules are empty");
}

void validate(const Scenario& s) {
  require(!blank(s.id), "scenario id is empty");
  validate(s.persona);
  validate(s.scene);
}

void validate(const AgentSpec& spec) {
  validate(spec.persona);
  validate(spec.scene);
  require(spec.initial_emotion >= 0 && spec.initial_emotion <= 100,
          "initial emotion " + std::to_string(spec.initial_emotion) + " outside [0, 100]");
}

int emotion_before(const DialogueRecord& record, std::size_t turn_position) {
  return turn_position == 0 ? record.initial_emotion : record.turns[turn_position - 1].emotion_after;
}

std::vector<std::string> check_record(const DialogueRecord& record) {
  std::vector<std::string> problems;
  int emotion = record.initial_emotion;
  int previous_index = 0;
  std::int64_t tokens = 0;
  for (const auto& turn : record.turns) {
    if (turn.index <= previous_index) {
      problems.push_back("turn index " + std::to_string(turn.index) + " not increasing");
    }
    previous_index = turn.index;
    if (turn.estimate.change < -kMaxDelta || turn.estimate.change > kMaxDelta) {
      problems.push_back("turn " + std::to_string(turn.index) + " change outside [-10, 10]");
    }
    const int expected = apply_delta(emotion, turn.estimate.change);
    if (turn.emotion_after != expected) {
      problems.push_back("turn " + std::to_string(turn.index) + " emotion_after " +
                         std::to_string(turn.emotion_after) + " != replay " +
                         std::to_string(expected));
    }
    if (turn.emotion_after < kMinEmotion || turn.emotion_after > kMaxEmotion) {
      problems.push_back("turn " + std::to_string(turn.index) + " emotion outside [0, 110]");
    }
    emotion = turn.emotion_after;
    tokens += turn.target_token_usage.total();
  }
  if (record.final_emotion != emotion) {
    problems.push_back("final_emotion " + std::to_string(record.final_emotion) +
                       " != last emotion " + std::to_string(emotion));
  }
  if (record.outcome != classify_outcome(record.final_emotion)) {
    problems.push_back("outcome inconsistent with final_emotion");
  }
  if (record.total_target_tokens != tokens) {
    problems.push_back("total_target_tokens != sum of turn usage");
  }
  return problems;
}

}  // namespace sage
