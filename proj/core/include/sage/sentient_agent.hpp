/// @file sentient_agent.hpp
/// @brief The simulated user: per-turn emotion estimation, in-character reply
/// generation and termination.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sage/domain.hpp"
#include "sage/llm_gateway.hpp"
#include "sage/prompt_kit.hpp"

namespace sage::agent {

struct AgentConfig {
  int max_turns = kDefaultMaxTurns;
  std::vector<std::string> farewell_tokens{"goodbye", "good-bye", "bye-bye"};
  int format_retries = 1;
  double temperature = 0.0;
  const prompt::TemplateStore* templates = nullptr;  // null = builtin
};

/// Case-insensitive search for any farewell token.
bool contains_farewell(std::string_view text, const std::vector<std::string>& tokens);

/// Speaker labels used in rendered dialogue histories.
inline constexpr std::string_view kAgentSpeaker = "Player";
inline constexpr std::string_view kTargetSpeaker = "NPC";

/// Feelings block used when the agent opens the conversation.
std::string opening_planning();

/// The four estimate sections as the planning block of the reply prompt.
std::string planning_block(const EmotionEstimate& estimate);

/// "Emotion-B (emotion-value: 58)".
std::string emotion_state_text(int emotion);

class AgentSession {
 public:
  AgentSession(AgentSpec spec, std::shared_ptr<gateway::ChatBackend> judge, AgentConfig config = {});

  /// Generates the opening confide. Must be called once, before step().
  const std::string& open();

  /// f_emo for a pending target utterance. Does not change the session.
  std::pair<EmotionEstimate, int> estimate(const std::string& target_utterance) const;

  /// f_reply for a pending target utterance and its estimate. Does not change the session.
  prompt::AgentReply reply(const std::string& target_utterance, const EmotionEstimate& estimate,
                           int new_emotion) const;

  /// Estimate, reply, commit. `target_usage` is recorded on the turn.
  const Turn& step(const std::string& target_utterance, TokenUsage target_usage = {});

  bool opened() const noexcept { return opened_; }
  bool terminated() const noexcept { return termination_.has_value(); }
  std::optional<Termination> termination() const noexcept { return termination_; }
  int emotion() const noexcept { return emotion_; }
  int turn_count() const noexcept { return static_cast<int>(turns_.size()); }
  const std::string& opening() const noexcept { return opening_; }
  const std::vector<Turn>& turns() const noexcept { return turns_; }
  const AgentSpec& spec() const noexcept { return spec_; }
  const AgentConfig& config() const noexcept { return config_; }
  /// Tokens spent on judge calls (not part of the target's usage).
  TokenUsage judge_usage() const noexcept { return judge_usage_; }

  /// "Player: ..." / "NPC: ..." lines, optionally ending with a pending target utterance.
  std::string history_text(const std::string* pending_target = nullptr) const;

  /// Conversation as seen by the target model: agent lines as user
  /// messages, the target's own lines as assistant messages.
  std::vector<gateway::Message> target_messages() const;

  DialogueRecord to_record(const std::string& scenario_id, const std::string& target_model_id) const;

 private:
  const prompt::TemplateStore& templates() const;
  gateway::ChatRequest judge_request(std::string prompt_text) const;

  AgentSpec spec_;
  std::shared_ptr<gateway::ChatBackend> judge_;
  AgentConfig config_;
  bool opened_ = false;
  std::string opening_;
  int emotion_;
  std::vector<Turn> turns_;
  std::optional<Termination> termination_;
  mutable TokenUsage judge_usage_;
};

}  // namespace sage::agent
