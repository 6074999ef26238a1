/// @file sentient_agent.cpp

#include "sage/sentient_agent.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "sage/error.hpp"

namespace sage::agent {

bool contains_farewell(std::string_view text, const std::vector<std::string>& tokens) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& token : tokens) {
    std::string t(token);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (!t.empty() && lower.find(t) != std::string::npos) return true;
  }
  return false;
}

std::string opening_planning() {
  return "The conversation has not started yet and the NPC has not said anything. "
         "You have no feelings about the NPC so far. Open the heart-to-heart talk by "
         "bringing up what is on your mind, based on the topics you want to confide.";
}

std::string planning_block(const EmotionEstimate& e) {
  return fmt::format("Content:\n{}\nTargetCompletion:\n{}\nActivity:\n{}\nAnalyze:\n{}", e.content,
                     e.target_completion, e.activity, e.analyze);
}

std::string emotion_state_text(int emotion) {
  return fmt::format("{} (emotion-value: {})", to_string(emotion_state(emotion)), emotion);
}

AgentSession::AgentSession(AgentSpec spec, std::shared_ptr<gateway::ChatBackend> judge,
                           AgentConfig config)
    : spec_(std::move(spec)), judge_(std::move(judge)), config_(std::move(config)),
      emotion_(spec_.initial_emotion) {
  validate(spec_);
  if (!judge_) throw ConfigError("agent session needs a judge backend");
  if (config_.max_turns < 1) throw ConfigError("max_turns must be >= 1");
  if (config_.format_retries < 0) throw ConfigError("format_retries must be >= 0");
}

const prompt::TemplateStore& AgentSession::templates() const {
  return config_.templates ? *config_.templates : prompt::TemplateStore::builtin();
}

gateway::ChatRequest AgentSession::judge_request(std::string prompt_text) const {
  return {spec_.judge_model_id, "", {{gateway::Role::User, std::move(prompt_text)}},
          config_.temperature, 4096};
}

std::string AgentSession::history_text(const std::string* pending_target) const {
  std::string out;
  if (opened_) out += fmt::format("{}: {}\n", kAgentSpeaker, opening_);
  for (const auto& t : turns_) {
    out += fmt::format("{}: {}\n", kTargetSpeaker, t.target_utterance);
    out += fmt::format("{}: {}\n", kAgentSpeaker, t.agent_reply);
  }
  if (pending_target) out += fmt::format("{}: {}\n", kTargetSpeaker, *pending_target);
  return out;
}

std::vector<gateway::Message> AgentSession::target_messages() const {
  std::vector<gateway::Message> out;
  if (!opened_) return out;
  out.push_back({gateway::Role::User, opening_});
  for (const auto& t : turns_) {
    out.push_back({gateway::Role::Assistant, t.target_utterance});
    out.push_back({gateway::Role::User, t.agent_reply});
  }
  return out;
}

const std::string& AgentSession::open() {
  if (opened_) throw Error("agent session already opened");
  const auto& store = templates();
  const auto text = store.render(
      prompt::TemplateId::ReplyGeneration,
      {{"purpose", store.render(prompt::TemplateId::DialoguePurpose, {})},
       {"emotion-state-definition", store.render(prompt::TemplateId::EmotionStateDefinition, {})},
       {"persona", prompt::persona_slot(spec_.persona)},
       {"background", prompt::background_slot(spec_.scene)},
       {"dialog-history", ""},
       {"planning", opening_planning()},
       {"emotion-state", emotion_state_text(emotion_)}});
  const auto reply = prompt::complete_parsed(*judge_, judge_request(text), prompt::parse_agent_reply,
                                             config_.format_retries, &judge_usage_);
  opening_ = reply.response;
  opened_ = true;
  return opening_;
}

std::pair<EmotionEstimate, int> AgentSession::estimate(const std::string& target_utterance) const {
  if (!opened_) throw Error("agent session not opened");
  if (terminated()) throw Error("agent session already terminated");
  const auto& store = templates();
  const auto text = store.render(prompt::TemplateId::EmotionEstimation,
                                 {{"purpose", store.render(prompt::TemplateId::DialoguePurpose, {})},
                                  {"persona", prompt::persona_slot(spec_.persona)},
                                  {"background", prompt::background_slot(spec_.scene)},
                                  {"emotion", std::to_string(emotion_)},
                                  {"dialog-history", history_text(&target_utterance)}});
  auto parse = [](const std::string& raw) { return prompt::parse_emotion_estimate(raw); };
  auto estimate = prompt::complete_parsed(*judge_, judge_request(text), parse,
                                          config_.format_retries, &judge_usage_);
  return {estimate, apply_delta(emotion_, estimate.change)};
}

prompt::AgentReply AgentSession::reply(const std::string& target_utterance,
                                       const EmotionEstimate& estimate, int new_emotion) const {
  if (!opened_) throw Error("agent session not opened");
  if (terminated()) throw Error("agent session already terminated");
  const auto& store = templates();
  const auto text = store.render(
      prompt::TemplateId::ReplyGeneration,
      {{"purpose", store.render(prompt::TemplateId::DialoguePurpose, {})},
       {"emotion-state-definition", store.render(prompt::TemplateId::EmotionStateDefinition, {})},
       {"persona", prompt::persona_slot(spec_.persona)},
       {"background", prompt::background_slot(spec_.scene)},
       {"dialog-history", history_text(&target_utterance)},
       {"planning", planning_block(estimate)},
       {"emotion-state", emotion_state_text(new_emotion)}});
  return prompt::complete_parsed(*judge_, judge_request(text), prompt::parse_agent_reply,
                                 config_.format_retries, &judge_usage_);
}

const Turn& AgentSession::step(const std::string& target_utterance, TokenUsage target_usage) {
  auto [estimate, new_emotion] = this->estimate(target_utterance);
  auto agent_reply = reply(target_utterance, estimate, new_emotion);

  Turn turn;
  turn.index = turn_count() + 1;
  turn.target_utterance = target_utterance;
  turn.estimate = std::move(estimate);
  turn.emotion_after = new_emotion;
  turn.reply_thinking = std::move(agent_reply.thinking);
  turn.agent_reply = std::move(agent_reply.response);
  turn.target_token_usage = target_usage;
  emotion_ = new_emotion;
  turns_.push_back(std::move(turn));

  if (is_terminal(emotion_state(emotion_))) {
    termination_ = Termination::EmotionThreshold;
  } else if (contains_farewell(turns_.back().agent_reply, config_.farewell_tokens)) {
    termination_ = Termination::Farewell;
  } else if (turn_count() >= config_.max_turns) {
    termination_ = Termination::TurnLimit;
  }
  return turns_.back();
}

DialogueRecord AgentSession::to_record(const std::string& scenario_id,
                                       const std::string& target_model_id) const {
  DialogueRecord r;
  r.scenario_id = scenario_id;
  r.target_model_id = target_model_id;
  r.judge_model_id = spec_.judge_model_id;
  r.topic = spec_.scene.topic;
  r.intention_category = spec_.scene.category;
  r.initial_emotion = spec_.initial_emotion;
  r.opening_message = opening_;
  r.turns = turns_;
  r.final_emotion = emotion_;
  r.outcome = classify_outcome(emotion_);
  r.termination = termination_.value_or(Termination::TurnLimit);
  r.total_target_tokens = 0;
  for (const auto& t : turns_) r.total_target_tokens += t.target_token_usage.total();
  return r;
}

}  // namespace sage::agent
