/// @file serialization.cpp

#include "sage/serialization.hpp"

#include <fstream>

namespace sage {

using nlohmann::json;

void to_json(json& j, const Persona& v) {
  j = json{{"name", v.name},
           {"age", v.age},
           {"gender", v.gender},
           {"occupation", v.occupation},
           {"habits_and_behaviors", v.habits_and_behaviors},
           {"hobbies", v.hobbies},
           {"speaking_style", v.speaking_style},
           {"characteristics", v.characteristics}};
}

void from_json(const json& j, Persona& v) {
  j.at("name").get_to(v.name);
  j.at("age").get_to(v.age);
  j.at("gender").get_to(v.gender);
  j.at("occupation").get_to(v.occupation);
  j.at("habits_and_behaviors").get_to(v.habits_and_behaviors);
  j.at("hobbies").get_to(v.hobbies);
  j.at("speaking_style").get_to(v.speaking_style);
  j.at("characteristics").get_to(v.characteristics);
}

void to_json(json& j, const Background& v) {
  j = json{{"confide_topics", v.confide_topics}, {"cause", v.cause},
           {"course", v.course},                 {"conflicts", v.conflicts},
           {"difficulties", v.difficulties},     {"current_state", v.current_state}};
}

void from_json(const json& j, Background& v) {
  v.confide_topics = j.value("confide_topics", std::string{});
  j.at("cause").get_to(v.cause);
  j.at("course").get_to(v.course);
  j.at("conflicts").get_to(v.conflicts);
  j.at("difficulties").get_to(v.difficulties);
  j.at("current_state").get_to(v.current_state);
}

void to_json(json& j, const Scene& v) {
  j = json{{"topic", v.topic},
           {"theme", v.theme},
           {"hidden_intention", v.hidden_intention},
           {"category", std::string(to_string(v.category))},
           {"background", v.background},
           {"reaction_rules", v.reaction_rules}};
}

void from_json(const json& j, Scene& v) {
  j.at("topic").get_to(v.topic);
  v.theme = j.value("theme", std::string{});
  j.at("hidden_intention").get_to(v.hidden_intention);
  v.category = category_from_string(j.value("category", std::string("emotional")));
  j.at("background").get_to(v.background);
  j.at("reaction_rules").get_to(v.reaction_rules);
}

void to_json(json& j, const Scenario& v) {
  j = json{{"id", v.id}, {"persona", v.persona}, {"scene", v.scene}};
}

void from_json(const json& j, Scenario& v) {
  j.at("id").get_to(v.id);
  j.at("persona").get_to(v.persona);
  j.at("scene").get_to(v.scene);
}

void to_json(json& j, const TokenUsage& v) {
  j = json{{"prompt_tokens", v.prompt_tokens}, {"completion_tokens", v.completion_tokens}};
}

void from_json(const json& j, TokenUsage& v) {
  j.at("prompt_tokens").get_to(v.prompt_tokens);
  j.at("completion_tokens").get_to(v.completion_tokens);
}

void to_json(json& j, const EmotionEstimate& v) {
  j = json{{"content", v.content},
           {"target_completion", v.target_completion},
           {"activity", v.activity},
           {"analyze", v.analyze},
           {"change", v.change}};
}

void from_json(const json& j, EmotionEstimate& v) {
  j.at("content").get_to(v.content);
  j.at("target_completion").get_to(v.target_completion);
  j.at("activity").get_to(v.activity);
  j.at("analyze").get_to(v.analyze);
  j.at("change").get_to(v.change);
}

void to_json(json& j, const Turn& v) {
  j = json{{"index", v.index},
           {"target_utterance", v.target_utterance},
           {"estimate", v.estimate},
           {"emotion_after", v.emotion_after},
           {"reply_thinking", v.reply_thinking},
           {"agent_reply", v.agent_reply},
           {"target_token_usage", v.target_token_usage}};
}

void from_json(const json& j, Turn& v) {
  j.at("index").get_to(v.index);
  j.at("target_utterance").get_to(v.target_utterance);
  j.at("estimate").get_to(v.estimate);
  j.at("emotion_after").get_to(v.emotion_after);
  j.at("reply_thinking").get_to(v.reply_thinking);
  j.at("agent_reply").get_to(v.agent_reply);
  j.at("target_token_usage").get_to(v.target_token_usage);
}

void to_json(json& j, const DialogueRecord& v) {
  j = json{{"scenario_id", v.scenario_id},
           {"target_model_id", v.target_model_id},
           {"judge_model_id", v.judge_model_id},
           {"topic", v.topic},
           {"intention_category", std::string(to_string(v.intention_category))},
           {"initial_emotion", v.initial_emotion},
           {"opening_message", v.opening_message},
           {"turns", v.turns},
           {"final_emotion", v.final_emotion},
           {"outcome", std::string(to_string(v.outcome))},
           {"termination", std::string(to_string(v.termination))},
           {"total_target_tokens", v.total_target_tokens}};
}

void from_json(const json& j, DialogueRecord& v) {
  j.at("scenario_id").get_to(v.scenario_id);
  j.at("target_model_id").get_to(v.target_model_id);
  j.at("judge_model_id").get_to(v.judge_model_id);
  v.topic = j.value("topic", std::string{});
  v.intention_category =
      category_from_string(j.value("intention_category", std::string("emotional")));
  v.initial_emotion = j.value("initial_emotion", kDefaultInitialEmotion);
  j.at("opening_message").get_to(v.opening_message);
  j.at("turns").get_to(v.turns);
  j.at("final_emotion").get_to(v.final_emotion);
  v.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  v.termination = termination_from_string(j.value("termination", std::string("TurnLimit")));
  j.at("total_target_tokens").get_to(v.total_target_tokens);
}

void to_json(json& j, const AbortedDialogue& v) {
  j = json{{"scenario_id", v.scenario_id},
           {"target_model_id", v.target_model_id},
           {"judge_model_id", v.judge_model_id},
           {"reason", v.reason},
           {"turns_completed", v.turns_completed}};
}

void from_json(const json& j, AbortedDialogue& v) {
  j.at("scenario_id").get_to(v.scenario_id);
  j.at("target_model_id").get_to(v.target_model_id);
  j.at("judge_model_id").get_to(v.judge_model_id);
  j.at("reason").get_to(v.reason);
  j.at("turns_completed").get_to(v.turns_completed);
}

void write_json_atomic(const std::filesystem::path& path, const json& value) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << value.dump(2) << '\n';
    out.flush();
    if (!out) throw ConfigError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace sage
