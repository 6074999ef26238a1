/// @file strategy.cpp

#include "sage/strategy.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "sage/error.hpp"

namespace sage {

namespace {

constexpr std::string_view kQuestion = "Question";
constexpr std::string_view kEmpathy = "Emotional Empathy";
constexpr std::string_view kDisclosure = "Self-Disclosure";
constexpr std::string_view kComfort = "Emotional Comfort";
constexpr std::string_view kAffirmation = "Affirmation and Reassurance";
constexpr std::string_view kSuggestions = "Providing Suggestions";
constexpr std::string_view kInformation = "Information";

constexpr std::array<StrategyInfo, 24> kTaxonomy{{
    {{'A', 1}, kQuestion, "Information-seeking questions"},
    {{'A', 2}, kQuestion, "Asking about the client's mental state"},
    {{'A', 3}, kQuestion, "Asking the client whether a solution has been attempted"},
    {{'A', 4}, kQuestion, "Reflective questions about the client's views"},
    {{'A', 5}, kQuestion, "Rhetorical questions"},
    {{'B', 1}, kEmpathy, "Surface-level empathy"},
    {{'B', 2}, kEmpathy, "Providing empathy via restating the client's problem"},
    {{'B', 3}, kEmpathy, "Deeper empathy to understand the client's hidden intention"},
    {{'C', 1}, kDisclosure, "Self-disclosure that provides agreement with the client's view"},
    {{'C', 2}, kDisclosure, "Self-disclosure that introduces the supporter's own story"},
    {{'D', 1}, kComfort, "Providing comforting words to the client"},
    {{'D', 2}, kComfort, "Expressing willingness to hear the client's thoughts"},
    {{'D', 3}, kComfort, "Helping the client to vent negative feelings"},
    {{'E', 1}, kAffirmation, "Praising the client's qualities"},
    {{'E', 2}, kAffirmation, "Praising the client's positive thoughts"},
    {{'E', 3}, kAffirmation, "Praising the client's actions"},
    {{'E', 4}, kAffirmation, "Providing accompaniment and support"},
    {{'F', 1}, kSuggestions, "Analysis of the client's issue"},
    {{'F', 2}, kSuggestions, "Suggestions for emotional relief"},
    {{'F', 3}, kSuggestions, "Suggestions for seeking psychological counseling"},
    {{'F', 4}, kSuggestions, "General advice for solving client's issue"},
    {{'F', 5}, kSuggestions, "Advice specific to the client's situation"},
    {{'G', 1}, kInformation, "Information related to emotional support"},
    {{'G', 2}, kInformation, "Information related to problem-solving suggestions"},
}};

}  // namespace

std::span<const StrategyInfo> strategy_taxonomy() { return kTaxonomy; }

const StrategyInfo* find_strategy(StrategyCode code) {
  auto it = std::find_if(kTaxonomy.begin(), kTaxonomy.end(),
                         [&](const StrategyInfo& info) { return info.code == code; });
  return it == kTaxonomy.end() ? nullptr : &*it;
}

bool is_known(StrategyCode code) { return find_strategy(code) != nullptr; }

std::optional<StrategyCode> parse_strategy_code(std::string_view text) {
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip_ws();
  if (i >= text.size() || !std::isalpha(static_cast<unsigned char>(text[i]))) return std::nullopt;
  const char group = static_cast<char>(std::toupper(static_cast<unsigned char>(text[i++])));
  skip_ws();
  if (i >= text.size() || text[i] != '-') return std::nullopt;
  ++i;
  skip_ws();
  int number = 0;
  std::size_t digits = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])) && digits < 4) {
    number = number * 10 + (text[i++] - '0');
    ++digits;
  }
  if (digits == 0) return std::nullopt;
  skip_ws();
  if (i != text.size()) return std::nullopt;
  return StrategyCode{group, number};
}

void to_json(nlohmann::json& j, const StrategyCode& v) { j = v.str(); }

void from_json(const nlohmann::json& j, StrategyCode& v) {
  auto code = parse_strategy_code(j.get<std::string>());
  if (!code || !is_known(*code)) throw UnknownStrategyCode(j.get<std::string>());
  v = *code;
}

void to_json(nlohmann::json& j, const TurnStrategies& v) {
  j = nlohmann::json{{"turn_index", v.turn_index}, {"codes", v.codes}, {"flagged", v.flagged}};
}

void from_json(const nlohmann::json& j, TurnStrategies& v) {
  j.at("turn_index").get_to(v.turn_index);
  j.at("codes").get_to(v.codes);
  v.flagged = j.value("flagged", false);
}

void to_json(nlohmann::json& j, const StrategyAnnotation& v) {
  j = nlohmann::json{
      {"scenario_id", v.scenario_id}, {"target_model_id", v.target_model_id}, {"turns", v.turns}};
}

void from_json(const nlohmann::json& j, StrategyAnnotation& v) {
  j.at("scenario_id").get_to(v.scenario_id);
  j.at("target_model_id").get_to(v.target_model_id);
  j.at("turns").get_to(v.turns);
}

}  // namespace sage
