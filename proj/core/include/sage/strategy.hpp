/// @file strategy.hpp
/// @brief The 24-code supportive-dialogue strategy taxonomy (groups A to G)
/// and per-turn strategy annotations.

#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace sage {

struct StrategyCode {
  char group = 'A';  // 'A'..'G'
  int number = 1;

  std::string str() const { return std::string(1, group) + "-" + std::to_string(number); }
  auto operator<=>(const StrategyCode&) const = default;
};

struct StrategyInfo {
  StrategyCode code;
  std::string_view group_name;
  std::string_view name;
};

/// All 24 codes in table order.
std::span<const StrategyInfo> strategy_taxonomy();
const StrategyInfo* find_strategy(StrategyCode code);
bool is_known(StrategyCode code);

/// Parses "B-2" (whitespace around the dash tolerated). Does not check membership.
std::optional<StrategyCode> parse_strategy_code(std::string_view text);

/// Codes used by one response, in order of first appearance.
using StrategySequence = std::vector<StrategyCode>;

struct TurnStrategies {
  int turn_index = 0;
  StrategySequence codes;
  bool flagged = false;  // annotator produced no usable tags

  bool operator==(const TurnStrategies&) const = default;
};

/// Strategy annotation of one dialogue record.
struct StrategyAnnotation {
  std::string scenario_id;
  std::string target_model_id;
  std::vector<TurnStrategies> turns;

  bool operator==(const StrategyAnnotation&) const = default;
};

void to_json(nlohmann::json& j, const StrategyCode& v);
void from_json(const nlohmann::json& j, StrategyCode& v);
void to_json(nlohmann::json& j, const TurnStrategies& v);
void from_json(const nlohmann::json& j, TurnStrategies& v);
void to_json(nlohmann::json& j, const StrategyAnnotation& v);
void from_json(const nlohmann::json& j, StrategyAnnotation& v);

}  // namespace sage
