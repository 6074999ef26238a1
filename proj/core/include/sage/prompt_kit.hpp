/// @file prompt_kit.hpp
/// @brief Verbatim prompt templates with slot filling, plus tolerant parsers
/// (and canonical formatters) for every structured output the templates ask for.

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "sage/domain.hpp"
#include "sage/error.hpp"
#include "sage/llm_gateway.hpp"
#include "sage/strategy.hpp"

namespace sage::prompt {

enum class TemplateId {
  PersonaGen,
  SceneGen,
  EmotionEstimation,
  ReplyGeneration,
  TargetSystem,
  DialoguePurpose,
  EmotionStateDefinition,
  BlriJudge,
  UtteranceJudge,
  StrategyAnnotator,
  ProfileCaseAnalysis,
  ProfileSummary,
  CoordinatePlacement,
};

std::span<const TemplateId> all_templates();
/// Asset stem, e.g. "emotion_estimation".
std::string_view to_string(TemplateId id) noexcept;
TemplateId template_from_string(std::string_view name);

using Slots = std::map<std::string, std::string>;

/// `{slot}` placeholder names in order of first appearance.
std::vector<std::string> placeholders(std::string_view text);

class TemplateStore {
 public:
  /// Templates compiled into the library.
  static const TemplateStore& builtin();
  /// Loads `<dir>/<id>.txt` for every id. Each file must declare the same
  /// slot set as the builtin template. Throws ConfigError / TemplateError.
  static TemplateStore from_directory(const std::filesystem::path& dir);

  const std::string& text(TemplateId id) const;
  const std::set<std::string>& slots(TemplateId id) const;

  /// Substitutes every slot in one pass (values are not rescanned).
  /// Throws MissingSlot / UnknownSlot unless `slots` matches exactly.
  std::string render(TemplateId id, const Slots& slots) const;

 private:
  struct Entry {
    std::string text;
    std::set<std::string> slots;
  };
  std::map<TemplateId, Entry> entries_;
};

/// Renders with the builtin store.
std::string render(TemplateId id, const Slots& slots);

// ---------------------------------------------------------------------------
// Labeled sections
// ---------------------------------------------------------------------------

struct SectionSpec {
  std::string label;                 // canonical label
  std::vector<std::string> aliases;  // alternative spellings
};

/// Ordered (canonical label, body) pairs in order of first appearance.
class ParsedSections {
 public:
  void set(const std::string& label, std::string body);
  const std::string* find(std::string_view label) const;
  bool has_nonempty(std::string_view label) const;
  const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

/// Splits `raw` at header lines. A header line starts (after markdown
/// decoration such as `*`, `#`, `-`, `>`, `[`) with one of the labels,
/// case-insensitively, followed by a colon. The body runs to the next header
/// and may begin on the header line itself. Later occurrences of a label
/// replace earlier ones; bodies are trimmed and a wrapping `[...]` is removed.
ParsedSections split_sections(std::string_view raw, const std::vector<SectionSpec>& labels);

/// First signed integer in `text` (ASCII or unicode minus), if any.
std::optional<int> first_signed_integer(std::string_view text);

// ---------------------------------------------------------------------------
// Parsers
// ---------------------------------------------------------------------------

/// Collects non-fatal parser notes (clamped values and the like).
using Warnings = std::vector<std::string>;

EmotionEstimate parse_emotion_estimate(std::string_view raw, Warnings* warnings = nullptr);

struct AgentReply {
  std::string thinking;
  std::string response;

  bool operator==(const AgentReply&) const = default;
};
AgentReply parse_agent_reply(std::string_view raw);

inline constexpr std::size_t kBlriItems = 12;
inline constexpr std::size_t kUtteranceItems = 15;

using BlriLabels = std::array<char, kBlriItems>;  // 'A'..'F'
using UtteranceRatings = std::array<int, kUtteranceItems>;  // 1..6

BlriLabels parse_blri(std::string_view raw);
UtteranceRatings parse_utterance_ratings(std::string_view raw);

/// One sequence per `<Strategy>` span in document order.
std::vector<StrategySequence> parse_strategies(std::string_view raw);

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Coordinates for each requested model, clamped to [-1, 1].
/// Throws NoCoordinatesFound for the first model without a coordinate line.
std::map<std::string, Point> parse_coordinates(std::string_view raw,
                                               const std::vector<std::string>& models,
                                               Warnings* warnings = nullptr);

/// Persona fields from a generated character portrait. `characteristics` is
/// left empty (it comes from the seed, not the portrait).
Persona parse_persona(std::string_view raw);

struct SceneText {
  Background background;
  std::string reactions;

  bool operator==(const SceneText&) const = default;
};
SceneText parse_scene(std::string_view raw);

// ---------------------------------------------------------------------------
// Canonical formatters (well-formed outputs accepted by the parsers above)
// ---------------------------------------------------------------------------

std::string format_emotion_estimate(const EmotionEstimate& estimate);
std::string format_agent_reply(const AgentReply& reply);
std::string format_blri(const BlriLabels& labels);
std::string format_utterance_ratings(const UtteranceRatings& ratings);
std::string format_strategies(const std::vector<StrategySequence>& sequences);
std::string format_coordinates(const std::map<std::string, Point>& points);
std::string format_persona(const Persona& persona);
std::string format_scene(const SceneText& scene);

/// Persona and background blocks used as prompt slot values.
std::string persona_slot(const Persona& persona);
std::string background_slot(const Scene& scene);

// ---------------------------------------------------------------------------
// Parse-with-retry
// ---------------------------------------------------------------------------

inline constexpr std::string_view kFormatReminder = "Please follow the output format exactly.";

/// Calls the backend and parses the reply. On ParseError the same request is
/// re-sent with a format reminder appended, up to `retries` more times; the
/// last ParseError propagates. Usage of every attempt is added to `usage`.
template <class Parser>
auto complete_parsed(gateway::ChatBackend& backend, gateway::ChatRequest request, Parser&& parse,
                     int retries = 1, TokenUsage* usage = nullptr) {
  for (int attempt = 0;; ++attempt) {
    auto response = gateway::complete(backend, request);
    if (usage) *usage += response.usage;
    try {
      return parse(response.content);
    } catch (const ParseError& e) {
      if (attempt >= retries) throw;
      spdlog::debug("parse failed ({}); retrying with format reminder", e.what());
      if (request.messages.empty()) {
        request.messages.push_back({gateway::Role::User, std::string(kFormatReminder)});
      } else {
        request.messages.back().content += "\n\n";
        request.messages.back().content += kFormatReminder;
      }
    }
  }
}

}  // namespace sage::prompt
