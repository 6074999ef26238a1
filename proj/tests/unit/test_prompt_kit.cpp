/// @file test_prompt_kit.cpp

#include <fstream>

#include <gtest/gtest.h>

#include "sage/assets.hpp"
#include "sage/error.hpp"
#include "sage/prompt_kit.hpp"
#include "testkit.hpp"

namespace {

using namespace sage;
using namespace sage::prompt;

Slots filled(TemplateId id, const std::string& value = "X") {
  Slots s;
  for (const auto& name : TemplateStore::builtin().slots(id)) s[name] = value;
  return s;
}

TEST(Templates, EveryTemplateRendersWithItsSlots) {
  for (const auto id : all_templates()) {
    const auto text = render(id, filled(id));
    EXPECT_FALSE(text.empty()) << to_string(id);
    EXPECT_TRUE(placeholders(text).empty()) << to_string(id);
    EXPECT_EQ(template_from_string(to_string(id)), id);
  }
  EXPECT_EQ(all_templates().size(), 13u);
}

TEST(Templates, DeclaredSlotSets) {
  const auto& store = TemplateStore::builtin();
  EXPECT_EQ(store.slots(TemplateId::EmotionEstimation),
            (std::set<std::string>{"purpose", "persona", "background", "emotion", "dialog-history"}));
  EXPECT_EQ(store.slots(TemplateId::PersonaGen), (std::set<std::string>{"three-sentences", "characteristics"}));
  EXPECT_TRUE(store.slots(TemplateId::TargetSystem).empty());
}

TEST(Templates, EmotionEstimationHasAnalysisDimensions) {
  const auto text = render(TemplateId::EmotionEstimation, filled(TemplateId::EmotionEstimation));
  EXPECT_NE(text.find("# Analysis Dimensions"), std::string::npos);
}

TEST(Templates, TargetSystemIsThePartnerSentence) {
  const auto text = render(TemplateId::TargetSystem, {});
  EXPECT_NE(text.find("an intelligent conversational partner"), std::string::npos);
}

TEST(Templates, PersonaPromptQuotesThreeSentences) {
  const auto text = render(TemplateId::PersonaGen, filled(TemplateId::PersonaGen));
  EXPECT_NE(text.find("Three sentences"), std::string::npos);
}

TEST(Templates, MissingAndUnknownSlots) {
  auto slots = filled(TemplateId::EmotionEstimation);
  slots.erase("persona");
  try {
    render(TemplateId::EmotionEstimation, slots);
    FAIL();
  } catch (const MissingSlot& e) {
    EXPECT_EQ(e.slot(), "persona");
  }
  slots = filled(TemplateId::EmotionEstimation);
  slots["mood"] = "x";
  EXPECT_THROW(render(TemplateId::EmotionEstimation, slots), UnknownSlot);
}

TEST(Templates, SubstitutionIsSinglePassAndPure) {
  auto slots = filled(TemplateId::ProfileSummary, "{analysis}");
  const auto a = render(TemplateId::ProfileSummary, slots);
  const auto b = render(TemplateId::ProfileSummary, slots);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("{analysis}"), std::string::npos);
}

TEST(Templates, DirectoryOverrideMustKeepSlotSets) {
  testkit::TempDir dir;
  for (const auto id : all_templates()) {
    std::ofstream(dir / (std::string(to_string(id)) + ".txt")) << TemplateStore::builtin().text(id);
  }
  const auto store = TemplateStore::from_directory(dir.path());
  EXPECT_EQ(store.text(TemplateId::BlriJudge), TemplateStore::builtin().text(TemplateId::BlriJudge));
  std::ofstream(dir / "blri_judge.txt", std::ios::trunc) << "no slots at all";
  EXPECT_THROW(TemplateStore::from_directory(dir.path()), TemplateError);
}

TEST(Templates, AssetsAreEmbedded) {
  EXPECT_TRUE(assets::find("templates/blri_judge.txt").has_value());
  EXPECT_THROW(assets::get("templates/nope.txt"), ConfigError);
}

TEST(Placeholders, OrderOfFirstAppearance) {
  EXPECT_EQ(placeholders("{b} then {a} then {b} and {Not} {x_y}"), (std::vector<std::string>{"b", "a"}));
}

TEST(CompleteParsed, RetriesOnceWithReminder) {
  auto backend = gateway::ScriptedBackend::from_texts({"garbage", "Thinking:\nt\nResponse:\nr"});
  gateway::ChatRequest req{"j", "", {{gateway::Role::User, "prompt"}}, 0.0, 10};
  TokenUsage usage;
  const auto reply = complete_parsed(*backend, req, parse_agent_reply, 1, &usage);
  EXPECT_EQ(reply.response, "r");
  const auto seen = backend->requests();
  ASSERT_EQ(seen.size(), 2u);
  EXPECT_EQ(seen[0].messages.back().content, "prompt");
  EXPECT_NE(seen[1].messages.back().content.find(kFormatReminder), std::string::npos);
  EXPECT_GT(usage.total(), 0);
}

TEST(CompleteParsed, GivesUpAfterRetries) {
  auto backend = gateway::ScriptedBackend::from_texts({"bad", "still bad", "unused"});
  gateway::ChatRequest req{"j", "", {{gateway::Role::User, "prompt"}}, 0.0, 10};
  EXPECT_THROW(complete_parsed(*backend, req, parse_agent_reply, 1), MalformedReply);
  EXPECT_EQ(backend->calls(), 2u);
}

TEST(Slots, PersonaAndBackgroundBlocks) {
  const auto p = testkit::sample_persona();
  const auto persona = persona_slot(p);
  EXPECT_NE(persona.find("Li Jiajun"), std::string::npos);
  EXPECT_NE(persona.find(p.characteristics), std::string::npos);
  const auto s = testkit::sample_scene();
  const auto bg = background_slot(s);
  EXPECT_NE(bg.find(s.hidden_intention), std::string::npos);
  EXPECT_NE(bg.find(s.background.cause), std::string::npos);
}

}  // namespace
