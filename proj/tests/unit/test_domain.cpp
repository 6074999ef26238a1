/// @file test_domain.cpp

#include <random>

#include <gtest/gtest.h>

#include "sage/domain.hpp"
#include "sage/error.hpp"
#include "sage/serialization.hpp"
#include "testkit.hpp"

namespace {

using namespace sage;

TEST(EmotionState, BandEdges) {
  EXPECT_EQ(emotion_state(110), EmotionState::S);
  EXPECT_EQ(emotion_state(100), EmotionState::S);
  EXPECT_EQ(emotion_state(99), EmotionState::A);
  EXPECT_EQ(emotion_state(70), EmotionState::A);
  EXPECT_EQ(emotion_state(69), EmotionState::B);
  EXPECT_EQ(emotion_state(40), EmotionState::B);
  EXPECT_EQ(emotion_state(39), EmotionState::C);
  EXPECT_EQ(emotion_state(10), EmotionState::C);
  EXPECT_EQ(emotion_state(9), EmotionState::F);
  EXPECT_EQ(emotion_state(0), EmotionState::F);
  EXPECT_TRUE(is_terminal(EmotionState::S));
  EXPECT_TRUE(is_terminal(EmotionState::F));
  EXPECT_FALSE(is_terminal(EmotionState::C));
}

TEST(EmotionState, ApplyDeltaExamples) {
  EXPECT_EQ(apply_delta(50, 5), 55);
  EXPECT_EQ(apply_delta(50, 25), 60);
  EXPECT_EQ(apply_delta(12, -6), 6);
  EXPECT_EQ(emotion_state(apply_delta(12, -6)), EmotionState::F);
  EXPECT_EQ(apply_delta(85, 10), 95);
  EXPECT_EQ(apply_delta(95, 10), 105);
  EXPECT_EQ(apply_delta(105, 10), 110);
  EXPECT_EQ(apply_delta(3, -10), 0);
}

TEST(EmotionState, ApplyDeltaMatchesClampOracle) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> prev(0, 110);
  std::uniform_int_distribution<int> change(-1000, 1000);
  for (int i = 0; i < 20000; ++i) {
    const int p = prev(rng);
    const int c = change(rng);
    const int d = c > 10 ? 10 : (c < -10 ? -10 : c);
    const int want = std::min(110, std::max(0, p + d));
    ASSERT_EQ(apply_delta(p, c), want) << p << " " << c;
  }
}

TEST(Outcome, Classification) {
  EXPECT_EQ(classify_outcome(100), Outcome::Success);
  EXPECT_EQ(classify_outcome(110), Outcome::Success);
  EXPECT_EQ(classify_outcome(99), Outcome::MaxTurns);
  EXPECT_EQ(classify_outcome(10), Outcome::MaxTurns);
  EXPECT_EQ(classify_outcome(9), Outcome::Failure);
  EXPECT_EQ(outcome_from_string(to_string(Outcome::MaxTurns)), Outcome::MaxTurns);
  EXPECT_THROW(outcome_from_string("Nope"), ValidationError);
}

TEST(Validation, PersonaNeedsThreeHobbies) {
  auto p = testkit::sample_persona();
  EXPECT_NO_THROW(validate(p));
  p.hobbies.pop_back();
  EXPECT_THROW(validate(p), ValidationError);
}

TEST(Validation, SpecInitialEmotionRange) {
  AgentSpec spec{testkit::sample_persona(), testkit::sample_scene(), "judge", 50};
  EXPECT_NO_THROW(validate(spec));
  spec.initial_emotion = 101;
  EXPECT_THROW(validate(spec), ValidationError);
}

DialogueRecord small_record() {
  DialogueRecord r;
  r.scenario_id = "s1";
  r.target_model_id = "m";
  r.judge_model_id = "j";
  r.topic = "deep_empathy";
  r.initial_emotion = 50;
  r.opening_message = "hi";
  Turn t1;
  t1.index = 1;
  t1.target_utterance = "hello";
  t1.estimate.change = 7;
  t1.emotion_after = 57;
  t1.agent_reply = "ok";
  t1.target_token_usage = {10, 20};
  Turn t2 = t1;
  t2.index = 2;
  t2.estimate.change = -3;
  t2.emotion_after = 54;
  t2.target_token_usage = {15, 25};
  r.turns = {t1, t2};
  r.final_emotion = 54;
  r.outcome = Outcome::MaxTurns;
  r.termination = Termination::TurnLimit;
  r.total_target_tokens = 70;
  return r;
}

TEST(Record, CheckRecordAcceptsConsistentRecord) {
  EXPECT_TRUE(check_record(small_record()).empty());
  EXPECT_EQ(emotion_before(small_record(), 1), 57);
  EXPECT_EQ(emotion_before(small_record(), 0), 50);
}

TEST(Record, CheckRecordFlagsInconsistencies) {
  auto r = small_record();
  r.final_emotion = 60;
  EXPECT_FALSE(check_record(r).empty());
  r = small_record();
  r.turns[1].emotion_after = 99;
  EXPECT_FALSE(check_record(r).empty());
  r = small_record();
  r.outcome = Outcome::Success;
  EXPECT_FALSE(check_record(r).empty());
}

TEST(Serialization, RecordRoundTrip) {
  const auto r = small_record();
  EXPECT_EQ(from_json_line<DialogueRecord>(to_json_line(r)), r);
  const auto s = testkit::sample_scenario("x-1");
  EXPECT_EQ(nlohmann::json(s).get<Scenario>(), s);
  const AbortedDialogue a{"s", "m", "j", "boom", 3};
  EXPECT_EQ(from_json_line<AbortedDialogue>(to_json_line(a)), a);
}

TEST(Serialization, ReadJsonlSkipsTornLine) {
  testkit::TempDir dir;
  const auto path = dir / "r.jsonl";
  {
    std::ofstream out(path);
    out << to_json_line(small_record()) << "\n" << R"({"scenario_id": "tor)";
  }
  std::size_t skipped = 0;
  const auto rows = read_jsonl<DialogueRecord>(path, &skipped);
  EXPECT_EQ(rows.size(), 1u);
  EXPECT_EQ(skipped, 1u);
}

}  // namespace
