/// @file test_judges.cpp

#include <gtest/gtest.h>

#include "sage/error.hpp"
#include "sage/judges.hpp"
#include "testkit.hpp"

namespace {

using namespace sage;
using namespace sage::judges;
using gateway::ScriptedBackend;

prompt::BlriLabels labels_of(const std::string& s) {
  prompt::BlriLabels l{};
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = s.at(i);
  return l;
}

prompt::UtteranceRatings ratings_all(int r) {
  prompt::UtteranceRatings out{};
  out.fill(r);
  return out;
}

DialogueRecord record(const std::string& id, const std::string& model, int turns) {
  DialogueRecord r;
  r.scenario_id = id;
  r.target_model_id = model;
  r.judge_model_id = "judge";
  r.opening_message = "opening";
  int e = 50;
  for (int i = 1; i <= turns; ++i) {
    Turn t;
    t.index = i;
    t.target_utterance = "target " + std::to_string(i);
    t.agent_reply = "reply " + std::to_string(i);
    t.estimate = {"c", "tc", "activity " + std::to_string(i), "analyze " + std::to_string(i), 2};
    e += 2;
    t.emotion_after = e;
    r.turns.push_back(t);
  }
  r.final_emotion = e;
  r.outcome = classify_outcome(e);
  return r;
}

TEST(Blri, LabelScores) {
  EXPECT_EQ(blri_label_score('A'), 100);
  EXPECT_EQ(blri_label_score('B'), 80);
  EXPECT_EQ(blri_label_score('C'), 60);
  EXPECT_EQ(blri_label_score('D'), 40);
  EXPECT_EQ(blri_label_score('E'), 20);
  EXPECT_EQ(blri_label_score('F'), 0);
  EXPECT_THROW(blri_label_score('G'), UnknownLabel);
}

TEST(Blri, ReverseScoring) {
  const auto all_a = labels_of("AAAAAAAAAAAA");
  const auto none = score_blri(all_a, ReverseItems::none().blri);
  for (double v : none) EXPECT_EQ(v, 100.0);
  const auto rev = score_blri(all_a, ReverseItems{}.blri);
  EXPECT_EQ(rev[11], 0.0);
  EXPECT_EQ(rev[10], 100.0);
  EXPECT_THROW(score_blri(all_a, {13}), ConfigError);
}

TEST(Blri, AggregateAveragesPassesAndDimensions) {
  const auto s = aggregate_blri({labels_of("AAAAAAAAAAAA"), labels_of("CCCCCCCCCCCC")}, {});
  EXPECT_EQ(s.repeats, 2);
  EXPECT_DOUBLE_EQ(s.overall(), 80.0);
  ASSERT_EQ(s.dimension_means.size(), 4u);
  for (double d : s.dimension_means) EXPECT_DOUBLE_EQ(d, 80.0);
  EXPECT_EQ(s.passes[1], "CCCCCCCCCCCC");
  EXPECT_THROW(aggregate_blri({}, {}), JudgeFailed);

  const auto mixed = aggregate_blri({labels_of("AAAAFFFFAAFF")}, {});
  EXPECT_EQ(mixed.dimension_means, (std::vector<double>{100.0, 0.0, 100.0, 0.0}));
}

TEST(Utterance, RescalingEndpoints) {
  EXPECT_DOUBLE_EQ(rescale_utterance(1), 1.0);
  EXPECT_DOUBLE_EQ(rescale_utterance(6), 5.0);
  EXPECT_DOUBLE_EQ(rescale_utterance(3), 2.6);
  EXPECT_THROW(rescale_utterance(0), OutOfRange);
  EXPECT_THROW(rescale_utterance(7), OutOfRange);
}

TEST(Utterance, ReversedItemsFlipBeforeRescaling) {
  const auto s = score_utterance(ratings_all(6), ReverseItems{}.utterance);
  EXPECT_DOUBLE_EQ(s[3], 1.0);
  EXPECT_DOUBLE_EQ(s[5], 1.0);
  EXPECT_DOUBLE_EQ(s[0], 5.0);
  const auto agg = aggregate_utterance({ratings_all(6)}, {});
  EXPECT_DOUBLE_EQ(agg.overall(), 5.0);
  EXPECT_EQ(agg.dimension_means.size(), 3u);
}

TEST(Transcripts, ThoughtsAndDialogue) {
  const auto r = record("s", "m", 2);
  const auto thoughts = internal_thoughts_text(r);
  EXPECT_NE(thoughts.find("activity 2"), std::string::npos);
  EXPECT_NE(thoughts.find("analyze 1"), std::string::npos);
  const auto t = transcript_text(r);
  EXPECT_EQ(t.find("User: opening"), 0u);
  EXPECT_NE(t.find("Partner: target 2"), std::string::npos);
}

TEST(JudgeBlri, DropsUnparseablePassAndAverages) {
  const auto r = record("s", "m", 2);
  auto judge = ScriptedBackend::from_texts({prompt::format_blri(labels_of("AAAAAAAAAAAA")), "junk", "junk again",
                                            prompt::format_blri(labels_of("BBBBBBBBBBBB"))});
  JudgeOptions o;
  o.repeats = 3;
  o.reverse = ReverseItems::none();
  const auto s = judge_blri(r, *judge, o);
  EXPECT_EQ(s.repeats, 2);
  EXPECT_DOUBLE_EQ(s.overall(), 90.0);
  EXPECT_EQ(s.scenario_id, "s");
  const auto prompt_text = judge->requests()[0].messages[0].content;
  EXPECT_NE(prompt_text.find("analyze 2"), std::string::npos);
  EXPECT_TRUE(judge->requests()[0].system_prompt.empty());
}

TEST(JudgeBlri, AllPassesFailing) {
  const auto r = record("s", "m", 1);
  auto judge = ScriptedBackend::from_texts({"a", "b", "c", "d"});
  JudgeOptions o;
  o.repeats = 2;
  EXPECT_THROW(judge_blri(r, *judge, o), JudgeFailed);
  EXPECT_THROW(judge_blri(record("s", "m", 0), *judge, o), EmptyInput);
}

TEST(JudgeUtterance, ScoresTranscript) {
  const auto r = record("s", "m", 1);
  auto judge = ScriptedBackend::from_texts({prompt::format_utterance_ratings(ratings_all(1))});
  JudgeOptions o;
  o.repeats = 1;
  const auto s = judge_utterance(r, *judge, o);
  EXPECT_DOUBLE_EQ(s.item_scores[0], 1.0);
  EXPECT_DOUBLE_EQ(s.item_scores[3], 5.0);
  EXPECT_NE(judge->requests()[0].messages[0].content.find("Partner: target 1"), std::string::npos);
}

TEST(Strategies, UnionKeepsFirstAppearance) {
  const StrategySequence p1{{'B', 1}, {'A', 2}};
  const StrategySequence p2{{'A', 2}, {'C', 1}, {'B', 1}};
  EXPECT_EQ(union_sequences({p1, p2}), (StrategySequence{{'B', 1}, {'A', 2}, {'C', 1}}));
  EXPECT_TRUE(union_sequences({}).empty());
}

TEST(Strategies, AnnotationInputContexts) {
  const auto r = record("s", "m", 3);
  EXPECT_EQ(annotation_input(r, 0, AnnotationContext::LastExchange), "User: opening\nSupporter: target 1\n");
  EXPECT_EQ(annotation_input(r, 2, AnnotationContext::LastExchange), "User: reply 2\nSupporter: target 3\n");
  const auto full = annotation_input(r, 2, AnnotationContext::FullHistory);
  EXPECT_EQ(full.find("User: opening"), 0u);
  EXPECT_NE(full.find("Supporter: target 2\nUser: reply 2\nSupporter: target 3\n"), std::string::npos);
}

TEST(Strategies, AnnotateFlagsUnparseableTurn) {
  const auto r = record("s", "m", 2);
  auto judge = ScriptedBackend::from_texts(
      {"<Strategy>A-1, B-2</Strategy> then <Strategy>A-1 C-1</Strategy>", "nothing", "still nothing"});
  const auto a = annotate_strategies(r, *judge, {});
  ASSERT_EQ(a.turns.size(), 2u);
  EXPECT_EQ(a.turns[0].codes, (StrategySequence{{'A', 1}, {'B', 2}, {'C', 1}}));
  EXPECT_FALSE(a.turns[0].flagged);
  EXPECT_TRUE(a.turns[1].flagged);
  EXPECT_TRUE(a.turns[1].codes.empty());
  EXPECT_EQ(a.turns[1].turn_index, 2);
}

TEST(Profiles, CaseSelectionBuckets) {
  std::vector<DialogueRecord> records;
  for (int i = 0; i < 8; ++i) {
    auto r = record("e" + std::to_string(i), "m", 1);
    r.final_emotion = i % 2 ? 100 : 5;
    r.outcome = classify_outcome(r.final_emotion);
    records.push_back(r);
  }
  auto other = record("x", "other", 1);
  other.final_emotion = 100;
  records.push_back(other);
  const auto sel = select_profile_cases(records, "m", 3, 2);
  EXPECT_EQ(sel.cases.size(), 4u);
  EXPECT_TRUE(sel.insufficient);
  for (const auto* c : sel.cases) EXPECT_EQ(c->target_model_id, "m");
  const auto again = select_profile_cases(records, "m", 3, 2);
  EXPECT_EQ(sel.cases, again.cases);
}

TEST(Profiles, ProfileModelCallsPerCaseThenSummary) {
  std::vector<DialogueRecord> records{record("a", "m", 1), record("b", "m", 1)};
  records[0].final_emotion = 100;
  records[0].outcome = Outcome::Success;
  records[1].final_emotion = 0;
  records[1].outcome = Outcome::Failure;
  const auto sel = select_profile_cases(records, "m", 1, 1);
  auto judge = ScriptedBackend::from_texts({"analysis one", "analysis two", "summary"});
  const auto p = profile_model("m", sel, *judge, {});
  EXPECT_EQ(p.cases.size(), 2u);
  EXPECT_EQ(p.summary, "summary");
  EXPECT_NE(judge->requests()[2].messages[0].content.find("analysis two"), std::string::npos);
  EXPECT_THROW(profile_model("m", CaseSelection{}, *judge, {}), EmptyInput);
}

TEST(Coordinates, AveragesPassesAndIgnoresOmissions) {
  const std::map<std::string, std::string> profiles{{"m1", "warm"}, {"m2", "terse"}};
  const std::map<std::string, StrategyDistribution> dists{{"m1", {{{'A', 1}, 1.0}}}, {"m2", {{{'B', 1}, 1.0}}}};
  auto judge = ScriptedBackend::from_texts({"m1: (0.2, 0.4)\nm2: (-0.5, 0.0)", "m1: (0.4, 0.0)"});
  JudgeOptions o;
  o.repeats = 2;
  const auto c = place_coordinates(profiles, dists, *judge, o);
  EXPECT_DOUBLE_EQ(c.points.at("m1").x, 0.3);
  EXPECT_DOUBLE_EQ(c.points.at("m1").y, 0.2);
  EXPECT_EQ(c.passes_used.at("m1"), 2);
  EXPECT_EQ(c.passes_used.at("m2"), 1);
  EXPECT_DOUBLE_EQ(c.points.at("m2").x, -0.5);
  const auto prompt_text = judge->requests()[0].messages[0].content;
  EXPECT_NE(prompt_text.find("warm"), std::string::npos);
  EXPECT_NE(prompt_text.find("100.0%"), std::string::npos);
}

TEST(Coordinates, MismatchAndFailure) {
  const std::map<std::string, std::string> profiles{{"m1", "p"}};
  auto judge = ScriptedBackend::from_texts({"nothing useful", "still nothing"});
  JudgeOptions o;
  o.repeats = 2;
  EXPECT_THROW(place_coordinates(profiles, {}, *judge, o), ItemSetMismatch);
  EXPECT_THROW(place_coordinates(profiles, {{"m1", {}}}, *judge, o), JudgeFailed);
}

TEST(Serialization, ScoresRoundTrip) {
  auto s = aggregate_blri({labels_of("ABCDEFABCDEF")}, {12});
  s.scenario_id = "x";
  s.target_model_id = "m";
  const auto back = nlohmann::json(s).get<BlriScores>();
  EXPECT_EQ(back.item_scores, s.item_scores);
  EXPECT_EQ(back.passes, s.passes);
  ModelProfile p{"m", "sum", {{"a", Outcome::Success, "ok"}}, true};
  const auto pb = nlohmann::json(p).get<ModelProfile>();
  EXPECT_EQ(pb.cases.at(0).outcome, Outcome::Success);
  EXPECT_TRUE(pb.insufficient);
}

}  // namespace
