/// @file judges.cpp

#include "sage/judges.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sage/error.hpp"

namespace sage::judges {

namespace {

constexpr std::array<Dimension, 4> kBlriDimensions = {{
    {"Empathetic Understanding", 1, 4},
    {"Level of Regard", 5, 8},
    {"Congruence", 9, 10},
    {"Unconditionality of Regard", 11, 12},
}};

constexpr std::array<Dimension, 3> kUtteranceDimensions = {{
    {"Natural Flow", 1, 6},
    {"Attentiveness", 7, 10},
    {"Depth of Connection", 11, 15},
}};

template <std::size_t N>
std::vector<double> dimension_means(const std::array<double, N>& items, std::span<const Dimension> dims) {
  std::vector<double> out;
  for (const auto& d : dims) {
    double sum = 0.0;
    for (int i = d.first_item; i <= d.last_item; ++i) sum += items[static_cast<std::size_t>(i - 1)];
    out.push_back(sum / (d.last_item - d.first_item + 1));
  }
  return out;
}

template <std::size_t N>
double mean_of(const std::array<double, N>& items) {
  return std::accumulate(items.begin(), items.end(), 0.0) / static_cast<double>(N);
}

const prompt::TemplateStore& store_of(const JudgeOptions& o) {
  return o.templates ? *o.templates : prompt::TemplateStore::builtin();
}

gateway::ChatRequest request_for(const JudgeOptions& o, std::string text) {
  return {o.judge_model_id, "", {{gateway::Role::User, std::move(text)}}, o.temperature, 4096};
}

void check_reverse(const std::set<int>& reverse, std::size_t items) {
  for (int i : reverse) {
    if (i < 1 || i > static_cast<int>(items)) {
      throw ConfigError(fmt::format("reverse item {} outside 1..{}", i, items));
    }
  }
}

}  // namespace

std::span<const Dimension> blri_dimensions() { return kBlriDimensions; }
std::span<const Dimension> utterance_dimensions() { return kUtteranceDimensions; }

int blri_label_score(char label) {
  if (label < 'A' || label > 'F') throw UnknownLabel(fmt::format("BLRI label '{}'", label));
  return 100 - 20 * (label - 'A');
}

std::array<double, prompt::kBlriItems> score_blri(const prompt::BlriLabels& labels,
                                                  const std::set<int>& reverse) {
  check_reverse(reverse, prompt::kBlriItems);
  std::array<double, prompt::kBlriItems> out{};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int s = blri_label_score(labels[i]);
    out[i] = reverse.contains(static_cast<int>(i + 1)) ? 100 - s : s;
  }
  return out;
}

double rescale_utterance(int rating) {
  if (rating < 1 || rating > 6) throw OutOfRange(fmt::format("utterance rating {} outside 1..6", rating));
  return 1.0 + (rating - 1) * 0.8;
}

std::array<double, prompt::kUtteranceItems> score_utterance(const prompt::UtteranceRatings& ratings,
                                                            const std::set<int>& reverse) {
  check_reverse(reverse, prompt::kUtteranceItems);
  std::array<double, prompt::kUtteranceItems> out{};
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    const int r = reverse.contains(static_cast<int>(i + 1)) ? 7 - ratings[i] : ratings[i];
    out[i] = rescale_utterance(r);
  }
  return out;
}

double BlriScores::overall() const { return mean_of(item_scores); }
double UtteranceScores::overall() const { return mean_of(item_scores); }

BlriScores aggregate_blri(const std::vector<prompt::BlriLabels>& passes, const std::set<int>& reverse) {
  if (passes.empty()) throw JudgeFailed("no BLRI pass survived");
  BlriScores s;
  for (const auto& labels : passes) {
    const auto items = score_blri(labels, reverse);
    for (std::size_t i = 0; i < items.size(); ++i) s.item_scores[i] += items[i];
    s.passes.emplace_back(labels.begin(), labels.end());
  }
  for (auto& v : s.item_scores) v /= static_cast<double>(passes.size());
  s.dimension_means = dimension_means(s.item_scores, kBlriDimensions);
  s.repeats = static_cast<int>(passes.size());
  return s;
}

UtteranceScores aggregate_utterance(const std::vector<prompt::UtteranceRatings>& passes,
                                    const std::set<int>& reverse) {
  if (passes.empty()) throw JudgeFailed("no utterance pass survived");
  UtteranceScores s;
  for (const auto& ratings : passes) {
    const auto items = score_utterance(ratings, reverse);
    for (std::size_t i = 0; i < items.size(); ++i) s.item_scores[i] += items[i];
    s.passes.emplace_back(ratings.begin(), ratings.end());
  }
  for (auto& v : s.item_scores) v /= static_cast<double>(passes.size());
  s.dimension_means = dimension_means(s.item_scores, kUtteranceDimensions);
  s.repeats = static_cast<int>(passes.size());
  return s;
}

std::string internal_thoughts_text(const DialogueRecord& record) {
  std::string out;
  for (const auto& t : record.turns) {
    out += fmt::format("Round {}:\nActivity: {}\nAnalyze: {}\n\n", t.index, t.estimate.activity,
                       t.estimate.analyze);
  }
  return out;
}

std::string transcript_text(const DialogueRecord& record) {
  std::string out = fmt::format("User: {}\n", record.opening_message);
  for (const auto& t : record.turns) {
    out += fmt::format("Partner: {}\n", t.target_utterance);
    out += fmt::format("User: {}\n", t.agent_reply);
  }
  return out;
}

namespace {

template <class Parsed, class Parser>
std::vector<Parsed> run_passes(const char* what, const DialogueRecord& record, gateway::ChatBackend& judge,
                               const JudgeOptions& options, const std::string& text, Parser parse) {
  if (options.repeats < 1) throw ConfigError("judge repeats must be >= 1");
  std::vector<Parsed> passes;
  for (int p = 0; p < options.repeats; ++p) {
    try {
      passes.push_back(prompt::complete_parsed(judge, request_for(options, text), parse, options.format_retries));
    } catch (const ParseError& e) {
      spdlog::warn("{} pass {} for ({}, {}) dropped: {}", what, p + 1, record.scenario_id,
                   record.target_model_id, e.what());
    }
  }
  if (passes.empty()) {
    throw JudgeFailed(fmt::format("every {} pass failed for ({}, {})", what, record.scenario_id,
                                  record.target_model_id));
  }
  return passes;
}

}  // namespace

BlriScores judge_blri(const DialogueRecord& record, gateway::ChatBackend& judge, const JudgeOptions& options) {
  if (record.turns.empty()) throw EmptyInput("BLRI needs at least one turn");
  const auto text = store_of(options).render(prompt::TemplateId::BlriJudge,
                                             {{"internal-user-thoughts", internal_thoughts_text(record)}});
  auto passes = run_passes<prompt::BlriLabels>("BLRI", record, judge, options, text,
                                               [](const std::string& raw) { return prompt::parse_blri(raw); });
  auto scores = aggregate_blri(passes, options.reverse.blri);
  scores.scenario_id = record.scenario_id;
  scores.target_model_id = record.target_model_id;
  return scores;
}

UtteranceScores judge_utterance(const DialogueRecord& record, gateway::ChatBackend& judge,
                                const JudgeOptions& options) {
  if (record.turns.empty()) throw EmptyInput("utterance judging needs a non-empty transcript");
  const auto text = store_of(options).render(prompt::TemplateId::UtteranceJudge,
                                             {{"dialogue", transcript_text(record)}});
  auto passes = run_passes<prompt::UtteranceRatings>(
      "utterance", record, judge, options, text,
      [](const std::string& raw) { return prompt::parse_utterance_ratings(raw); });
  auto scores = aggregate_utterance(passes, options.reverse.utterance);
  scores.scenario_id = record.scenario_id;
  scores.target_model_id = record.target_model_id;
  return scores;
}

std::string annotation_input(const DialogueRecord& record, std::size_t pos, AnnotationContext context) {
  const auto& turn = record.turns.at(pos);
  std::string out;
  if (context == AnnotationContext::FullHistory) {
    out += fmt::format("User: {}\n", record.opening_message);
    for (std::size_t i = 0; i < pos; ++i) {
      out += fmt::format("Supporter: {}\n", record.turns[i].target_utterance);
      out += fmt::format("User: {}\n", record.turns[i].agent_reply);
    }
  } else {
    const auto& before = pos == 0 ? record.opening_message : record.turns[pos - 1].agent_reply;
    out += fmt::format("User: {}\n", before);
  }
  out += fmt::format("Supporter: {}\n", turn.target_utterance);
  return out;
}

StrategySequence union_sequences(const std::vector<StrategySequence>& paragraphs) {
  StrategySequence out;
  for (const auto& seq : paragraphs) {
    for (const auto& code : seq) {
      if (std::find(out.begin(), out.end(), code) == out.end()) out.push_back(code);
    }
  }
  return out;
}

StrategyAnnotation annotate_strategies(const DialogueRecord& record, gateway::ChatBackend& judge,
                                       const JudgeOptions& options) {
  StrategyAnnotation out;
  out.scenario_id = record.scenario_id;
  out.target_model_id = record.target_model_id;
  for (std::size_t pos = 0; pos < record.turns.size(); ++pos) {
    const auto text = store_of(options).render(
        prompt::TemplateId::StrategyAnnotator,
        {{"dialog-history", annotation_input(record, pos, options.annotation_context)}});
    TurnStrategies ts;
    ts.turn_index = record.turns[pos].index;
    try {
      ts.codes = union_sequences(prompt::complete_parsed(
          judge, request_for(options, text), [](const std::string& raw) { return prompt::parse_strategies(raw); },
          options.format_retries));
    } catch (const ParseError& e) {
      ts.flagged = true;
      spdlog::warn("strategy annotation for ({}, {}) turn {} flagged: {}", record.scenario_id,
                   record.target_model_id, ts.turn_index, e.what());
    }
    out.turns.push_back(std::move(ts));
  }
  return out;
}

CaseSelection select_profile_cases(const std::vector<DialogueRecord>& records, const std::string& model_id,
                                   std::uint64_t seed, int per_bucket) {
  CaseSelection sel;
  std::mt19937_64 rng(seed);
  for (auto category : {IntentionCategory::Emotional, IntentionCategory::Rational}) {
    for (auto outcome : {Outcome::Success, Outcome::Failure}) {
      std::vector<const DialogueRecord*> bucket;
      for (const auto& r : records) {
        if (r.target_model_id == model_id && r.intention_category == category &&
            classify_outcome(r.final_emotion) == outcome) {
          bucket.push_back(&r);
        }
      }
      std::sort(bucket.begin(), bucket.end(),
                [](const DialogueRecord* a, const DialogueRecord* b) { return a->scenario_id < b->scenario_id; });
      const auto want = static_cast<std::size_t>(std::max(per_bucket, 0));
      const auto take = std::min(want, bucket.size());
      for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, bucket.size() - 1);
        std::swap(bucket[i], bucket[pick(rng)]);
        sel.cases.push_back(bucket[i]);
      }
      if (take < want) {
        sel.insufficient = true;
        sel.notes.push_back(fmt::format("{} {}: {} of {} cases available", to_string(category),
                                        to_string(outcome), take, want));
      }
    }
  }
  return sel;
}

ModelProfile profile_model(const std::string& model_id, const CaseSelection& selection,
                           gateway::ChatBackend& judge, const JudgeOptions& options) {
  if (selection.cases.empty()) throw EmptyInput("no cases to profile for model '" + model_id + "'");
  ModelProfile profile;
  profile.model_id = model_id;
  profile.insufficient = selection.insufficient;
  const auto& store = store_of(options);
  std::string joined;
  for (const auto* record : selection.cases) {
    const auto text = store.render(
        prompt::TemplateId::ProfileCaseAnalysis,
        {{"dialog-history", fmt::format("{}\n(Final emotion: {}, outcome: {})", transcript_text(*record),
                                        record->final_emotion, to_string(record->outcome))}});
    auto response = gateway::complete(judge, request_for(options, text));
    profile.cases.push_back({record->scenario_id, record->outcome, response.content});
    joined += fmt::format("## Case {} ({})\n{}\n\n", profile.cases.size(), to_string(record->outcome),
                          response.content);
  }
  const auto text = store.render(prompt::TemplateId::ProfileSummary, {{"analysis", joined}});
  profile.summary = gateway::complete(judge, request_for(options, text)).content;
  return profile;
}

std::string distribution_text(const std::map<std::string, StrategyDistribution>& distributions) {
  std::string out;
  for (const auto& [model, dist] : distributions) {
    out += model + ":";
    bool first = true;
    for (const auto& [code, share] : dist) {
      const auto* info = find_strategy(code);
      out += fmt::format("{} ({}) {} {:.1f}%", first ? "" : ";", code.str(),
                         info ? info->name : std::string_view{}, share * 100.0);
      first = false;
    }
    out += "\n";
  }
  return out;
}

Coordinates place_coordinates(const std::map<std::string, std::string>& profiles,
                              const std::map<std::string, StrategyDistribution>& distributions,
                              gateway::ChatBackend& judge, const JudgeOptions& options) {
  if (profiles.empty()) throw EmptyInput("no model profiles");
  for (const auto& [model, _] : profiles) {
    if (!distributions.contains(model)) throw ItemSetMismatch("no strategy distribution for '" + model + "'");
  }
  for (const auto& [model, _] : distributions) {
    if (!profiles.contains(model)) throw ItemSetMismatch("no profile for '" + model + "'");
  }
  if (options.repeats < 1) throw ConfigError("judge repeats must be >= 1");
  std::string profile_text;
  for (const auto& [model, summary] : profiles) profile_text += fmt::format("### {}\n{}\n\n", model, summary);
  const auto text = store_of(options).render(
      prompt::TemplateId::CoordinatePlacement,
      {{"model-profiles", profile_text}, {"model-strategy-distribution", distribution_text(distributions)}});

  std::map<std::string, std::vector<prompt::Point>> collected;
  for (int p = 0; p < options.repeats; ++p) {
    const auto response = gateway::complete(judge, request_for(options, text));
    for (const auto& [model, _] : profiles) {
      try {
        collected[model].push_back(prompt::parse_coordinates(response.content, {model}).at(model));
      } catch (const NoCoordinatesFound& e) {
        spdlog::warn("coordinate pass {}: {}", p + 1, e.what());
      }
    }
  }
  Coordinates out;
  for (const auto& [model, _] : profiles) {
    const auto& pts = collected[model];
    if (pts.empty()) throw JudgeFailed("no coordinate pass placed model '" + model + "'");
    prompt::Point mean;
    for (const auto& pt : pts) {
      mean.x += pt.x;
      mean.y += pt.y;
    }
    mean.x /= static_cast<double>(pts.size());
    mean.y /= static_cast<double>(pts.size());
    out.points[model] = mean;
    out.passes_used[model] = static_cast<int>(pts.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

void to_json(nlohmann::json& j, const BlriScores& v) {
  j = {{"scenario_id", v.scenario_id},   {"target_model_id", v.target_model_id},
       {"item_scores", v.item_scores},   {"dimension_means", v.dimension_means},
       {"overall", v.overall()},         {"repeats", v.repeats},
       {"passes", v.passes}};
}

void from_json(const nlohmann::json& j, BlriScores& v) {
  j.at("scenario_id").get_to(v.scenario_id);
  j.at("target_model_id").get_to(v.target_model_id);
  j.at("item_scores").get_to(v.item_scores);
  j.at("dimension_means").get_to(v.dimension_means);
  v.repeats = j.value("repeats", 0);
  v.passes = j.value("passes", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const UtteranceScores& v) {
  j = {{"scenario_id", v.scenario_id},   {"target_model_id", v.target_model_id},
       {"item_scores", v.item_scores},   {"dimension_means", v.dimension_means},
       {"overall", v.overall()},         {"repeats", v.repeats},
       {"passes", v.passes}};
}

void from_json(const nlohmann::json& j, UtteranceScores& v) {
  j.at("scenario_id").get_to(v.scenario_id);
  j.at("target_model_id").get_to(v.target_model_id);
  j.at("item_scores").get_to(v.item_scores);
  j.at("dimension_means").get_to(v.dimension_means);
  v.repeats = j.value("repeats", 0);
  v.passes = j.value("passes", std::vector<std::vector<int>>{});
}

void to_json(nlohmann::json& j, const ModelProfile& v) {
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : v.cases) {
    cases.push_back({{"scenario_id", c.scenario_id}, {"outcome", to_string(c.outcome)}, {"analysis", c.analysis}});
  }
  j = {{"model_id", v.model_id}, {"summary", v.summary}, {"insufficient", v.insufficient}, {"cases", cases}};
}

void from_json(const nlohmann::json& j, ModelProfile& v) {
  j.at("model_id").get_to(v.model_id);
  j.at("summary").get_to(v.summary);
  v.insufficient = j.value("insufficient", false);
  v.cases.clear();
  for (const auto& c : j.value("cases", nlohmann::json::array())) {
    v.cases.push_back({c.at("scenario_id").get<std::string>(),
                       outcome_from_string(c.at("outcome").get<std::string>()),
                       c.at("analysis").get<std::string>()});
  }
}

}  // namespace sage::judges
