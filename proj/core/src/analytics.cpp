/// @file analytics.cpp

#include "sage/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "sage/error.hpp"

namespace sage::analytics {

std::vector<LeaderboardRow> leaderboard(const std::vector<DialogueRecord>& records,
                                        const std::vector<AbortedDialogue>& aborted) {
  if (records.empty()) throw EmptyInput("leaderboard needs at least one dialogue record");
  struct Acc {
    LeaderboardRow row;
    double emotion_sum = 0.0;
    double token_sum = 0.0;
  };
  std::map<std::string, Acc> by_model;
  for (const auto& r : records) {
    auto& a = by_model[r.target_model_id];
    a.row.model_id = r.target_model_id;
    ++a.row.dialogues;
    a.emotion_sum += r.final_emotion;
    a.token_sum += static_cast<double>(r.total_target_tokens);
    switch (classify_outcome(r.final_emotion)) {
      case Outcome::Success: ++a.row.success_count; break;
      case Outcome::Failure: ++a.row.failure_count; break;
      case Outcome::MaxTurns: ++a.row.maxturns_count; break;
    }
  }
  for (const auto& a : aborted) {
    if (auto it = by_model.find(a.target_model_id); it != by_model.end()) ++it->second.row.aborted_count;
  }
  std::vector<LeaderboardRow> rows;
  for (auto& [_, a] : by_model) {
    a.row.mean_final_emotion = a.emotion_sum / a.row.dialogues;
    a.row.mean_tokens = a.token_sum / a.row.dialogues;
    rows.push_back(a.row);
  }
  std::sort(rows.begin(), rows.end(), [](const LeaderboardRow& x, const LeaderboardRow& y) {
    if (x.mean_final_emotion != y.mean_final_emotion) return x.mean_final_emotion > y.mean_final_emotion;
    if (x.success_count != y.success_count) return x.success_count > y.success_count;
    return x.model_id < y.model_id;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = static_cast<int>(i + 1);
  return rows;
}

double nw_score(const StrategySequence& a, const StrategySequence& b, const NwScoring& scoring) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> prev(m + 1);
  std::vector<double> cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<double>(j) * scoring.gap;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<double>(i) * scoring.gap;
    for (std::size_t j = 1; j <= m; ++j) {
      const double diag = prev[j - 1] + (a[i - 1] == b[j - 1] ? scoring.match : scoring.mismatch);
      cur[j] = std::max({diag, prev[j] + scoring.gap, cur[j - 1] + scoring.gap});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double nw_similarity(const StrategySequence& a, const StrategySequence& b, const NwScoring& scoring) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  return nw_score(a, b, scoring) / static_cast<double>(std::max(a.size(), b.size()));
}

double ssrr(const std::vector<std::vector<StrategySequence>>& dialogues, const NwScoring& scoring) {
  double total = 0.0;
  std::size_t eligible = 0;
  for (const auto& d : dialogues) {
    if (d.size() < 2) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < d.size(); ++i) sum += nw_similarity(d[i], d[i + 1], scoring);
    total += sum / static_cast<double>(d.size() - 1);
    ++eligible;
  }
  if (eligible == 0) throw NoEligibleDialogues("no dialogue has two or more annotated responses");
  return total / static_cast<double>(eligible);
}

std::vector<std::vector<StrategySequence>> sequences_of(const std::vector<StrategyAnnotation>& annotations,
                                                        const std::string& model_id, bool skip_flagged) {
  std::vector<std::vector<StrategySequence>> out;
  for (const auto& a : annotations) {
    if (a.target_model_id != model_id) continue;
    std::vector<StrategySequence> d;
    for (const auto& t : a.turns) {
      if (skip_flagged && t.flagged) continue;
      d.push_back(t.codes);
    }
    out.push_back(std::move(d));
  }
  return out;
}

const std::vector<Capability>& capability_map() {
  static const std::vector<Capability> map = {
      {"Deep Empathic Engagement", {{'B', 2}, {'B', 3}, {'C', 1}, {'C', 2}}, "deep_empathy"},
      {"Effective Praise and Affirmation", {{'E', 1}, {'E', 2}, {'E', 3}}, "sincere_praise"},
      {"Facilitating Emotional Expression", {{'D', 2}, {'D', 3}}, "attentive_listening"},
      {"Providing Effective Solutions", {{'F', 5}}, "practical_advice"},
  };
  return map;
}

std::optional<double> strategy_effectiveness(const std::vector<DialogueRecord>& records,
                                             const std::vector<StrategyAnnotation>& annotations,
                                             const std::set<StrategyCode>& strategies, const SeScope& scope) {
  std::map<std::pair<std::string, std::string>, const DialogueRecord*> index;
  for (const auto& r : records) index[{r.scenario_id, r.target_model_id}] = &r;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& a : annotations) {
    const auto it = index.find({a.scenario_id, a.target_model_id});
    if (it == index.end()) continue;
    const auto& record = *it->second;
    if (scope.topic && record.topic != *scope.topic) continue;
    for (const auto& t : a.turns) {
      if (t.flagged) continue;
      const auto pos = std::find_if(record.turns.begin(), record.turns.end(),
                                    [&](const Turn& turn) { return turn.index == t.turn_index; });
      if (pos == record.turns.end()) continue;
      const auto p = static_cast<std::size_t>(pos - record.turns.begin());
      const int delta = pos->emotion_after - emotion_before(record, p);
      std::set<StrategyCode> used(t.codes.begin(), t.codes.end());
      for (const auto& code : used) {
        if (strategies.contains(code)) {
          sum += delta;
          ++n;
        }
      }
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw DegenerateInput("pearson inputs differ in length");
  if (xs.size() < 2) throw DegenerateInput("pearson needs at least two points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("pearson input has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(const std::map<std::string, double>& ranking_a, const std::map<std::string, double>& ranking_b) {
  if (ranking_a.size() != ranking_b.size()) throw ItemSetMismatch("rankings cover different item sets");
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& [item, value] : ranking_a) {
    const auto it = ranking_b.find(item);
    if (it == ranking_b.end()) throw ItemSetMismatch("item '" + item + "' missing from second ranking");
    a.push_back(value);
    b.push_back(it->second);
  }
  if (a.size() < 2) throw DegenerateInput("spearman needs at least two items");
  return pearson(average_ranks(a), average_ranks(b));
}

std::vector<TokenEfficiency> token_efficiency(const std::vector<DialogueRecord>& records) {
  std::vector<TokenEfficiency> out;
  for (const auto& row : leaderboard(records)) out.push_back({row.model_id, row.mean_tokens, row.mean_final_emotion});
  return out;
}

std::map<StrategyCode, double> strategy_distribution(const std::vector<StrategyAnnotation>& annotations,
                                                     const std::string& model_id) {
  std::map<StrategyCode, double> counts;
  double total = 0.0;
  for (const auto& a : annotations) {
    if (a.target_model_id != model_id) continue;
    for (const auto& t : a.turns) {
      for (const auto& c : t.codes) {
        counts[c] += 1.0;
        total += 1.0;
      }
    }
  }
  if (total > 0) {
    for (auto& [_, v] : counts) v /= total;
  }
  return counts;
}

std::string leaderboard_markdown(const std::vector<LeaderboardRow>& rows) {
  std::string out =
      "| Rank | Model | Score | Success | Failure | MaxTurns | Aborted | Avg tokens |\n"
      "|---:|---|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out += fmt::format("| {} | {} | {:.1f} | {} | {} | {} | {} | {:.0f} |\n", r.rank, r.model_id,
                       r.mean_final_emotion, r.success_count, r.failure_count, r.maxturns_count,
                       r.aborted_count, r.mean_tokens);
  }
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string leaderboard_csv(const std::vector<LeaderboardRow>& rows) {
  std::string out = "rank,model_id,score,success,failure,max_turns,aborted,mean_tokens,dialogues\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.rank, csv_field(r.model_id), r.mean_final_emotion,
                       r.success_count, r.failure_count, r.maxturns_count, r.aborted_count, r.mean_tokens,
                       r.dialogues);
  }
  return out;
}

std::string token_efficiency_csv(const std::vector<TokenEfficiency>& rows) {
  std::string out = "model_id,mean_tokens,score\n";
  for (const auto& r : rows) out += fmt::format("{},{},{}\n", csv_field(r.model_id), r.mean_tokens, r.score);
  return out;
}

}  // namespace sage::analytics
