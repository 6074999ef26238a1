/// @file analytics.hpp
/// @brief Pure metrics over dialogue records and strategy annotations:
/// leaderboard, strategy-sequence alignment and SSRR, strategy effectiveness,
/// correlations and token efficiency, plus markdown/CSV emitters.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sage/domain.hpp"
#include "sage/strategy.hpp"

namespace sage::analytics {

struct LeaderboardRow {
  int rank = 0;
  std::string model_id;
  double mean_final_emotion = 0.0;  // the Sentient score
  int success_count = 0;
  int failure_count = 0;
  int maxturns_count = 0;
  int aborted_count = 0;
  double mean_tokens = 0.0;
  int dialogues = 0;  // non-aborted records
};

/// Sorted by score descending, then success count descending, then model id.
/// Throws EmptyInput when there are no records.
std::vector<LeaderboardRow> leaderboard(const std::vector<DialogueRecord>& records,
                                        const std::vector<AbortedDialogue>& aborted = {});

struct NwScoring {
  double match = 1.0;
  double mismatch = 0.0;
  double gap = 0.0;
};

/// Optimal global alignment score.
double nw_score(const StrategySequence& a, const StrategySequence& b, const NwScoring& scoring = {});

/// Alignment score / max(|a|, |b|). Both empty → 1, exactly one empty → 0.
double nw_similarity(const StrategySequence& a, const StrategySequence& b, const NwScoring& scoring = {});

/// Mean over dialogues of the mean adjacent-response similarity. Dialogues
/// with fewer than two responses are skipped; NoEligibleDialogues if none remain.
double ssrr(const std::vector<std::vector<StrategySequence>>& dialogues, const NwScoring& scoring = {});

/// Per-dialogue response sequences for one model. Flagged turns are dropped
/// when `skip_flagged` is set.
std::vector<std::vector<StrategySequence>> sequences_of(const std::vector<StrategyAnnotation>& annotations,
                                                        const std::string& model_id, bool skip_flagged = true);

struct Capability {
  std::string name;
  std::vector<StrategyCode> strategies;
  std::string topic;  // related hidden-intention topic id
};

const std::vector<Capability>& capability_map();

struct SeScope {
  std::optional<std::string> topic;  // empty = overall
  static SeScope overall() { return {}; }
  static SeScope task_specific(std::string t) { return {std::move(t)}; }
};

/// Mean committed emotion change over every (turn, code) instance whose code
/// is in `strategies`. Empty when there is no instance.
std::optional<double> strategy_effectiveness(const std::vector<DialogueRecord>& records,
                                             const std::vector<StrategyAnnotation>& annotations,
                                             const std::set<StrategyCode>& strategies, const SeScope& scope);

/// Throws DegenerateInput on length < 2, mismatched lengths or zero variance.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

/// 1-based ranks by ascending value; ties get the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& values);

/// Pearson correlation of the tie-averaged ranks of two item → value maps.
/// Throws ItemSetMismatch or DegenerateInput.
double spearman_rho(const std::map<std::string, double>& ranking_a, const std::map<std::string, double>& ranking_b);

struct TokenEfficiency {
  std::string model_id;
  double mean_tokens = 0.0;
  double score = 0.0;
};

/// Throws EmptyInput when there are no records.
std::vector<TokenEfficiency> token_efficiency(const std::vector<DialogueRecord>& records);

/// Share of each code among all annotated instances for a model.
std::map<StrategyCode, double> strategy_distribution(const std::vector<StrategyAnnotation>& annotations,
                                                     const std::string& model_id);

std::string leaderboard_markdown(const std::vector<LeaderboardRow>& rows);
std::string leaderboard_csv(const std::vector<LeaderboardRow>& rows);
std::string token_efficiency_csv(const std::vector<TokenEfficiency>& rows);

}  // namespace sage::analytics
