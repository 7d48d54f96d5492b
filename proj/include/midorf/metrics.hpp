#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace midorf::metrics {

/// Pearson correlation; nullopt when either side is constant.
std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b);

double mean_absolute_error(const std::vector<double>& a, const std::vector<double>& b);

/// ICC(3,1): two-way mixed, single measure, consistency, over the n x 2
/// table (prediction, truth). nullopt when the between-target mean square
/// and residual mean square are both zero.
std::optional<double> icc_3_1(const std::vector<double>& pred, const std::vector<double>& truth);

struct Scores {
  std::optional<double> corr;
  double mae = 0.0;
  std::optional<double> icc;
  std::size_t n = 0;
};

struct SequenceScores {
  std::string id;
  Scores scores;
};

struct Report {
  Scores pooled;
  std::vector<SequenceScores> per_sequence;
  /// Unweighted mean over sequences of the defined per-sequence values.
  Scores sequence_mean;
};

/// Scores over a pooled frame list. Throws on length mismatch or n < 2.
/// CORR/ICC are left undefined when the truth is constant.
Scores evaluate(const std::vector<int>& pred, const std::vector<int>& truth);

/// Pooled and per-sequence scores.
Report evaluate_sequences(const std::vector<std::string>& ids,
                          const std::vector<std::vector<int>>& pred,
                          const std::vector<std::vector<int>>& truth);

nlohmann::json to_json(const Report& r);

/// Aligned plain-text table: Method | CORR | MAE | ICC.
std::string format_table(const std::vector<std::pair<std::string, Scores>>& rows);

}  // namespace midorf::metrics
