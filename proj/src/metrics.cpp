#include "midorf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "midorf/core.hpp"

namespace midorf::metrics {

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool constant(const std::vector<int>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

std::vector<double> as_double(const std::vector<int>& v) { return {v.begin(), v.end()}; }

Scores score(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) throw Error("evaluate: prediction/truth length mismatch");
  if (pred.empty()) throw Error("evaluate: no frames");
  const auto p = as_double(pred);
  const auto t = as_double(truth);
  Scores s;
  s.n = pred.size();
  s.mae = mean_absolute_error(p, t);
  if (s.n > 1 && !constant(truth)) {
    s.corr = pearson(p, t);
    s.icc = icc_3_1(p, t);
  }
  return s;
}

}  // namespace

std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double mean_absolute_error(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

std::optional<double> icc_3_1(const std::vector<double>& pred, const std::vector<double>& truth) {
  const auto n = static_cast<double>(pred.size());
  constexpr double k = 2.0;
  if (pred.size() < 2) return std::nullopt;
  const double grand = (mean(pred) + mean(truth)) / k;
  const double col_pred = mean(pred);
  const double col_truth = mean(truth);
  double ss_rows = 0.0;
  double ss_total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double row_mean = (pred[i] + truth[i]) / k;
    ss_rows += k * (row_mean - grand) * (row_mean - grand);
    ss_total += (pred[i] - grand) * (pred[i] - grand) + (truth[i] - grand) * (truth[i] - grand);
  }
  const double ss_cols =
      n * ((col_pred - grand) * (col_pred - grand) + (col_truth - grand) * (col_truth - grand));
  const double ss_error = std::max(ss_total - ss_rows - ss_cols, 0.0);
  const double ms_rows = ss_rows / (n - 1.0);
  const double ms_error = ss_error / ((n - 1.0) * (k - 1.0));
  const double denom = ms_rows + (k - 1.0) * ms_error;
  if (denom == 0.0) return std::nullopt;
  return (ms_rows - ms_error) / denom;
}

Scores evaluate(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) throw Error("evaluate: prediction/truth length mismatch");
  if (pred.size() < 2) throw Error("evaluate: need at least two frames");
  return score(pred, truth);
}

Report evaluate_sequences(const std::vector<std::string>& ids,
                          const std::vector<std::vector<int>>& pred,
                          const std::vector<std::vector<int>>& truth) {
  if (pred.size() != truth.size() || ids.size() != pred.size())
    throw Error("evaluate: sequence count mismatch");
  Report r;
  std::vector<int> all_pred;
  std::vector<int> all_truth;
  double corr_sum = 0.0, icc_sum = 0.0, mae_sum = 0.0;
  std::size_t corr_n = 0, icc_n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].size() != truth[i].size())
      throw Error("evaluate: length mismatch for sequence '" + ids[i] + "'");
    all_pred.insert(all_pred.end(), pred[i].begin(), pred[i].end());
    all_truth.insert(all_truth.end(), truth[i].begin(), truth[i].end());
    auto s = score(pred[i], truth[i]);
    mae_sum += s.mae;
    if (s.corr) corr_sum += *s.corr, ++corr_n;
    if (s.icc) icc_sum += *s.icc, ++icc_n;
    r.per_sequence.push_back({ids[i], s});
  }
  r.pooled = evaluate(all_pred, all_truth);
  r.sequence_mean.n = pred.size();
  r.sequence_mean.mae = mae_sum / static_cast<double>(pred.size());
  if (corr_n) r.sequence_mean.corr = corr_sum / static_cast<double>(corr_n);
  if (icc_n) r.sequence_mean.icc = icc_sum / static_cast<double>(icc_n);
  return r;
}

namespace {

nlohmann::json scores_json(const Scores& s) {
  nlohmann::json j;
  j["corr"] = s.corr ? nlohmann::json(*s.corr) : nlohmann::json(nullptr);
  j["mae"] = s.mae;
  j["icc"] = s.icc ? nlohmann::json(*s.icc) : nlohmann::json(nullptr);
  j["n"] = s.n;
  return j;
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << *v;
  return os.str();
}

}  // namespace

nlohmann::json to_json(const Report& r) {
  nlohmann::json j;
  j["icc_variant"] = "ICC(3,1) consistency";
  j["pooled"] = scores_json(r.pooled);
  j["sequence_mean"] = scores_json(r.sequence_mean);
  nlohmann::json seqs = nlohmann::json::array();
  for (const auto& s : r.per_sequence) {
    auto e = scores_json(s.scores);
    e["id"] = s.id;
    seqs.push_back(std::move(e));
  }
  j["per_sequence"] = std::move(seqs);
  return j;
}

std::string format_table(const std::vector<std::pair<std::string, Scores>>& rows) {
  std::size_t width = 6;
  for (const auto& [name, _] : rows) width = std::max(width, name.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "Method" << " | "
     << std::setw(6) << "CORR" << " | " << std::setw(6) << "MAE" << " | " << "ICC" << "\n";
  os << std::string(width, '-') << "-+--------+--------+-------\n";
  for (const auto& [name, s] : rows)
    os << std::left << std::setw(static_cast<int>(width)) << name << " | " << std::setw(6)
       << cell(s.corr) << " | " << std::setw(6) << cell(s.mae) << " | " << cell(s.icc) << "\n";
  return os.str();
}

}  // namespace midorf::metrics
