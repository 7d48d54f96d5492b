#include "midorf/potentials.hpp"

#include <algorithm>
#include <cmath>

namespace midorf::potentials {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

struct ProbitTerm {
  double logp;
  double d_projection;
  double d_upper;
  double d_lower;
};

ProbitTerm probit_term(double projection, const ModelParams& params, int level, double log_floor,
                       bool derivatives) {
  const double lo = params.cut(level - 1) - projection;
  const double hi = params.cut(level) - projection;
  const double p = probit_interval(lo, hi);
  if (!(p > std::exp(log_floor))) return {log_floor, 0.0, 0.0, 0.0};
  ProbitTerm term{std::log(p), 0.0, 0.0, 0.0};
  if (derivatives) {
    const double pdf_lo = normal_pdf(lo);
    const double pdf_hi = normal_pdf(hi);
    term.d_projection = (pdf_lo - pdf_hi) / p;
    term.d_upper = pdf_hi / p;
    term.d_lower = -pdf_lo / p;
  }
  return term;
}

}  // namespace

double probit_interval(double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  if (lo >= 0.0) return 0.5 * (std::erfc(lo * kInvSqrt2) - std::erfc(hi * kInvSqrt2));
  if (hi <= 0.0) return 0.5 * (std::erfc(-hi * kInvSqrt2) - std::erfc(-lo * kInvSqrt2));
  return 1.0 - 0.5 * std::erfc(-lo * kInvSqrt2) - 0.5 * std::erfc(hi * kInvSqrt2);
}

double normal_pdf(double z) {
  if (std::isinf(z)) return 0.0;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double node_log_potential(double projection, const ModelParams& params, int level,
                          double log_floor) {
  return probit_term(projection, params, level, log_floor, false).logp;
}

double node_log_potential(const Eigen::Ref<const Eigen::VectorXd>& x, const ModelParams& params,
                          int level, double log_floor) {
  return node_log_potential(params.beta.dot(x), params, level, log_floor);
}

double edge_f(double s) {
  if (s >= 0.0) return -std::log1p(std::exp(-s));
  return s - std::log1p(std::exp(s));
}

double edge_f_derivative(double s) {
  if (s >= 0.0) {
    const double e = std::exp(-s);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(s));
}

double edge_log_potential(const ModelParams& params, int from, int to) {
  return edge_f(params.W(from - 1, to - 1));
}

double mil_max_potential(const std::vector<int>& h, int y, double w) {
  if (h.empty() || *std::max_element(h.begin(), h.end()) != y) return kNegInf;
  return w * static_cast<double>(std::count(h.begin(), h.end(), y));
}

double mil_rel_potential(const std::vector<int>& h, RelLabel y) {
  return trend_of(h) == y ? 0.0 : kNegInf;
}

NodeTable node_table(const Sequence& seq, const ModelParams& params, bool with_derivatives,
                     double log_floor) {
  const int T = seq.length();
  const int L = params.levels();
  NodeTable table;
  table.logpot.resize(T, L);
  if (with_derivatives) {
    table.d_projection.resize(T, L);
    table.d_upper.resize(T, L);
    table.d_lower.resize(T, L);
  }
  const Eigen::VectorXd projection = seq.features * params.beta;
  for (int t = 0; t < T; ++t) {
    for (int l = 1; l <= L; ++l) {
      const auto term = probit_term(projection(t), params, l, log_floor, with_derivatives);
      table.logpot(t, l - 1) = term.logp;
      if (with_derivatives) {
        table.d_projection(t, l - 1) = term.d_projection;
        table.d_upper(t, l - 1) = term.d_upper;
        table.d_lower(t, l - 1) = term.d_lower;
      }
    }
  }
  return table;
}

RowMatrix edge_table(const ModelParams& params) {
  const int L = params.levels();
  RowMatrix f(L, L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) f(i, j) = edge_f(params.W(i, j));
  return f;
}

}  // namespace midorf::potentials
