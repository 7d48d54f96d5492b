#pragma once

#include <vector>

#include "midorf/core.hpp"

// Log-domain potentials. A bag's probability is proportional to exp of the
// summed potentials, so every potential is <= 0 except the MIL reward term,
// and -inf marks a structurally impossible configuration.
namespace midorf::potentials {

/// Log-probabilities below this are clamped so that observations far outside
/// every cut-point bin stay finite.
inline constexpr double kDefaultLogFloor = -700.0;

/// Phi(hi) - Phi(lo) for lo <= hi, evaluated on whichever tail keeps the
/// subtraction away from cancellation. Accepts infinite end points.
double probit_interval(double lo, double hi);

/// Standard normal density; zero at +-inf.
double normal_pdf(double z);

/// log P(level | projection) under the ordered probit with unit noise.
double node_log_potential(double projection, const ModelParams& params, int level,
                          double log_floor = kDefaultLogFloor);

double node_log_potential(const Eigen::Ref<const Eigen::VectorXd>& x, const ModelParams& params,
                          int level, double log_floor = kDefaultLogFloor);

/// f(s) = -log(1 + exp(-s)).
double edge_f(double s);
/// f'(s) = 1 / (1 + exp(s)).
double edge_f_derivative(double s);

double edge_log_potential(const ModelParams& params, int from, int to);

/// w * #{t : h_t = y} when max(h) = y, -inf otherwise.
double mil_max_potential(const std::vector<int>& h, int y, double w);

/// 0 when the trend of h is exactly y, -inf otherwise.
double mil_rel_potential(const std::vector<int>& h, RelLabel y);

/// Node potentials of a whole sequence, T x L (column l-1 holds level l).
/// The derivative tables are filled only on request; entries whose
/// probability hit the floor have zero derivatives.
struct NodeTable {
  RowMatrix logpot;
  RowMatrix d_projection;  // d logpot / d(beta^T x)
  RowMatrix d_upper;       // d logpot / d b_l
  RowMatrix d_lower;       // d logpot / d b_{l-1}

  int length() const { return static_cast<int>(logpot.rows()); }
  int levels() const { return static_cast<int>(logpot.cols()); }
};

NodeTable node_table(const Sequence& seq, const ModelParams& params, bool with_derivatives = false,
                     double log_floor = kDefaultLogFloor);

/// L x L table of f(W).
RowMatrix edge_table(const ModelParams& params);

}  // namespace midorf::potentials
