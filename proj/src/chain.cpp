#include "midorf/chain.hpp"

#include <algorithm>
#include <cmath>

namespace midorf::chain {

namespace {

/// Finite transitions of one edge table, grouped by target (incoming) and by
/// source (outgoing). Sources/targets are listed in increasing index order.
struct Adjacency {
  std::vector<int> in_begin;
  std::vector<int> in_from;
  std::vector<double> in_value;
  std::vector<int> out_begin;
  std::vector<int> out_to;
  std::vector<double> out_value;

  explicit Adjacency(const RowMatrix& e) {
    const int S = static_cast<int>(e.rows());
    in_begin.assign(S + 1, 0);
    out_begin.assign(S + 1, 0);
    for (int to = 0; to < S; ++to) {
      for (int from = 0; from < S; ++from) {
        if (e(from, to) == kNegInf) continue;
        in_from.push_back(from);
        in_value.push_back(e(from, to));
      }
      in_begin[to + 1] = static_cast<int>(in_from.size());
    }
    for (int from = 0; from < S; ++from) {
      for (int to = 0; to < S; ++to) {
        if (e(from, to) == kNegInf) continue;
        out_to.push_back(to);
        out_value.push_back(e(from, to));
      }
      out_begin[from + 1] = static_cast<int>(out_to.size());
    }
  }
};

std::vector<Adjacency> build_adjacency(const AugmentedLattice& lat) {
  std::vector<Adjacency> adj;
  adj.reserve(lat.edges.size());
  for (const auto& e : lat.edges) adj.emplace_back(e);
  return adj;
}

const Adjacency& step(const std::vector<Adjacency>& adj, int t) {
  return adj.size() == 1 ? adj.front() : adj[t];
}

/// Forward messages; alpha(t, s) includes node(t, s).
RowMatrix forward(const AugmentedLattice& lat, const std::vector<Adjacency>& adj) {
  const int T = lat.T;
  const int S = lat.S;
  RowMatrix alpha(T, S);
  alpha.row(0) = lat.node.row(0);
  for (int t = 1; t < T; ++t) {
    const Adjacency& a = step(adj, t - 1);
    const double* prev = alpha.row(t - 1).data();
    for (int s = 0; s < S; ++s) {
      const double node = lat.node(t, s);
      if (node == kNegInf) {
        alpha(t, s) = kNegInf;
        continue;
      }
      double m = kNegInf;
      for (int k = a.in_begin[s]; k < a.in_begin[s + 1]; ++k)
        m = std::max(m, prev[a.in_from[k]] + a.in_value[k]);
      if (m == kNegInf) {
        alpha(t, s) = kNegInf;
        continue;
      }
      double sum = 0.0;
      for (int k = a.in_begin[s]; k < a.in_begin[s + 1]; ++k) {
        const double v = prev[a.in_from[k]];
        if (v != kNegInf) sum += std::exp(v + a.in_value[k] - m);
      }
      alpha(t, s) = node + m + std::log(sum);
    }
  }
  return alpha;
}

double log_sum_row(const double* v, int n) {
  double m = kNegInf;
  for (int i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (m == kNegInf) return kNegInf;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    if (v[i] != kNegInf) sum += std::exp(v[i] - m);
  return m + std::log(sum);
}

}  // namespace

void AugmentedLattice::check_shape() const {
  if (T < 1 || S < 1) throw Error("lattice: T and S must be positive");
  if (node.rows() != T || node.cols() != S) throw Error("lattice: node table shape mismatch");
  if (T > 1) {
    if (edges.size() != 1 && static_cast<int>(edges.size()) != T - 1)
      throw Error("lattice: need one shared edge table or T-1 tables");
    for (const auto& e : edges)
      if (e.rows() != S || e.cols() != S) throw Error("lattice: edge table shape mismatch");
  }
}

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_partition(const AugmentedLattice& lat) {
  lat.check_shape();
  const auto adj = build_adjacency(lat);
  const RowMatrix alpha = forward(lat, adj);
  return log_sum_row(alpha.row(lat.T - 1).data(), lat.S);
}

ChainPosteriors forward_backward(const AugmentedLattice& lat, const Options& options) {
  lat.check_shape();
  const int T = lat.T;
  const int S = lat.S;
  ChainPosteriors post;
  post.unary = RowMatrix::Zero(T, S);
  post.pairwise_sum = RowMatrix::Zero(S, S);
  if (options.per_step_pairwise) post.pairwise.assign(std::max(T - 1, 0), RowMatrix::Zero(S, S));

  const auto adj = build_adjacency(lat);
  const RowMatrix alpha = forward(lat, adj);
  post.log_Z = log_sum_row(alpha.row(T - 1).data(), S);
  if (post.log_Z == kNegInf) return post;
  const double log_Z = post.log_Z;

  // beta(t, s): log mass of completions after step t, excluding node(t, s).
  RowMatrix beta(T, S);
  beta.row(T - 1).setZero();
  for (int t = T - 2; t >= 0; --t) {
    const Adjacency& a = step(adj, t);
    for (int s = 0; s < S; ++s) {
      if (alpha(t, s) == kNegInf) {
        beta(t, s) = kNegInf;
        continue;
      }
      double m = kNegInf;
      for (int k = a.out_begin[s]; k < a.out_begin[s + 1]; ++k) {
        const int to = a.out_to[k];
        m = std::max(m, a.out_value[k] + lat.node(t + 1, to) + beta(t + 1, to));
      }
      if (m == kNegInf) {
        beta(t, s) = kNegInf;
        continue;
      }
      double sum = 0.0;
      for (int k = a.out_begin[s]; k < a.out_begin[s + 1]; ++k) {
        const int to = a.out_to[k];
        const double v = a.out_value[k] + lat.node(t + 1, to) + beta(t + 1, to);
        if (v != kNegInf) sum += std::exp(v - m);
      }
      beta(t, s) = m + std::log(sum);
    }
  }

  for (int t = 0; t < T; ++t)
    for (int s = 0; s < S; ++s) {
      const double v = alpha(t, s) + beta(t, s);
      post.unary(t, s) = v == kNegInf ? 0.0 : std::exp(v - log_Z);
    }

  for (int t = 0; t + 1 < T; ++t) {
    const Adjacency& a = step(adj, t);
    for (int s = 0; s < S; ++s) {
      const double left = alpha(t, s);
      if (left == kNegInf) continue;
      for (int k = a.out_begin[s]; k < a.out_begin[s + 1]; ++k) {
        const int to = a.out_to[k];
        const double v = left + a.out_value[k] + lat.node(t + 1, to) + beta(t + 1, to);
        if (v == kNegInf) continue;
        const double p = std::exp(v - log_Z);
        post.pairwise_sum(s, to) += p;
        if (options.per_step_pairwise) post.pairwise[t](s, to) = p;
      }
    }
  }
  return post;
}

ViterbiPath viterbi(const AugmentedLattice& lat) {
  lat.check_shape();
  const int T = lat.T;
  const int S = lat.S;
  const auto adj = build_adjacency(lat);
  RowMatrix delta(T, S);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> back(T, S);
  back.setConstant(-1);
  delta.row(0) = lat.node.row(0);
  for (int t = 1; t < T; ++t) {
    const Adjacency& a = step(adj, t - 1);
    for (int s = 0; s < S; ++s) {
      double best = kNegInf;
      int arg = -1;
      // in_from is increasing, so strict > keeps the lowest index on ties
      for (int k = a.in_begin[s]; k < a.in_begin[s + 1]; ++k) {
        const double v = delta(t - 1, a.in_from[k]) + a.in_value[k];
        if (v > best) {
          best = v;
          arg = a.in_from[k];
        }
      }
      back(t, s) = arg;
      delta(t, s) = arg < 0 ? kNegInf : lat.node(t, s) + best;
    }
  }
  int last = -1;
  double best = kNegInf;
  for (int s = 0; s < S; ++s)
    if (delta(T - 1, s) > best) {
      best = delta(T - 1, s);
      last = s;
    }
  if (last < 0) throw InfeasibleError("", "viterbi: lattice has no feasible path");

  ViterbiPath out;
  out.states.assign(T, 0);
  out.states[T - 1] = last;
  for (int t = T - 1; t > 0; --t) out.states[t - 1] = back(t, out.states[t]);
  out.score = path_score(lat, out.states);
  return out;
}

double path_score(const AugmentedLattice& lat, const std::vector<int>& states) {
  double score = lat.node(0, states[0]);
  for (int t = 1; t < lat.T; ++t) {
    score = lat.edge(t - 1)(states[t - 1], states[t]) + score;
    score = lat.node(t, states[t]) + score;
  }
  return score;
}

}  // namespace midorf::chain
