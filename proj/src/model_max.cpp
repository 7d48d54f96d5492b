#include "midorf/model_max.hpp"

namespace midorf::max_model {

chain::AugmentedLattice build_lattice(const potentials::NodeTable& nodes, const RowMatrix& edge_f,
                                      int y, double w, const Annotations& evidence) {
  const int T = nodes.length();
  const int L = nodes.levels();
  if (y < 1 || y > L) throw Error("max lattice: label out of range");
  const int S = kAuxStates * L;

  chain::AugmentedLattice lat;
  lat.T = T;
  lat.S = S;
  lat.node = RowMatrix::Constant(T, S, kNegInf);
  for (int t = 0; t < T; ++t) {
    for (int zeta = 0; zeta < kAuxStates; ++zeta) {
      for (int l = 1; l <= y; ++l) {
        if (!evidence.empty() && evidence[t] && *evidence[t] != l) continue;
        if (t == 0 && zeta == 0 && !(l < y)) continue;
        if (t == 0 && zeta == 1 && l != y) continue;
        if (t == T - 1 && zeta != 1) continue;
        lat.node(t, joint_state(l, zeta, L)) = nodes.logpot(t, l - 1) + (l == y ? w : 0.0);
      }
    }
  }

  RowMatrix edge = RowMatrix::Constant(S, S, kNegInf);
  for (int l = 1; l <= y; ++l) {
    for (int next = 1; next <= y; ++next) {
      const double f = edge_f(l - 1, next - 1);
      if (next != y) edge(joint_state(l, 0, L), joint_state(next, 0, L)) = f;
      if (next == y) edge(joint_state(l, 0, L), joint_state(next, 1, L)) = f;
      edge(joint_state(l, 1, L), joint_state(next, 1, L)) = f;
    }
  }
  lat.edges.push_back(std::move(edge));
  return lat;
}

chain::AugmentedLattice build_lattice(const Sequence& seq, int y, const ModelParams& params,
                                      const Annotations& evidence) {
  return build_lattice(potentials::node_table(seq, params), potentials::edge_table(params), y,
                       params.w, evidence);
}

Eigen::VectorXd label_log_partitions(const Sequence& seq, const ModelParams& params,
                                     const Annotations& evidence) {
  const auto nodes = potentials::node_table(seq, params);
  const auto edge_f = potentials::edge_table(params);
  const int L = params.levels();
  Eigen::VectorXd log_z(L);
  for (int y = 1; y <= L; ++y)
    log_z(y - 1) = chain::log_partition(build_lattice(nodes, edge_f, y, params.w, evidence));
  return log_z;
}

Eigen::VectorXd bag_posterior(const Sequence& seq, const ModelParams& params,
                              const Annotations& evidence) {
  return normalize_log_weights(label_log_partitions(seq, params, evidence));
}

std::vector<int> clamped_viterbi(const Sequence& seq, int y, const ModelParams& params) {
  const int L = params.levels();
  const auto path = chain::viterbi(build_lattice(seq, y, params));
  std::vector<int> levels(path.states.size());
  for (std::size_t t = 0; t < levels.size(); ++t) levels[t] = level_of(path.states[t], L);
  return levels;
}

FramePrediction predict_frames(const Sequence& seq, const ModelParams& params, DecodeMode mode) {
  const auto nodes = potentials::node_table(seq, params);
  const auto edge_f = potentials::edge_table(params);
  const int L = params.levels();
  const int T = seq.length();

  FramePrediction out;
  out.posterior = RowMatrix::Zero(T, L);
  std::vector<chain::ChainPosteriors> per_label;
  Eigen::VectorXd log_z(L);
  for (int y = 1; y <= L; ++y) {
    per_label.push_back(chain::forward_backward(build_lattice(nodes, edge_f, y, params.w),
                                                {.per_step_pairwise = false}));
    log_z(y - 1) = per_label.back().log_Z;
  }
  const Eigen::VectorXd p_y = normalize_log_weights(log_z);
  for (int y = 1; y <= L; ++y)
    if (p_y(y - 1) > 0.0) out.posterior += p_y(y - 1) * collapse_levels(per_label[y - 1], L).unary;

  if (mode == DecodeMode::Marginal) {
    out.levels = argmax_levels(out.posterior);
    return out;
  }
  double best = kNegInf;
  for (int y = 1; y <= L; ++y) {
    if (log_z(y - 1) == kNegInf) continue;
    const auto path = chain::viterbi(build_lattice(nodes, edge_f, y, params.w));
    if (path.score > best) {
      best = path.score;
      out.levels.resize(T);
      for (int t = 0; t < T; ++t) out.levels[t] = level_of(path.states[t], L);
    }
  }
  return out;
}

BagLikelihood loglik_and_marginals(const Bag& bag, const potentials::NodeTable& nodes,
                                   const RowMatrix& edge_f, double w,
                                   const chain::Options& options) {
  const int L = nodes.levels();
  const int y = bag.max_label();
  BagLikelihood out;
  Eigen::VectorXd log_z(L);
  for (int label = 1; label <= L; ++label) {
    out.free.push_back(chain::forward_backward(build_lattice(nodes, edge_f, label, w), options));
    log_z(label - 1) = out.free.back().log_Z;
  }
  if (has_annotations(bag.observed))
    out.clamped = chain::forward_backward(build_lattice(nodes, edge_f, y, w, bag.observed), options);
  else
    out.clamped = out.free[y - 1];
  if (!out.clamped.feasible())
    throw InfeasibleError(bag.sequence.id,
                          "bag '" + bag.sequence.id + "': clamped lattice is infeasible");
  out.free_weights = normalize_log_weights(log_z);
  const double m = log_z.maxCoeff();
  out.loglik = out.clamped.log_Z - (m + std::log((log_z.array() - m).exp().sum()));
  return out;
}

BagLikelihood loglik_and_marginals(const Bag& bag, const ModelParams& params) {
  return loglik_and_marginals(bag, potentials::node_table(bag.sequence, params),
                              potentials::edge_table(params), params.w);
}

}  // namespace midorf::max_model
