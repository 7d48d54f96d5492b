#include "midorf/model_rel.hpp"

namespace midorf::rel_model {

bool trend_step_allowed(RelLabel from, RelLabel to, int level, int next_level) {
  using enum RelLabel;
  switch (from) {
    case None:
      return (to == None && level == next_level) || (to == Inc && level < next_level) ||
             (to == Dec && level > next_level);
    case Inc:
      return (to == Inc && level <= next_level) || (to == Both && level > next_level);
    case Dec:
      return (to == Dec && level >= next_level) || (to == Both && level < next_level);
    case Both:
      return to == Both;
  }
  return false;
}

namespace {

RowMatrix trend_edges(const RowMatrix& edge_f) {
  const int L = static_cast<int>(edge_f.rows());
  const int S = kAuxStates * L;
  RowMatrix edge = RowMatrix::Constant(S, S, kNegInf);
  for (RelLabel from : kRelLabels)
    for (RelLabel to : kRelLabels)
      for (int l = 1; l <= L; ++l)
        for (int next = 1; next <= L; ++next)
          if (trend_step_allowed(from, to, l, next))
            edge(joint_state(l, static_cast<int>(from), L),
                 joint_state(next, static_cast<int>(to), L)) = edge_f(l - 1, next - 1);
  return edge;
}

chain::AugmentedLattice build_with_edges(const potentials::NodeTable& nodes, RowMatrix edges,
                                         RelLabel y, const Annotations& evidence) {
  const int T = nodes.length();
  const int L = nodes.levels();
  chain::AugmentedLattice lat;
  lat.T = T;
  lat.S = kAuxStates * L;
  lat.node = RowMatrix::Constant(T, lat.S, kNegInf);
  for (int t = 0; t < T; ++t)
    for (RelLabel zeta : kRelLabels) {
      if (t == 0 && zeta != RelLabel::None) continue;
      if (t == T - 1 && zeta != y) continue;
      for (int l = 1; l <= L; ++l) {
        if (!evidence.empty() && evidence[t] && *evidence[t] != l) continue;
        lat.node(t, joint_state(l, static_cast<int>(zeta), L)) = nodes.logpot(t, l - 1);
      }
    }
  lat.edges.push_back(std::move(edges));
  return lat;
}

}  // namespace

chain::AugmentedLattice build_lattice(const potentials::NodeTable& nodes, const RowMatrix& edge_f,
                                      RelLabel y, const Annotations& evidence) {
  return build_with_edges(nodes, trend_edges(edge_f), y, evidence);
}

chain::AugmentedLattice build_lattice(const Sequence& seq, RelLabel y, const ModelParams& params,
                                      const Annotations& evidence) {
  return build_lattice(potentials::node_table(seq, params), potentials::edge_table(params), y,
                       evidence);
}

Eigen::VectorXd label_log_partitions(const Sequence& seq, const ModelParams& params,
                                     const Annotations& evidence) {
  const auto nodes = potentials::node_table(seq, params);
  const RowMatrix edges = trend_edges(potentials::edge_table(params));
  Eigen::VectorXd log_z(kNumRelLabels);
  for (RelLabel y : kRelLabels)
    log_z(static_cast<int>(y)) = chain::log_partition(build_with_edges(nodes, edges, y, evidence));
  return log_z;
}

Eigen::VectorXd bag_posterior(const Sequence& seq, const ModelParams& params,
                              const Annotations& evidence) {
  return normalize_log_weights(label_log_partitions(seq, params, evidence));
}

std::vector<int> clamped_viterbi(const Sequence& seq, RelLabel y, const ModelParams& params) {
  const int L = params.levels();
  const auto path = chain::viterbi(build_lattice(seq, y, params));
  std::vector<int> levels(path.states.size());
  for (std::size_t t = 0; t < levels.size(); ++t) levels[t] = level_of(path.states[t], L);
  return levels;
}

FramePrediction predict_frames(const Sequence& seq, const ModelParams& params, DecodeMode mode) {
  const auto nodes = potentials::node_table(seq, params);
  const RowMatrix edges = trend_edges(potentials::edge_table(params));
  const int L = params.levels();
  const int T = seq.length();

  FramePrediction out;
  out.posterior = RowMatrix::Zero(T, L);
  std::vector<chain::ChainPosteriors> per_label;
  Eigen::VectorXd log_z(kNumRelLabels);
  for (RelLabel y : kRelLabels) {
    per_label.push_back(chain::forward_backward(build_with_edges(nodes, edges, y, {}),
                                                {.per_step_pairwise = false}));
    log_z(static_cast<int>(y)) = per_label.back().log_Z;
  }
  const Eigen::VectorXd p_y = normalize_log_weights(log_z);
  for (int k = 0; k < kNumRelLabels; ++k)
    if (p_y(k) > 0.0) out.posterior += p_y(k) * collapse_levels(per_label[k], L).unary;

  if (mode == DecodeMode::Marginal) {
    out.levels = argmax_levels(out.posterior);
    return out;
  }
  double best = kNegInf;
  for (RelLabel y : kRelLabels) {
    if (log_z(static_cast<int>(y)) == kNegInf) continue;
    const auto path = chain::viterbi(build_with_edges(nodes, edges, y, {}));
    if (path.score > best) {
      best = path.score;
      out.levels.resize(T);
      for (int t = 0; t < T; ++t) out.levels[t] = level_of(path.states[t], L);
    }
  }
  return out;
}

BagLikelihood loglik_and_marginals(const Bag& bag, const potentials::NodeTable& nodes,
                                   const RowMatrix& edge_f, const chain::Options& options) {
  const RelLabel y = bag.rel_label();
  const RowMatrix edges = trend_edges(edge_f);
  BagLikelihood out;
  Eigen::VectorXd log_z(kNumRelLabels);
  for (RelLabel label : kRelLabels) {
    out.free.push_back(chain::forward_backward(build_with_edges(nodes, edges, label, {}), options));
    log_z(static_cast<int>(label)) = out.free.back().log_Z;
  }
  if (has_annotations(bag.observed))
    out.clamped =
        chain::forward_backward(build_with_edges(nodes, edges, y, bag.observed), options);
  else
    out.clamped = out.free[static_cast<int>(y)];
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
                              potentials::edge_table(params));
}

}  // namespace midorf::rel_model
