#include "midorf/bag_model.hpp"

#include <cmath>

namespace midorf {

LevelMarginals collapse_levels(const chain::ChainPosteriors& post, int L) {
  const auto T = post.unary.rows();
  const auto S = static_cast<int>(post.unary.cols());
  LevelMarginals m;
  m.unary = RowMatrix::Zero(T, L);
  m.pair_sum = RowMatrix::Zero(L, L);
  for (Eigen::Index t = 0; t < T; ++t)
    for (int s = 0; s < S; ++s) m.unary(t, s % L) += post.unary(t, s);
  for (int s = 0; s < S; ++s)
    for (int r = 0; r < S; ++r) {
      const double p = post.pairwise_sum(s, r);
      if (p != 0.0) m.pair_sum(s % L, r % L) += p;
    }
  return m;
}

chain::AugmentedLattice build_plain_lattice(const potentials::NodeTable& nodes,
                                            const RowMatrix& edge_f,
                                            const Annotations& evidence) {
  chain::AugmentedLattice lat;
  lat.T = nodes.length();
  lat.S = nodes.levels();
  lat.node = nodes.logpot;
  if (!evidence.empty())
    for (int t = 0; t < lat.T; ++t)
      if (evidence[t])
        for (int l = 1; l <= lat.S; ++l)
          if (l != *evidence[t]) lat.node(t, l - 1) = kNegInf;
  lat.edges.push_back(edge_f);
  return lat;
}

chain::AugmentedLattice build_plain_lattice(const Sequence& seq, const ModelParams& params,
                                            const Annotations& evidence) {
  return build_plain_lattice(potentials::node_table(seq, params), potentials::edge_table(params),
                             evidence);
}

Eigen::VectorXd normalize_log_weights(const Eigen::VectorXd& log_weights) {
  const double m = log_weights.maxCoeff();
  if (m == kNegInf) throw Error("all candidate labels are infeasible");
  Eigen::VectorXd p(log_weights.size());
  for (Eigen::Index i = 0; i < p.size(); ++i)
    p(i) = log_weights(i) == kNegInf ? 0.0 : std::exp(log_weights(i) - m);
  return p / p.sum();
}

std::vector<int> argmax_levels(const RowMatrix& posterior) {
  std::vector<int> levels(posterior.rows());
  for (Eigen::Index t = 0; t < posterior.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index l = 1; l < posterior.cols(); ++l)
      if (posterior(t, l) > posterior(t, best)) best = l;
    levels[t] = static_cast<int>(best) + 1;
  }
  return levels;
}

}  // namespace midorf
