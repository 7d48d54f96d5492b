#pragma once

#include <vector>

#include "midorf/chain.hpp"
#include "midorf/core.hpp"
#include "midorf/potentials.hpp"

// Pieces shared by the max, relative and plain-chain models. All augmented
// lattices index joint states as s = aux * L + (level - 1).
namespace midorf {

inline int joint_state(int level, int aux, int L) { return aux * L + level - 1; }
inline int level_of(int state, int L) { return state % L + 1; }
inline int aux_of(int state, int L) { return state / L; }

/// Posteriors with the auxiliary component summed out.
struct LevelMarginals {
  RowMatrix unary;     // T x L
  RowMatrix pair_sum;  // L x L, summed over t
};

LevelMarginals collapse_levels(const chain::ChainPosteriors& post, int L);

/// Everything the gradient needs for one bag: the log-likelihood, the
/// posteriors of the lattice clamped to the observed label (and evidence),
/// and the posteriors of every candidate label's lattice with their mixture
/// weights P(y' | X).
struct BagLikelihood {
  double loglik = 0.0;
  chain::ChainPosteriors clamped;
  std::vector<chain::ChainPosteriors> free;
  Eigen::VectorXd free_weights;
};

/// Plain L-state chain with node and f(W) edge potentials; annotated frames
/// (if any) are hard evidence.
chain::AugmentedLattice build_plain_lattice(const potentials::NodeTable& nodes,
                                            const RowMatrix& edge_f,
                                            const Annotations& evidence = {});

chain::AugmentedLattice build_plain_lattice(const Sequence& seq, const ModelParams& params,
                                            const Annotations& evidence = {});

/// Normalizes a vector of log-weights into probabilities. Throws Error when
/// every entry is -inf.
Eigen::VectorXd normalize_log_weights(const Eigen::VectorXd& log_weights);

/// Per-frame argmax of a T x L posterior, ties to the lower level.
std::vector<int> argmax_levels(const RowMatrix& posterior);

}  // namespace midorf
