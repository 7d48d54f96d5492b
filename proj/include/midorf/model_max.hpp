#pragma once

#include "midorf/bag_model.hpp"

// Max-assumption model: the bag label is the largest frame level. The
// high-order MIL potential is folded into a chain over (level, zeta) pairs
// where zeta = 1 once the prefix has reached level y; 2L joint states.
namespace midorf::max_model {

inline constexpr int kAuxStates = 2;

/// Augmented lattice for candidate label y. Frames whose level contradicts
/// an annotation are set to -inf.
chain::AugmentedLattice build_lattice(const potentials::NodeTable& nodes, const RowMatrix& edge_f,
                                      int y, double w, const Annotations& evidence = {});

chain::AugmentedLattice build_lattice(const Sequence& seq, int y, const ModelParams& params,
                                      const Annotations& evidence = {});

/// log Z_y for y = 1..L (index y-1).
Eigen::VectorXd label_log_partitions(const Sequence& seq, const ModelParams& params,
                                     const Annotations& evidence = {});

/// P(y | X) for y = 1..L (index y-1), conditioned on the evidence if given.
/// Throws Error when every label is infeasible.
Eigen::VectorXd bag_posterior(const Sequence& seq, const ModelParams& params,
                              const Annotations& evidence = {});

FramePrediction predict_frames(const Sequence& seq, const ModelParams& params, DecodeMode mode);

/// Viterbi path of the lattice clamped to y, as levels.
std::vector<int> clamped_viterbi(const Sequence& seq, int y, const ModelParams& params);

/// log P(y, annotations | X) and the posteriors needed for its gradient.
/// Throws InfeasibleError naming the bag when the clamped lattice is empty.
BagLikelihood loglik_and_marginals(const Bag& bag, const ModelParams& params);

BagLikelihood loglik_and_marginals(const Bag& bag, const potentials::NodeTable& nodes,
                                   const RowMatrix& edge_f, double w,
                                   const chain::Options& options = {});

}  // namespace midorf::max_model
