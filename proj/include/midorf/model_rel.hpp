#pragma once

#include "midorf/bag_model.hpp"

// Relative-assumption model: the bag label is the trend of the frame levels.
// The chain runs over (level, zeta) pairs where zeta is the trend label of the
// prefix; 4L joint states. There is no MIL reward weight.
namespace midorf::rel_model {

inline constexpr int kAuxStates = kNumRelLabels;

/// Trend-state transition table shared by every label's lattice: whether
/// the prefix trend `from` may become `to` on a step between the two levels.
bool trend_step_allowed(RelLabel from, RelLabel to, int level, int next_level);

chain::AugmentedLattice build_lattice(const potentials::NodeTable& nodes, const RowMatrix& edge_f,
                                      RelLabel y, const Annotations& evidence = {});

chain::AugmentedLattice build_lattice(const Sequence& seq, RelLabel y, const ModelParams& params,
                                      const Annotations& evidence = {});

/// log Z_y indexed by RelLabel value.
Eigen::VectorXd label_log_partitions(const Sequence& seq, const ModelParams& params,
                                     const Annotations& evidence = {});

/// P(y | X) indexed by RelLabel value (NONE, INC, DEC, BOTH).
Eigen::VectorXd bag_posterior(const Sequence& seq, const ModelParams& params,
                              const Annotations& evidence = {});

FramePrediction predict_frames(const Sequence& seq, const ModelParams& params, DecodeMode mode);

std::vector<int> clamped_viterbi(const Sequence& seq, RelLabel y, const ModelParams& params);

BagLikelihood loglik_and_marginals(const Bag& bag, const ModelParams& params);

BagLikelihood loglik_and_marginals(const Bag& bag, const potentials::NodeTable& nodes,
                                   const RowMatrix& edge_f, const chain::Options& options = {});

}  // namespace midorf::rel_model
