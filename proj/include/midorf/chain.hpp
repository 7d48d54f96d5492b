#pragma once

#include <vector>

#include "midorf/core.hpp"

// Log-domain forward-backward and Viterbi over a linear chain whose state at
// each step is an arbitrary joint index 0..S-1. Entries equal to -inf are
// structural zeros: they never contribute mass and are skipped entirely.
namespace midorf::chain {

struct AugmentedLattice {
  int T = 0;
  int S = 0;
  RowMatrix node;                // T x S
  std::vector<RowMatrix> edges;  // one S x S table shared by all steps, or T-1 tables

  /// Edge table between steps t and t+1.
  const RowMatrix& edge(int t) const { return edges.size() == 1 ? edges.front() : edges[t]; }

  /// Throws Error when the tables disagree with T and S.
  void check_shape() const;
};

struct ChainPosteriors {
  double log_Z = kNegInf;
  RowMatrix unary;                  // T x S
  RowMatrix pairwise_sum;           // S x S, pairwise marginals summed over t
  std::vector<RowMatrix> pairwise;  // T-1 tables of S x S, only when requested

  bool feasible() const { return log_Z > kNegInf; }
};

struct Options {
  bool per_step_pairwise = true;
};

/// Log partition function and posterior marginals. An infeasible lattice
/// yields log_Z = -inf and all-zero marginals rather than an exception.
ChainPosteriors forward_backward(const AugmentedLattice& lattice, const Options& options = {});

/// Forward pass only.
double log_partition(const AugmentedLattice& lattice);

struct ViterbiPath {
  std::vector<int> states;
  double score = kNegInf;
};

/// Highest-scoring state path. Ties resolve toward the lowest state index.
/// Throws InfeasibleError when no path has a finite score.
ViterbiPath viterbi(const AugmentedLattice& lattice);

/// Score of one state path, accumulated in the same order as the Viterbi recursion.
double path_score(const AugmentedLattice& lattice, const std::vector<int>& states);

double log_sum_exp(double a, double b);

}  // namespace midorf::chain
