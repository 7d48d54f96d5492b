#pragma once

#include <cstddef>
#include <vector>

#include "midorf/chain.hpp"
#include "midorf/core.hpp"

// Brute-force references over exhaustive path enumeration. Only for tests
// and debugging; instance sizes are hard-guarded.
namespace midorf::oracle {

inline constexpr std::size_t kMaxPaths = 1'000'000;

struct Enumeration {
  double log_sum = kNegInf;  // log of sum over paths of exp(energy)
  RowMatrix marginals;       // T x L (levels) or T x S (lattice states)
  std::vector<int> argmax_path;
  double max_score = kNegInf;
};

/// Node + f(W) edge energy of a level path, without any MIL term.
double chain_energy(const Sequence& seq, const std::vector<int>& h, const ModelParams& params);

/// Full max-model energy: chain energy plus the MIL reward/constraint.
double max_energy(const Sequence& seq, const std::vector<int>& h, int y, const ModelParams& params);

/// Full relative-model energy: chain energy plus 0/-inf trend constraint.
double rel_energy(const Sequence& seq, const std::vector<int>& h, RelLabel y,
                  const ModelParams& params);

/// Trend constraint written directly from its quantified definition.
bool satisfies_trend(const std::vector<int>& h, RelLabel y);

Enumeration enumerate_energy_max(const Sequence& seq, int y, const ModelParams& params,
                                 const Annotations& evidence = {});
Enumeration enumerate_energy_rel(const Sequence& seq, RelLabel y, const ModelParams& params,
                                 const Annotations& evidence = {});
Enumeration enumerate_energy_chain(const Sequence& seq, const ModelParams& params,
                                   const Annotations& evidence = {});

/// Sum over all S^T state paths of a generic lattice; marginals are T x S.
Enumeration enumerate_lattice(const chain::AugmentedLattice& lattice);

/// Best score over all auxiliary completions of a fixed level path in an
/// augmented lattice with n_aux auxiliary values per level.
double best_completion_score(const chain::AugmentedLattice& lattice, const std::vector<int>& levels,
                             int L, int n_aux);

/// Calls fn(path) for every path in {1..L}^T. Throws Error past kMaxPaths.
template <typename Fn>
void for_each_path(int T, int L, Fn&& fn);

/// Log-sum-exp of many terms: sorted by magnitude, compensated accumulation.
double accurate_log_sum(std::vector<double> terms);

}  // namespace midorf::oracle

#include "midorf/oracle_impl.hpp"
