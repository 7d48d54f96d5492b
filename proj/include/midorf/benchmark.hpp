#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "midorf/core.hpp"

namespace midorf::bench {

/// Median wall time of one pass over a dataset: the bag-label-clamped
/// augmented lattice (MAX or REL) vs the plain L-state chain. Each pass
/// covers node potentials, lattice construction and forward-backward.
struct Timing {
  ModelType model = ModelType::Max;
  int runs = 0;
  double augmented_seconds = 0.0;
  double plain_seconds = 0.0;

  double ratio() const { return augmented_seconds / plain_seconds; }
};

Timing time_inference(const Dataset& ds, const ModelParams& params, ModelType model, int runs);

struct Scaling {
  std::vector<int> lengths;
  std::vector<double> seconds;  // median augmented time per length
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Augmented inference time on random sequences of each length, with a
/// least-squares line through (T, seconds).
Scaling time_vs_length(const ModelParams& params, ModelType model, const std::vector<int>& lengths,
                       int runs, std::uint64_t seed);

/// Parameters with random beta and W, evenly spaced cut-points and w = 1.
ModelParams random_params(int L, int d, std::uint64_t seed);

nlohmann::json to_json(const Timing& t);
nlohmann::json to_json(const Scaling& s);

}  // namespace midorf::bench
