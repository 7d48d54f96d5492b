#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "midorf/core.hpp"

namespace midorf::synthetic {

struct SyntheticConfig {
  Setting setting = Setting::Max;
  int L = 6;
  int d = 10;
  int n_train = 100;
  int n_val = 50;
  int n_test = 150;
  // Length of a sequence (MAX) or of one monotone segment (REL).
  int min_length = 50;
  int max_length = 75;
  double noise_sigma = 0.25;
  int pool_size = 1000;
  // Dirichlet concentrations of a transition row: the self-transition, moves
  // to an adjacent level (always 1) and jumps of two or more levels. With
  // both set to 1 the rows are Dirichlet(1).
  double stay_concentration = 1.0;
  double jump_concentration = 1.0;
  // Multiply the sorted Gaussian cut-points by ||beta|| so the bins match
  // the spread of the projected pool.
  bool scale_cutpoints = true;
  std::uint64_t seed = 0;

  /// Defaults for a setting: sticky rows (stay 300, jump 0.1) for MAX,
  /// Dirichlet(1) rows and segment lengths 15..25 for REL.
  static SyntheticConfig defaults(Setting setting);
};

/// Throws Error on an empty length range, L < 2, d < 1, or empty splits/pool.
void validate(const SyntheticConfig& config);

struct SyntheticData {
  SyntheticConfig config;
  RowMatrix transition;     // L x L, row-stochastic
  ModelParams generator;    // beta and cut-points used to label the pool
  RowMatrix pool;           // pool_size x d, noise-free
  // Weakly labeled splits (no annotations) and their fully annotated twins.
  std::array<Dataset, 3> weak;
  std::array<Dataset, 3> full;
  // Pool row emitted at every frame, per split and sequence.
  std::array<std::vector<std::vector<int>>, 3> pool_index;

  const Dataset& weak_split(Split s) const { return weak[static_cast<int>(s)]; }
  const Dataset& full_split(Split s) const { return full[static_cast<int>(s)]; }
};

SyntheticData generate_dataset(const SyntheticConfig& config);

/// `count` datasets whose seeds are derived from (base_seed, index).
std::vector<SyntheticData> generate_benchmark_suite(std::uint64_t base_seed, int count,
                                                    const SyntheticConfig& base_config);

std::uint64_t suite_seed(std::uint64_t base_seed, int index);

/// Keeps the annotations of a fully annotated dataset on a seed-derived subset of
/// frames: one frame per sequence, or ceil(fraction * T) frames when given.
Dataset subsample_annotations(const Dataset& full, std::uint64_t seed,
                              std::optional<double> fraction = std::nullopt);

/// Training split with one seed-derived annotated frame per sequence.
Dataset partial_train(const SyntheticData& data);

nlohmann::json metadata(const SyntheticData& data);

/// Writes {train,val,test}.json (bag labels only), {train,val,test}_full.json,
/// train_po.json (one annotated frame per sequence) and meta.json.
void write_dataset_files(const SyntheticData& data, const std::filesystem::path& dir);

}  // namespace midorf::synthetic
