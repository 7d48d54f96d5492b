#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "midorf/core.hpp"
#include "midorf/metrics.hpp"

namespace midorf::learning {

enum class InitScheme { Default, Zero };

struct TrainConfig {
  double alpha = 1e-2;
  int max_iterations = 200;
  double gradient_tolerance = 1e-5;
  double function_tolerance = 1e-9;
  int lbfgs_history = 10;
  std::uint64_t seed = 0;
  InitScheme init_scheme = InitScheme::Default;
  DecodeMode decode_mode = DecodeMode::Marginal;
  int restarts = 3;
  bool freeze_w = false;
  double initial_w = 1.0;
  int jobs = 1;
};

/// Layout of the unconstrained parameter vector:
///   [beta (d) | cut-point increments (L-1) | W row-major (L*L) | w (MAX, unless frozen)].
/// Cut-points are b_1 = c_1 and b_l = b_{l-1} + exp(c_l).
struct ParamLayout {
  int L = 2;
  int d = 1;
  bool has_w = false;

  int size() const { return d + (L - 1) + L * L + (has_w ? 1 : 0); }
  int cut_offset() const { return d; }
  int w_matrix_offset() const { return d + L - 1; }
  int w_offset() const { return d + L - 1 + L * L; }

  static ParamLayout for_model(int L, int d, ModelType type, bool freeze_w = false);
};

Eigen::VectorXd pack(const ModelParams& params, const ParamLayout& layout);
/// `fixed_w` supplies w when the layout does not carry it.
ModelParams unpack(const Eigen::VectorXd& x, const ParamLayout& layout, double fixed_w = 0.0);

struct ObjectiveValue {
  double value = 0.0;
  Eigen::VectorXd gradient;  // w.r.t. the packed unconstrained vector
};

/// -sum_i log P(y_i, annotations_i | X_i) + alpha (||beta||^2 + ||W||_F^2) and
/// its gradient. CHAIN uses log p(h | X) of fully labeled sequences.
/// Throws InfeasibleError naming the first bag whose clamped lattice is empty.
ObjectiveValue objective_and_gradient(const Dataset& ds, const ModelParams& params, double alpha,
                                      ModelType type, const ParamLayout& layout, int jobs = 1);

ObjectiveValue objective_and_gradient(const Dataset& ds, const ModelParams& params, double alpha,
                                      ModelType type, int jobs = 1);

ModelParams initial_params(int L, int d, ModelType type, const TrainConfig& config,
                           std::uint64_t seed);

struct TraceRecord {
  int iteration = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
  double wall_seconds = 0.0;
  bool step_accepted = true;
};

struct TrainResult {
  ModelParams params;
  std::vector<TraceRecord> trace;
  double final_objective = 0.0;
  int restart = 0;
  std::uint64_t seed = 0;
  std::optional<double> validation_icc;
  std::string termination;
};

/// Checks the dataset suits the model type (setting, full labels for CHAIN).
void require_compatible(const Dataset& ds, ModelType type);

/// One L-BFGS run from the given start.
TrainResult train_once(const Dataset& ds, const TrainConfig& config, ModelType type,
                       const ModelParams& start);

/// config.restarts runs from seed-derived starts. With a validation set
/// (fully annotated) the restart with the best validation ICC is kept,
/// otherwise the lowest final objective.
TrainResult train(const Dataset& ds, const TrainConfig& config, ModelType type,
                  const Dataset* validation = nullptr);

/// Fully supervised L-state chain; every frame must be annotated.
TrainResult train_supervised_chain(const Dataset& ds, const TrainConfig& config,
                                   const Dataset* validation = nullptr);

inline const std::vector<double> kDefaultAlphaGrid = {1e-4, 1e-3, 1e-2, 1e-1};

struct GridRow {
  double alpha = 0.0;
  metrics::Scores validation;
  double final_objective = 0.0;
};

struct GridResult {
  double best_alpha = 0.0;
  TrainResult best;
  std::vector<GridRow> rows;
};

/// Trains per alpha and keeps the best validation ICC (ties to the smaller alpha).
GridResult grid_search(const Dataset& train_set, const Dataset& validation,
                       const std::vector<double>& alphas, const TrainConfig& config,
                       ModelType type);

nlohmann::json trace_to_json(const TrainResult& r);

}  // namespace midorf::learning
