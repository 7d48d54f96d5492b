#include "midorf/learning.hpp"

#include <cmath>
#include <optional>
#include <random>

#include <ceres/ceres.h>

#include "midorf/bag_model.hpp"
#include "midorf/model_max.hpp"
#include "midorf/model_rel.hpp"
#include "midorf/parallel.hpp"
#include "midorf/predict.hpp"

namespace midorf::learning {

ParamLayout ParamLayout::for_model(int L, int d, ModelType type, bool freeze_w) {
  return {L, d, type == ModelType::Max && !freeze_w};
}

Eigen::VectorXd pack(const ModelParams& p, const ParamLayout& layout) {
  Eigen::VectorXd x(layout.size());
  x.head(layout.d) = p.beta;
  for (int l = 0; l < layout.L - 1; ++l)
    x(layout.cut_offset() + l) =
        l == 0 ? p.cutpoints(0) : std::log(p.cutpoints(l) - p.cutpoints(l - 1));
  for (int i = 0; i < layout.L; ++i)
    for (int j = 0; j < layout.L; ++j) x(layout.w_matrix_offset() + i * layout.L + j) = p.W(i, j);
  if (layout.has_w) x(layout.w_offset()) = p.w;
  return x;
}

ModelParams unpack(const Eigen::VectorXd& x, const ParamLayout& layout, double fixed_w) {
  ModelParams p;
  p.beta = x.head(layout.d);
  p.cutpoints.resize(layout.L - 1);
  for (int l = 0; l < layout.L - 1; ++l) {
    const double c = x(layout.cut_offset() + l);
    p.cutpoints(l) = l == 0 ? c : p.cutpoints(l - 1) + std::exp(c);
  }
  p.W.resize(layout.L, layout.L);
  for (int i = 0; i < layout.L; ++i)
    for (int j = 0; j < layout.L; ++j) p.W(i, j) = x(layout.w_matrix_offset() + i * layout.L + j);
  p.w = layout.has_w ? x(layout.w_offset()) : fixed_w;
  return p;
}

namespace {

/// Log-likelihood of one bag and its gradient w.r.t. the natural parameters.
struct BagTerm {
  double loglik = 0.0;
  Eigen::VectorXd beta;
  Eigen::VectorXd cut;
  Eigen::MatrixXd W;
  double w = 0.0;
};

BagLikelihood plain_likelihood(const Bag& bag, const potentials::NodeTable& nodes,
                               const RowMatrix& edge_f) {
  const chain::Options opts{.per_step_pairwise = false};
  BagLikelihood out;
  out.clamped = chain::forward_backward(build_plain_lattice(nodes, edge_f, bag.observed), opts);
  if (!out.clamped.feasible())
    throw InfeasibleError(bag.sequence.id,
                          "bag '" + bag.sequence.id + "': clamped lattice is infeasible");
  out.free.push_back(chain::forward_backward(build_plain_lattice(nodes, edge_f), opts));
  out.free_weights = Eigen::VectorXd::Ones(1);
  out.loglik = out.clamped.log_Z - out.free.front().log_Z;
  return out;
}

BagTerm bag_term(const Bag& bag, const ModelParams& params, ModelType type) {
  const int L = params.levels();
  const auto nodes = potentials::node_table(bag.sequence, params, true);
  const RowMatrix edge_f = potentials::edge_table(params);
  const chain::Options opts{.per_step_pairwise = false};

  BagLikelihood lik;
  switch (type) {
    case ModelType::Max:
      lik = max_model::loglik_and_marginals(bag, nodes, edge_f, params.w, opts);
      break;
    case ModelType::Rel:
      lik = rel_model::loglik_and_marginals(bag, nodes, edge_f, opts);
      break;
    case ModelType::Chain:
      lik = plain_likelihood(bag, nodes, edge_f);
      break;
  }

  // clamped-minus-free expected statistics
  const auto clamped = collapse_levels(lik.clamped, L);
  RowMatrix node_coef = clamped.unary;
  RowMatrix pair_coef = clamped.pair_sum;
  double w_coef = 0.0;
  if (type == ModelType::Max) w_coef = clamped.unary.col(bag.max_label() - 1).sum();
  for (std::size_t k = 0; k < lik.free.size(); ++k) {
    const double weight = lik.free_weights(static_cast<Eigen::Index>(k));
    if (weight == 0.0) continue;
    const auto m = collapse_levels(lik.free[k], L);
    node_coef -= weight * m.unary;
    pair_coef -= weight * m.pair_sum;
    if (type == ModelType::Max) w_coef -= weight * m.unary.col(static_cast<Eigen::Index>(k)).sum();
  }

  BagTerm term;
  term.loglik = lik.loglik;
  const Eigen::VectorXd d_projection = node_coef.cwiseProduct(nodes.d_projection).rowwise().sum();
  term.beta = bag.sequence.features.transpose() * d_projection;
  term.cut = Eigen::VectorXd::Zero(L - 1);
  for (int l = 1; l < L; ++l)
    term.cut(l - 1) = node_coef.col(l - 1).dot(nodes.d_upper.col(l - 1)) +
                      node_coef.col(l).dot(nodes.d_lower.col(l));
  term.W.resize(L, L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j)
      term.W(i, j) = pair_coef(i, j) * potentials::edge_f_derivative(params.W(i, j));
  term.w = w_coef;
  return term;
}

}  // namespace

ObjectiveValue objective_and_gradient(const Dataset& ds, const ModelParams& params, double alpha,
                                      ModelType type, const ParamLayout& layout, int jobs) {
  const int L = params.levels();
  const int d = params.dim();
  const auto terms = parallel_map(ds.bags.size(), jobs, [&](std::size_t i) {
    return bag_term(ds.bags[i], params, type);
  });

  // fixed-order reduction by bag index
  double loglik = 0.0;
  Eigen::VectorXd g_beta = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd g_cut = Eigen::VectorXd::Zero(L - 1);
  Eigen::MatrixXd g_W = Eigen::MatrixXd::Zero(L, L);
  double g_w = 0.0;
  for (const auto& t : terms) {
    loglik += t.loglik;
    g_beta += t.beta;
    g_cut += t.cut;
    g_W += t.W;
    g_w += t.w;
  }

  ObjectiveValue out;
  out.value = -loglik + alpha * (params.beta.squaredNorm() + params.W.squaredNorm());
  g_beta = -g_beta + 2.0 * alpha * params.beta;
  g_cut = -g_cut;
  g_W = -g_W + 2.0 * alpha * params.W;
  g_w = -g_w;

  out.gradient.resize(layout.size());
  out.gradient.head(d) = g_beta;
  // b_k depends on c_1 with slope 1 and on c_j (j >= 2, j <= k) with slope exp(c_j)
  double tail = 0.0;
  for (int j = L - 2; j >= 0; --j) {
    tail += g_cut(j);
    const double slope = j == 0 ? 1.0 : params.cutpoints(j) - params.cutpoints(j - 1);
    out.gradient(layout.cut_offset() + j) = tail * slope;
  }
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) out.gradient(layout.w_matrix_offset() + i * L + j) = g_W(i, j);
  if (layout.has_w) out.gradient(layout.w_offset()) = g_w;
  return out;
}

ObjectiveValue objective_and_gradient(const Dataset& ds, const ModelParams& params, double alpha,
                                      ModelType type, int jobs) {
  return objective_and_gradient(ds, params, alpha, type,
                                ParamLayout::for_model(params.levels(), params.dim(), type), jobs);
}

ModelParams initial_params(int L, int d, ModelType type, const TrainConfig& config,
                           std::uint64_t seed) {
  ModelParams p;
  p.beta = Eigen::VectorXd::Zero(d);
  if (config.init_scheme == InitScheme::Default) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 0.1);
    for (int i = 0; i < d; ++i) p.beta(i) = normal(rng);
  }
  if (L == 2)
    p.cutpoints = Eigen::VectorXd::Zero(1);
  else
    p.cutpoints = Eigen::VectorXd::LinSpaced(L - 1, -1.5, 1.5);
  p.W = Eigen::MatrixXd::Zero(L, L);
  p.w = type == ModelType::Max ? config.initial_w : 0.0;
  return p;
}

void require_compatible(const Dataset& ds, ModelType type) {
  require_valid(ds);
  if (type == ModelType::Max && ds.setting != Setting::Max)
    throw Error("MAX model needs a MAX dataset");
  if (type == ModelType::Rel && ds.setting != Setting::Rel)
    throw Error("REL model needs a REL dataset");
  if (type == ModelType::Chain)
    for (const auto& bag : ds.bags)
      if (!fully_annotated(bag.observed, bag.sequence.length()))
        throw Error("full labels required: bag '" + bag.sequence.id + "' is not fully annotated");
}

namespace {

class Objective final : public ceres::FirstOrderFunction {
 public:
  Objective(const Dataset& ds, ModelType type, ParamLayout layout, double alpha, double fixed_w,
            int jobs)
      : ds_(ds), type_(type), layout_(layout), alpha_(alpha), fixed_w_(fixed_w), jobs_(jobs) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(parameters, layout_.size());
    const ModelParams p = unpack(x, layout_, fixed_w_);
    const auto v = objective_and_gradient(ds_, p, alpha_, type_, layout_, jobs_);
    if (!std::isfinite(v.value) || !v.gradient.allFinite()) return false;
    *cost = v.value;
    if (gradient) Eigen::Map<Eigen::VectorXd>(gradient, layout_.size()) = v.gradient;
    return true;
  }

  int NumParameters() const override { return layout_.size(); }

 private:
  const Dataset& ds_;
  ModelType type_;
  ParamLayout layout_;
  double alpha_;
  double fixed_w_;
  int jobs_;
};

class TraceCallback final : public ceres::IterationCallback {
 public:
  explicit TraceCallback(std::vector<TraceRecord>& trace) : trace_(trace) {}

  ceres::CallbackReturnType operator()(const ceres::IterationSummary& s) override {
    trace_.push_back({s.iteration, s.cost, s.gradient_norm, s.cumulative_time_in_seconds,
                      s.step_is_successful});
    return ceres::SOLVER_CONTINUE;
  }

 private:
  std::vector<TraceRecord>& trace_;
};

}  // namespace

TrainResult train_once(const Dataset& ds, const TrainConfig& config, ModelType type,
                       const ModelParams& start) {
  const ParamLayout layout =
      ParamLayout::for_model(ds.scale.L, ds.d, type, config.freeze_w);
  const double fixed_w = type == ModelType::Max ? start.w : 0.0;

  const auto initial = objective_and_gradient(ds, start, config.alpha, type, layout, config.jobs);
  if (!std::isfinite(initial.value) || !initial.gradient.allFinite())
    throw Error("non-finite objective at initialization (value " + std::to_string(initial.value) +
                ")");

  Eigen::VectorXd x = pack(start, layout);
  TrainResult result;
  TraceCallback callback(result.trace);

  ceres::GradientProblemSolver::Options options;
  options.line_search_direction_type = ceres::LBFGS;
  options.max_lbfgs_rank = config.lbfgs_history;
  options.max_num_iterations = config.max_iterations;
  options.gradient_tolerance = config.gradient_tolerance;
  options.function_tolerance = config.function_tolerance;
  options.logging_type = ceres::SILENT;
  options.minimizer_progress_to_stdout = false;
  options.callbacks.push_back(&callback);

  ceres::GradientProblem problem(
      new Objective(ds, type, layout, config.alpha, fixed_w, config.jobs));
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(options, problem, x.data(), &summary);

  result.params = unpack(x, layout, fixed_w);
  result.final_objective = summary.final_cost;
  result.termination = summary.message;
  return result;
}

TrainResult train(const Dataset& ds, const TrainConfig& config, ModelType type,
                  const Dataset* validation) {
  require_compatible(ds, type);
  if (validation) require_valid(*validation);
  std::optional<TrainResult> best;
  for (int k = 0; k < std::max(config.restarts, 1); ++k) {
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(k));
    auto r = train_once(ds, config, type, initial_params(ds.scale.L, ds.d, type, config, seed));
    r.restart = k;
    r.seed = seed;
    if (validation) {
      const auto report =
          evaluate_model(*validation, r.params, type, config.decode_mode, config.jobs);
      r.validation_icc = report.pooled.icc.value_or(-1.0);
    }
    const bool better =
        !best || (validation ? *r.validation_icc > *best->validation_icc
                             : r.final_objective < best->final_objective);
    if (better) best = std::move(r);
  }
  return *best;
}

TrainResult train_supervised_chain(const Dataset& ds, const TrainConfig& config,
                                   const Dataset* validation) {
  return train(ds, config, ModelType::Chain, validation);
}

GridResult grid_search(const Dataset& train_set, const Dataset& validation,
                       const std::vector<double>& alphas, const TrainConfig& config,
                       ModelType type) {
  if (alphas.empty()) throw Error("grid search needs at least one alpha");
  GridResult out;
  std::optional<double> best_icc;
  for (double alpha : alphas) {
    TrainConfig c = config;
    c.alpha = alpha;
    auto r = train(train_set, c, type, &validation);
    const auto report = evaluate_model(validation, r.params, type, config.decode_mode, config.jobs);
    out.rows.push_back({alpha, report.pooled, r.final_objective});
    const double icc = report.pooled.icc.value_or(-1.0);
    const bool better = !best_icc || icc > *best_icc || (icc == *best_icc && alpha < out.best_alpha);
    if (better) {
      best_icc = icc;
      out.best_alpha = alpha;
      out.best = std::move(r);
    }
  }
  return out;
}

nlohmann::json trace_to_json(const TrainResult& r) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& t : r.trace)
    records.push_back({{"iteration", t.iteration},
                       {"objective", t.objective},
                       {"gradient_norm", t.gradient_norm},
                       {"wall_seconds", t.wall_seconds},
                       {"step_accepted", t.step_accepted}});
  nlohmann::json j;
  j["restart"] = r.restart;
  j["seed"] = r.seed;
  j["final_objective"] = r.final_objective;
  j["termination"] = r.termination;
  j["validation_icc"] = r.validation_icc ? nlohmann::json(*r.validation_icc) : nlohmann::json();
  j["iterations"] = std::move(records);
  return j;
}

}  // namespace midorf::learning
