#include "midorf/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "midorf/bag_model.hpp"
#include "midorf/chain.hpp"
#include "midorf/model_max.hpp"
#include "midorf/model_rel.hpp"
#include "midorf/potentials.hpp"

namespace midorf::bench {

namespace {

using Clock = std::chrono::steady_clock;

// Keeps the optimizer from discarding the timed work.
volatile double g_sink = 0.0;

double augmented_pass(const Bag& bag, const ModelParams& params, ModelType model) {
  const auto nodes = potentials::node_table(bag.sequence, params);
  const RowMatrix edge_f = potentials::edge_table(params);
  const auto lattice =
      model == ModelType::Max
          ? max_model::build_lattice(nodes, edge_f, bag.max_label(), params.w)
          : rel_model::build_lattice(nodes, edge_f, bag.rel_label());
  return chain::forward_backward(lattice, {.per_step_pairwise = false}).log_Z;
}

double plain_pass(const Bag& bag, const ModelParams& params) {
  const auto nodes = potentials::node_table(bag.sequence, params);
  const RowMatrix edge_f = potentials::edge_table(params);
  return chain::forward_backward(build_plain_lattice(nodes, edge_f), {.per_step_pairwise = false})
      .log_Z;
}

template <typename Fn>
double seconds(Fn&& fn) {
  const auto start = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Timing time_inference(const Dataset& ds, const ModelParams& params, ModelType model, int runs) {
  if (model == ModelType::Chain) throw Error("benchmark compares MAX or REL against the chain");
  if ((model == ModelType::Max) != (ds.setting == Setting::Max))
    throw Error("benchmark dataset setting does not match the model");
  if (runs < 1) throw Error("benchmark needs at least one run");
  std::vector<double> aug, plain;
  // Alternate the two passes so drift in machine load hits both alike.
  for (int r = 0; r < runs; ++r) {
    aug.push_back(seconds([&] {
      for (const auto& bag : ds.bags) g_sink = g_sink + augmented_pass(bag, params, model);
    }));
    plain.push_back(seconds([&] {
      for (const auto& bag : ds.bags) g_sink = g_sink + plain_pass(bag, params);
    }));
  }
  return {model, runs, median(aug), median(plain)};
}

Scaling time_vs_length(const ModelParams& params, ModelType model, const std::vector<int>& lengths,
                       int runs, std::uint64_t seed) {
  if (lengths.size() < 2) throw Error("scaling fit needs at least two lengths");
  Scaling out;
  out.lengths = lengths;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Bag> bags;
  for (int T : lengths) {
    Bag bag;
    bag.sequence.id = "T" + std::to_string(T);
    bag.sequence.features.resize(T, params.dim());
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < params.dim(); ++k) bag.sequence.features(t, k) = gauss(rng);
    // the most permissive label of each model
    if (model == ModelType::Max)
      bag.y = params.levels();
    else
      bag.y = RelLabel::Both;
    bags.push_back(std::move(bag));
  }
  // A single pass is well under a millisecond, so each sample times a batch,
  // and lengths take turns within a run so load drift spreads over all of them.
  constexpr int kBatch = 20;
  std::vector<std::vector<double>> times(lengths.size());
  for (int r = 0; r < runs; ++r)
    for (std::size_t i = 0; i < bags.size(); ++i)
      times[i].push_back(seconds([&] {
                           for (int b = 0; b < kBatch; ++b)
                             g_sink = g_sink + augmented_pass(bags[i], params, model);
                         }) /
                         kBatch);
  for (const auto& t : times) out.seconds.push_back(median(t));
  const Eigen::Index n = static_cast<Eigen::Index>(lengths.size());
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = lengths[i];
    y(i) = out.seconds[i];
  }
  const double mx = x.mean(), my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  const double ss_res = (y.array() - (out.intercept + out.slope * x.array())).square().sum();
  const double ss_tot = (y.array() - my).square().sum();
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

ModelParams random_params(int L, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ModelParams p = ModelParams::zeros(L, d);
  for (int k = 0; k < d; ++k) p.beta(k) = gauss(rng);
  for (int l = 0; l < L - 1; ++l) p.cutpoints(l) = -1.5 + 3.0 * l / std::max(1, L - 2);
  if (L == 2) p.cutpoints(0) = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) p.W(i, j) = gauss(rng);
  p.w = 1.0;
  return p;
}

nlohmann::json to_json(const Timing& t) {
  return {{"model", to_string(t.model)},
          {"runs", t.runs},
          {"augmented_seconds", t.augmented_seconds},
          {"plain_seconds", t.plain_seconds},
          {"ratio", t.ratio()}};
}

nlohmann::json to_json(const Scaling& s) {
  return {{"lengths", s.lengths},
          {"seconds", s.seconds},
          {"slope", s.slope},
          {"intercept", s.intercept},
          {"r_squared", s.r_squared}};
}

}  // namespace midorf::bench
