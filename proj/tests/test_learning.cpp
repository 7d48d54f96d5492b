#include <doctest.h>

#include <cmath>

#include "midorf/learning.hpp"
#include "midorf/oracle.hpp"
#include "midorf/predict.hpp"
#include "midorf/synthetic.hpp"
#include "support.hpp"

using namespace midorf;
using namespace midorf::learning;
using testing_support::Rng;

namespace {

// Central differences of the objective along every packed coordinate.
Eigen::VectorXd numeric_gradient(const Dataset& ds, const Eigen::VectorXd& x, const ParamLayout& layout,
                                 double alpha, ModelType type, double fixed_w, double step = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp(k) += step;
    xm(k) -= step;
    const double fp = objective_and_gradient(ds, unpack(xp, layout, fixed_w), alpha, type, layout).value;
    const double fm = objective_and_gradient(ds, unpack(xm, layout, fixed_w), alpha, type, layout).value;
    g(k) = (fp - fm) / (2 * step);
  }
  return g;
}

double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(a.lpNorm<Eigen::Infinity>(), 1e-8);
}

void check_gradients(Setting setting, ModelType type, double keep, int trials, std::uint64_t seed,
                     bool freeze_w = false) {
  Rng rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    const int L = testing_support::uniform_int(rng, 2, 4);
    const int d = testing_support::uniform_int(rng, 1, 3);
    const auto ds = testing_support::random_dataset(setting, 3, L, d, 1, 6, rng, keep);
    const auto p = testing_support::random_params(L, d, rng, 0.7);
    const auto layout = ParamLayout::for_model(L, d, type, freeze_w);
    const auto x = pack(p, layout);
    const double alpha = testing_support::uniform(rng, 0.0, 0.5);
    const auto analytic = objective_and_gradient(ds, unpack(x, layout, p.w), alpha, type, layout);
    const auto numeric = numeric_gradient(ds, x, layout, alpha, type, p.w);
    CHECK(relative_error(analytic.gradient, numeric) < 1e-4);
  }
}

}  // namespace

TEST_CASE("pack and unpack round-trip") {
  Rng rng(1);
  for (ModelType type : {ModelType::Max, ModelType::Rel, ModelType::Chain}) {
    const auto p = testing_support::random_params(4, 3, rng);
    const auto layout = ParamLayout::for_model(4, 3, type);
    CHECK(layout.size() == 3 + 3 + 16 + (type == ModelType::Max ? 1 : 0));
    const auto q = unpack(pack(p, layout), layout, p.w);
    CHECK((q.beta - p.beta).norm() < 1e-14);
    CHECK((q.cutpoints - p.cutpoints).norm() < 1e-12);
    CHECK((q.W - p.W).norm() == 0.0);
    CHECK(q.w == p.w);
  }
  const auto frozen = ParamLayout::for_model(3, 2, ModelType::Max, true);
  CHECK_FALSE(frozen.has_w);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(frozen.size());
  x(frozen.cut_offset() + 1) = std::log(2.0);
  const auto q = unpack(x, frozen, 0.75);
  CHECK(q.w == 0.75);
  CHECK(q.cutpoints(0) == 0.0);
  CHECK(q.cutpoints(1) == doctest::Approx(2.0));
}

TEST_CASE("unpacked cut-points are increasing") {
  Rng rng(2);
  const auto layout = ParamLayout::for_model(5, 2, ModelType::Rel);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(layout.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = testing_support::uniform(rng, -5, 5);
    CHECK(cutpoints_increasing(unpack(x, layout)));
  }
}

TEST_CASE("max gradient matches finite differences") { check_gradients(Setting::Max, ModelType::Max, 0.0, 50, 10); }

TEST_CASE("max gradient with partial evidence") {
  check_gradients(Setting::Max, ModelType::Max, 0.4, 50, 11);
  check_gradients(Setting::Max, ModelType::Max, 0.4, 20, 12, true);
}

TEST_CASE("rel gradient matches finite differences") { check_gradients(Setting::Rel, ModelType::Rel, 0.0, 50, 13); }

TEST_CASE("rel gradient with partial evidence") { check_gradients(Setting::Rel, ModelType::Rel, 0.4, 50, 14); }

TEST_CASE("chain gradient matches finite differences") {
  check_gradients(Setting::Max, ModelType::Chain, 1.0, 50, 15);
}

TEST_CASE("objective equals the enumerated likelihood") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int L = testing_support::uniform_int(rng, 2, 3);
    const auto p = testing_support::random_params(L, 2, rng);
    const auto max_ds = testing_support::random_dataset(Setting::Max, 2, L, 2, 1, 5, rng, 0.5);
    const auto rel_ds = testing_support::random_dataset(Setting::Rel, 2, L, 2, 1, 5, rng, 0.5);
    double max_ref = 0.0;
    double rel_ref = 0.0;
    for (const Bag& bag : max_ds.bags) {
      const double num = oracle::enumerate_energy_max(bag.sequence, bag.max_label(), p, bag.observed).log_sum;
      std::vector<double> den;
      for (int y = 1; y <= L; ++y) den.push_back(oracle::enumerate_energy_max(bag.sequence, y, p).log_sum);
      max_ref -= num - oracle::accurate_log_sum(den);
    }
    for (const Bag& bag : rel_ds.bags) {
      const double num = oracle::enumerate_energy_rel(bag.sequence, bag.rel_label(), p, bag.observed).log_sum;
      rel_ref -= num - oracle::enumerate_energy_chain(bag.sequence, p).log_sum;
    }
    const double alpha = 0.3;
    const double penalty = alpha * (p.beta.squaredNorm() + p.W.squaredNorm());
    CHECK(objective_and_gradient(max_ds, p, alpha, ModelType::Max).value ==
          doctest::Approx(max_ref + penalty).epsilon(1e-10));
    CHECK(objective_and_gradient(rel_ds, p, alpha, ModelType::Rel).value ==
          doctest::Approx(rel_ref + penalty).epsilon(1e-10));
  }
}

TEST_CASE("empty annotations leave the objective unchanged") {
  Rng rng(4);
  auto ds = testing_support::random_dataset(Setting::Max, 4, 3, 2, 2, 6, rng);
  const auto p = testing_support::random_params(3, 2, rng);
  const double weak = objective_and_gradient(ds, p, 0.1, ModelType::Max).value;
  for (Bag& bag : ds.bags) bag.observed.assign(bag.sequence.length(), std::nullopt);
  CHECK(objective_and_gradient(ds, p, 0.1, ModelType::Max).value == doctest::Approx(weak).epsilon(1e-13));
}

TEST_CASE("infeasible evidence names the bag") {
  Rng rng(5);
  auto ds = testing_support::random_dataset(Setting::Max, 2, 3, 2, 3, 3, rng);
  ds.bags[1].y = 1;
  ds.bags[1].observed = {std::nullopt, 2, std::nullopt};
  const auto p = testing_support::random_params(3, 2, rng);
  try {
    objective_and_gradient(ds, p, 0.1, ModelType::Max);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.bag_id() == "b1");
  }
}

TEST_CASE("compatibility checks") {
  Rng rng(6);
  const auto weak = testing_support::random_dataset(Setting::Max, 3, 3, 2, 2, 4, rng);
  const auto rel = testing_support::random_dataset(Setting::Rel, 3, 3, 2, 2, 4, rng);
  CHECK_THROWS_WITH_AS(require_compatible(weak, ModelType::Chain), doctest::Contains("full labels required"),
                       Error);
  CHECK_THROWS_AS(require_compatible(weak, ModelType::Rel), Error);
  CHECK_THROWS_AS(require_compatible(rel, ModelType::Max), Error);
  CHECK_NOTHROW(require_compatible(rel, ModelType::Rel));
  TrainConfig config;
  config.restarts = 1;
  CHECK_THROWS_WITH_AS(train_supervised_chain(weak, config), doctest::Contains("full labels required"), Error);
}

namespace {

synthetic::SyntheticData small_max_data(std::uint64_t seed, double noise = 0.05) {
  auto c = synthetic::SyntheticConfig::defaults(Setting::Max);
  c.L = 3;
  c.d = 3;
  c.n_train = 30;
  c.n_val = 10;
  c.n_test = 20;
  c.min_length = 8;
  c.max_length = 12;
  c.pool_size = 200;
  c.noise_sigma = noise;
  c.stay_concentration = 20;
  c.seed = seed;
  return synthetic::generate_dataset(c);
}

}  // namespace

TEST_CASE("trace is monotone and training is deterministic") {
  const auto data = small_max_data(7);
  TrainConfig config;
  config.restarts = 2;
  config.max_iterations = 60;
  config.seed = 3;
  const auto a = train(data.weak_split(Split::Train), config, ModelType::Max);
  const auto b = train(data.weak_split(Split::Train), config, ModelType::Max);
  REQUIRE_FALSE(a.trace.empty());
  for (std::size_t i = 1; i < a.trace.size(); ++i) CHECK(a.trace[i].objective <= a.trace[i - 1].objective + 1e-12);
  CHECK(a.trace.back().objective == doctest::Approx(a.final_objective).epsilon(1e-12));
  CHECK(a.final_objective < a.trace.front().objective);
  CHECK((a.params.beta - b.params.beta).norm() == 0.0);
  CHECK((a.params.W - b.params.W).norm() == 0.0);
  CHECK(a.params.w == b.params.w);
  CHECK(a.seed == b.seed);
  CHECK(a.restart == b.restart);
  CHECK(a.seed == derive_seed(3, static_cast<std::uint64_t>(a.restart)));
}

TEST_CASE("supervised chain recovers separable data") {
  // one feature equal to the level plus a little noise
  Rng rng(8);
  std::normal_distribution<double> noise(0.0, 0.05);
  const auto make = [&](int n) {
    Dataset ds;
    ds.scale.L = 4;
    ds.d = 1;
    for (int i = 0; i < n; ++i) {
      const int T = testing_support::uniform_int(rng, 5, 10);
      const auto h = testing_support::random_path(T, 4, rng);
      Bag bag;
      bag.sequence.id = "s" + std::to_string(i);
      bag.sequence.features.resize(T, 1);
      for (int t = 0; t < T; ++t) bag.sequence.features(t, 0) = h[t] + noise(rng);
      bag.y = *std::max_element(h.begin(), h.end());
      bag.observed.assign(h.begin(), h.end());
      ds.bags.push_back(std::move(bag));
    }
    return ds;
  };
  const auto train_set = make(30);
  const auto test_set = make(20);
  TrainConfig config;
  config.restarts = 1;
  config.alpha = 1e-4;
  const auto r = train_supervised_chain(train_set, config);
  const auto report = evaluate_model(test_set, r.params, ModelType::Chain, DecodeMode::Marginal);
  REQUIRE(report.pooled.icc);
  CHECK(*report.pooled.icc > 0.99);
  CHECK(report.pooled.mae < 0.01);
}

TEST_CASE("stronger regularization shrinks the weights") {
  const auto data = small_max_data(9);
  TrainConfig config;
  config.restarts = 1;
  double previous = std::numeric_limits<double>::infinity();
  for (double alpha : {1e-3, 1e-1, 10.0}) {
    config.alpha = alpha;
    const auto r = train_supervised_chain(data.full_split(Split::Train), config);
    const double norm = r.params.beta.squaredNorm() + r.params.W.squaredNorm();
    CHECK(norm < previous);
    previous = norm;
  }
}

TEST_CASE("grid search") {
  const auto data = small_max_data(10);
  TrainConfig config;
  config.restarts = 1;
  config.max_iterations = 40;
  const auto one = grid_search(data.weak_split(Split::Train), data.full_split(Split::Val), {0.05}, config,
                               ModelType::Max);
  CHECK(one.rows.size() == 1);
  CHECK(one.best_alpha == 0.05);
  const auto two = grid_search(data.weak_split(Split::Train), data.full_split(Split::Val), {1e-3, 1.0}, config,
                               ModelType::Max);
  REQUIRE(two.rows.size() == 2);
  const double best_icc = std::max(two.rows[0].validation.icc.value_or(-1), two.rows[1].validation.icc.value_or(-1));
  const auto& chosen = two.rows[two.best_alpha == 1e-3 ? 0 : 1];
  CHECK(chosen.validation.icc.value_or(-1) == best_icc);
  CHECK_THROWS_AS(grid_search(data.weak_split(Split::Train), data.full_split(Split::Val), {}, config,
                              ModelType::Max),
                  Error);
}

TEST_CASE("validation selects among restarts") {
  const auto data = small_max_data(11);
  TrainConfig config;
  config.restarts = 3;
  config.max_iterations = 30;
  const auto r = train(data.weak_split(Split::Train), config, ModelType::Max, &data.full_split(Split::Val));
  REQUIRE(r.validation_icc);
  for (int k = 0; k < 3; ++k) {
    TrainConfig single = config;
    single.restarts = 1;
    single.seed = derive_seed(config.seed, k);
    const auto start = initial_params(3, 3, ModelType::Max, single, single.seed);
    const auto run = train_once(data.weak_split(Split::Train), single, ModelType::Max, start);
    const auto icc = evaluate_model(data.full_split(Split::Val), run.params, ModelType::Max, config.decode_mode)
                         .pooled.icc.value_or(-1);
    CHECK(icc <= *r.validation_icc + 1e-12);
  }
}
