#include <doctest.h>

#include "midorf/model_rel.hpp"
#include "midorf/oracle.hpp"
#include "support.hpp"

using namespace midorf;
namespace mr = midorf::rel_model;
using testing_support::Rng;

TEST_CASE("single frame is feasible only as NONE") {
  Rng rng(1);
  const auto p = testing_support::random_params(3, 2, rng);
  const auto seq = testing_support::random_sequence(1, 2, rng);
  for (RelLabel y : kRelLabels) {
    const auto lat = mr::build_lattice(seq, y, p);
    REQUIRE(lat.S == 12);
    const bool feasible = chain::log_partition(lat) > kNegInf;
    CHECK(feasible == (y == RelLabel::None));
    if (y == RelLabel::None)
      for (int l = 1; l <= 3; ++l) CHECK(std::isfinite(lat.node(0, joint_state(l, 0, 3))));
  }
  const auto post = mr::bag_posterior(seq, p);
  CHECK(post(static_cast<int>(RelLabel::None)) == 1.0);
}

TEST_CASE("hand paths") {
  Rng rng(2);
  const auto p = testing_support::random_params(2, 2, rng);
  const auto seq = testing_support::random_sequence(3, 2, rng);
  const std::vector<int> h = {1, 2, 2};
  double e = potentials::edge_f(p.W(0, 1)) + potentials::edge_f(p.W(1, 1));
  for (int t = 0; t < 3; ++t) e += potentials::node_log_potential(seq.features.row(t).transpose(), p, h[t]);
  CHECK(oracle::best_completion_score(mr::build_lattice(seq, RelLabel::Inc, p), h, 2, mr::kAuxStates) ==
        doctest::Approx(e).epsilon(1e-13));
  CHECK(oracle::best_completion_score(mr::build_lattice(seq, RelLabel::Dec, p), h, 2, mr::kAuxStates) ==
        kNegInf);

  const auto two = testing_support::random_sequence(2, 2, rng);
  const std::vector<int> flat = {2, 2};
  CHECK(oracle::best_completion_score(mr::build_lattice(two, RelLabel::None, p), flat, 2, mr::kAuxStates) >
        kNegInf);
  CHECK(oracle::best_completion_score(mr::build_lattice(two, RelLabel::Inc, p), flat, 2, mr::kAuxStates) ==
        kNegInf);
}

TEST_CASE("transition cases") {
  using enum RelLabel;
  CHECK(mr::trend_step_allowed(None, None, 2, 2));
  CHECK_FALSE(mr::trend_step_allowed(None, None, 2, 3));
  CHECK(mr::trend_step_allowed(None, Inc, 2, 3));
  CHECK_FALSE(mr::trend_step_allowed(None, Inc, 2, 2));
  CHECK(mr::trend_step_allowed(None, Dec, 3, 2));
  CHECK(mr::trend_step_allowed(Inc, Inc, 2, 2));
  CHECK(mr::trend_step_allowed(Inc, Inc, 2, 3));
  CHECK_FALSE(mr::trend_step_allowed(Inc, Inc, 3, 2));
  CHECK(mr::trend_step_allowed(Inc, Both, 3, 2));
  CHECK(mr::trend_step_allowed(Dec, Dec, 3, 3));
  CHECK(mr::trend_step_allowed(Dec, Both, 2, 3));
  CHECK_FALSE(mr::trend_step_allowed(Dec, Both, 3, 2));
  CHECK(mr::trend_step_allowed(Both, Both, 1, 4));
  CHECK_FALSE(mr::trend_step_allowed(Both, Inc, 1, 2));
  CHECK_FALSE(mr::trend_step_allowed(Inc, Dec, 2, 1));
  CHECK_FALSE(mr::trend_step_allowed(Inc, None, 2, 2));
}

TEST_CASE("each path is admitted by exactly one label") {
  Rng rng(3);
  for (int T = 1; T <= 6; ++T) {
    for (int L = 2; L <= 4; ++L) {
      if (std::pow(L, T) * std::pow(4, T) > 400000) continue;
      const auto p = testing_support::random_params(L, 2, rng);
      const auto seq = testing_support::random_sequence(T, 2, rng);
      std::vector<chain::AugmentedLattice> lats;
      for (RelLabel y : kRelLabels) lats.push_back(mr::build_lattice(seq, y, p));
      oracle::for_each_path(T, L, [&](const std::vector<int>& h) {
        int admitted = 0;
        for (RelLabel y : kRelLabels) {
          const double best =
              oracle::best_completion_score(lats[static_cast<int>(y)], h, L, mr::kAuxStates);
          if (best == kNegInf) continue;
          ++admitted;
          CHECK(oracle::satisfies_trend(h, y));
          CHECK(best == doctest::Approx(oracle::chain_energy(seq, h, p)).epsilon(1e-12));
        }
        CHECK(admitted == 1);
      });
    }
  }
}

TEST_CASE("label partitions and marginals match enumeration") {
  Rng rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    const int T = testing_support::uniform_int(rng, 1, 6);
    const int L = testing_support::uniform_int(rng, 2, 4);
    const auto p = testing_support::random_params(L, 3, rng);
    const auto seq = testing_support::random_sequence(T, 3, rng);
    const auto logZ = mr::label_log_partitions(seq, p);
    std::vector<double> parts;
    for (RelLabel y : kRelLabels) {
      const auto ref = oracle::enumerate_energy_rel(seq, y, p);
      const double got = logZ(static_cast<int>(y));
      if (ref.log_sum == kNegInf)
        CHECK(got == kNegInf);
      else
        CHECK(std::abs(got - ref.log_sum) < 1e-10);
      parts.push_back(ref.log_sum);
    }
    const double total = oracle::enumerate_energy_chain(seq, p).log_sum;
    double lattice_total = kNegInf;
    for (int k = 0; k < kNumRelLabels; ++k) lattice_total = chain::log_sum_exp(lattice_total, logZ(k));
    CHECK(std::abs(lattice_total - total) < 1e-10 * std::max(1.0, std::abs(total)));

    const auto post = mr::bag_posterior(seq, p);
    CHECK(post.sum() == doctest::Approx(1.0).epsilon(1e-12));

    RowMatrix expected = RowMatrix::Zero(T, L);
    for (RelLabel y : kRelLabels) {
      const double w = std::exp(parts[static_cast<int>(y)] - total);
      if (w > 0) expected += w * oracle::enumerate_energy_rel(seq, y, p).marginals;
    }
    CHECK((mr::predict_frames(seq, p, DecodeMode::Marginal).posterior - expected).cwiseAbs().maxCoeff() <
          1e-10);

    const auto h = testing_support::random_path(T, L, rng);
    Bag bag{seq, trend_of(h), testing_support::random_evidence(h, 0.3, rng)};
    const auto lik = mr::loglik_and_marginals(bag, p);
    const auto clamped = oracle::enumerate_energy_rel(seq, bag.rel_label(), p, bag.observed);
    CHECK(std::abs(lik.loglik - (clamped.log_sum - total)) < 1e-10);
    CHECK((collapse_levels(lik.clamped, L).unary - clamped.marginals).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("NONE clamping puts no mass on level changes") {
  Rng rng(5);
  const auto p = testing_support::random_params(3, 2, rng);
  const auto seq = testing_support::random_sequence(5, 2, rng);
  const auto lik = mr::loglik_and_marginals(Bag{seq, RelLabel::None, {}}, p);
  const auto m = collapse_levels(lik.clamped, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(m.pair_sum(i, j) == 0.0);
}

TEST_CASE("constant confident observations favour NONE") {
  ModelParams p = ModelParams::zeros(3, 2);
  p.beta << 10.0, -0.5;
  p.cutpoints << -1.0, 1.0;
  Sequence seq;
  seq.features = Eigen::MatrixXd::Zero(6, 2);
  seq.features.col(0).setConstant(0.3);
  const auto post = mr::bag_posterior(seq, p);
  Eigen::Index best = 0;
  post.maxCoeff(&best);
  CHECK(best == static_cast<int>(RelLabel::None));
  // the oracle agrees
  std::vector<double> ref;
  for (RelLabel y : kRelLabels) ref.push_back(oracle::enumerate_energy_rel(seq, y, p).log_sum);
  CHECK(std::max_element(ref.begin(), ref.end()) - ref.begin() == static_cast<int>(RelLabel::None));
}

TEST_CASE("clamped viterbi follows the trend") {
  Rng rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const int T = testing_support::uniform_int(rng, 2, 6);
    const int L = testing_support::uniform_int(rng, 2, 4);
    const auto p = testing_support::random_params(L, 2, rng);
    const auto seq = testing_support::random_sequence(T, 2, rng);
    for (RelLabel y : kRelLabels) {
      if (T < 3 && y == RelLabel::Both) continue;
      const auto path = mr::clamped_viterbi(seq, y, p);
      CHECK(trend_of(path) == y);
      CHECK(oracle::rel_energy(seq, path, y, p) ==
            doctest::Approx(oracle::enumerate_energy_rel(seq, y, p).max_score).epsilon(1e-12));
    }
  }
}

TEST_CASE("increasing projections decode to a non-decreasing path") {
  ModelParams p = ModelParams::zeros(4, 1);
  p.beta(0) = 8.0;
  p.cutpoints << -4.0, 0.0, 4.0;
  Sequence seq;
  seq.features.resize(8, 1);
  for (int t = 0; t < 8; ++t) seq.features(t, 0) = -1.0 + 0.3 * t;
  const auto path = mr::clamped_viterbi(seq, RelLabel::Inc, p);
  CHECK(std::is_sorted(path.begin(), path.end()));
  CHECK(path.front() < path.back());
}
