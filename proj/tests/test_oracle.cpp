#include <doctest.h>

#include <set>

#include "midorf/chain.hpp"
#include "midorf/oracle.hpp"
#include "support.hpp"

using namespace midorf;

TEST_CASE("path enumeration visits every path once") {
  int count = 0;
  std::set<std::vector<int>> seen;
  oracle::for_each_path(3, 4, [&](const std::vector<int>& h) {
    ++count;
    seen.insert(h);
  });
  CHECK(count == 64);
  CHECK(seen.size() == 64);
  CHECK_THROWS_AS(oracle::for_each_path(30, 4, [](const std::vector<int>&) {}), Error);
}

TEST_CASE("accurate log sum") {
  CHECK(oracle::accurate_log_sum({}) == kNegInf);
  CHECK(oracle::accurate_log_sum({kNegInf, 0.0}) == 0.0);
  CHECK(oracle::accurate_log_sum({0.0, 0.0, 0.0}) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  // one large term and many tiny ones
  std::vector<double> terms(1000, -40.0);
  terms.push_back(0.0);
  CHECK(oracle::accurate_log_sum(terms) ==
        doctest::Approx(std::log1p(1000 * std::exp(-40.0))).epsilon(1e-15));
}

TEST_CASE("hand-computed two-frame instance") {
  // T=2, L=2, beta=0, cut-point 0: every node probability is 1/2.
  ModelParams p = ModelParams::zeros(2, 1);
  p.W << 0.0, 1.0, -1.0, 2.0;
  p.w = 0.5;
  Sequence seq;
  seq.features = Eigen::MatrixXd::Zero(2, 1);
  const double node = 2 * std::log(0.5);
  auto f = [](double s) { return -std::log1p(std::exp(-s)); };
  // y = 1: only [1,1], reward 2w
  const auto e1 = oracle::enumerate_energy_max(seq, 1, p);
  CHECK(e1.log_sum == doctest::Approx(node + f(0.0) + 1.0).epsilon(1e-14));
  // y = 2: [1,2], [2,1] (one match each) and [2,2] (two matches)
  const double z2 = std::exp(node + f(1.0) + 0.5) + std::exp(node + f(-1.0) + 0.5) +
                    std::exp(node + f(2.0) + 1.0);
  CHECK(oracle::enumerate_energy_max(seq, 2, p).log_sum == doctest::Approx(std::log(z2)).epsilon(1e-14));

  const auto inc = oracle::enumerate_energy_rel(seq, RelLabel::Inc, p);
  CHECK(inc.log_sum == doctest::Approx(node + f(1.0)).epsilon(1e-14));
  CHECK(inc.argmax_path == std::vector<int>{1, 2});
  CHECK(inc.marginals(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("trend partition property of the oracle") {
  testing_support::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int T = testing_support::uniform_int(rng, 1, 5);
    const int L = testing_support::uniform_int(rng, 2, 4);
    const auto p = testing_support::random_params(L, 2, rng);
    const auto seq = testing_support::random_sequence(T, 2, rng);
    std::vector<double> parts;
    for (RelLabel y : kRelLabels) parts.push_back(oracle::enumerate_energy_rel(seq, y, p).log_sum);
    const double total = oracle::enumerate_energy_chain(seq, p).log_sum;
    CHECK(oracle::accurate_log_sum(parts) == doctest::Approx(total).epsilon(1e-10));

    const auto chain = oracle::enumerate_energy_chain(seq, p);
    for (int t = 0; t < T; ++t)
      CHECK(chain.marginals.row(t).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("evidence restricts the enumerated paths") {
  testing_support::Rng rng(2);
  const auto p = testing_support::random_params(3, 2, rng);
  const auto seq = testing_support::random_sequence(4, 2, rng);
  const Annotations ev = {std::nullopt, 2, std::nullopt, std::nullopt};
  const auto e = oracle::enumerate_energy_chain(seq, p, ev);
  CHECK(e.marginals(1, 1) == doctest::Approx(1.0));
  CHECK(e.argmax_path[1] == 2);
  CHECK(e.log_sum < oracle::enumerate_energy_chain(seq, p).log_sum);
}
