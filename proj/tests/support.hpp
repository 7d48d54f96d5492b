#pragma once

#include <random>
#include <string>
#include <vector>

#include "midorf/core.hpp"

namespace testing_support {

using midorf::Annotations;
using midorf::Bag;
using midorf::Dataset;
using midorf::ModelParams;
using midorf::RelLabel;
using midorf::Sequence;
using midorf::Setting;

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline ModelParams random_params(int L, int d, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  ModelParams p = ModelParams::zeros(L, d);
  for (int k = 0; k < d; ++k) p.beta(k) = gauss(rng);
  double b = uniform(rng, -1.5, -0.5);
  for (int l = 0; l < L - 1; ++l) {
    p.cutpoints(l) = b;
    b += uniform(rng, 0.3, 1.5);
  }
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) p.W(i, j) = gauss(rng);
  p.w = gauss(rng);
  return p;
}

inline Sequence random_sequence(int T, int d, Rng& rng, const std::string& id = "s") {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Sequence s;
  s.id = id;
  s.features.resize(T, d);
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < d; ++k) s.features(t, k) = gauss(rng);
  return s;
}

inline std::vector<int> random_path(int T, int L, Rng& rng) {
  std::vector<int> h(T);
  for (int& v : h) v = uniform_int(rng, 1, L);
  return h;
}

/// Keeps each frame label of `h` with probability `keep`.
inline Annotations random_evidence(const std::vector<int>& h, double keep, Rng& rng) {
  Annotations a(h.size());
  for (std::size_t t = 0; t < h.size(); ++t)
    if (uniform(rng, 0.0, 1.0) < keep) a[t] = h[t];
  return a;
}

/// Small dataset whose bag labels come from random latent paths, optionally
/// with partial (0 < keep < 1) or full (keep = 1) annotations.
inline Dataset random_dataset(Setting setting, int n, int L, int d, int T_min, int T_max, Rng& rng,
                              double keep = 0.0) {
  Dataset ds;
  ds.scale.L = L;
  ds.setting = setting;
  ds.d = d;
  for (int i = 0; i < n; ++i) {
    const int T = uniform_int(rng, T_min, T_max);
    Bag bag;
    bag.sequence = random_sequence(T, d, rng, "b" + std::to_string(i));
    const auto h = random_path(T, L, rng);
    if (setting == Setting::Max)
      bag.y = *std::max_element(h.begin(), h.end());
    else
      bag.y = midorf::trend_of(h);
    if (keep > 0.0) bag.observed = random_evidence(h, keep, rng);
    ds.bags.push_back(std::move(bag));
  }
  return ds;
}

}  // namespace testing_support
