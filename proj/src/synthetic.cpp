#include "midorf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "midorf/io.hpp"
#include "midorf/potentials.hpp"

namespace midorf::synthetic {

namespace {

using Rng = std::mt19937_64;

constexpr std::uint64_t kMasterStream = 0;
constexpr std::uint64_t kSplitStream = 1;  // + split index
constexpr std::uint64_t kPartialStream = 99;

// Dirichlet rows drawn as normalized Gamma variates.
RowMatrix dirichlet_rows(int L, double stay, double jump, Rng& rng) {
  std::gamma_distribution<double> diag(stay, 1.0);
  std::gamma_distribution<double> adjacent(1.0, 1.0);
  std::gamma_distribution<double> far(jump, 1.0);
  RowMatrix P(L, L);
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      const int gap = std::abs(i - j);
      P(i, j) = gap == 0 ? diag(rng) : gap == 1 ? adjacent(rng) : far(rng);
    }
    P.row(i) /= P.row(i).sum();
  }
  return P;
}

/// Keeps only the transitions allowed by a monotone direction and renormalizes.
RowMatrix monotone_transition(const RowMatrix& P, RelLabel dir) {
  RowMatrix M = P;
  const int L = static_cast<int>(P.rows());
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j)
      if ((dir == RelLabel::Inc && j < i) || (dir == RelLabel::Dec && j > i)) M(i, j) = 0.0;
    M.row(i) /= M.row(i).sum();
  }
  return M;
}

int draw_row(const RowMatrix& P, int from, Rng& rng) {
  const auto row = P.row(from);
  std::discrete_distribution<int> pick(row.data(), row.data() + row.size());
  return pick(rng);
}

// 0-based levels; first frame is `start`.
void extend_path(std::vector<int>& path, const RowMatrix& P, int start, int T, Rng& rng) {
  int level = start;
  for (int t = 0; t < T; ++t) {
    if (t > 0) level = draw_row(P, level, rng);
    path.push_back(level);
  }
}

struct Emitter {
  std::vector<std::discrete_distribution<int>> per_level;

  Emitter(const RowMatrix& pool, const ModelParams& gen) {
    const int L = gen.levels();
    const Eigen::VectorXd z = pool * gen.beta;
    for (int l = 1; l <= L; ++l) {
      Eigen::VectorXd logp(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i)
        logp(i) = potentials::node_log_potential(z(i), gen, l);
      const Eigen::VectorXd weights = (logp.array() - logp.maxCoeff()).exp();
      per_level.emplace_back(weights.data(), weights.data() + weights.size());
    }
  }
};

struct Generated {
  Bag weak;
  Bag full;
  std::vector<int> pool_index;
};

Generated emit_sequence(const std::string& id, const std::vector<int>& path0, BagLabel y,
                        const RowMatrix& pool, Emitter& emitter, double noise, Rng& rng) {
  const int T = static_cast<int>(path0.size());
  const int d = static_cast<int>(pool.cols());
  std::normal_distribution<double> gauss(0.0, noise);
  Generated g;
  g.weak.sequence.id = id;
  g.weak.sequence.features.resize(T, d);
  g.weak.y = y;
  for (int t = 0; t < T; ++t) {
    const int idx = emitter.per_level[path0[t]](rng);
    g.pool_index.push_back(idx);
    for (int k = 0; k < d; ++k) g.weak.sequence.features(t, k) = pool(idx, k) + gauss(rng);
  }
  g.full = g.weak;
  g.full.observed.resize(T);
  for (int t = 0; t < T; ++t) g.full.observed[t] = path0[t] + 1;
  return g;
}

}  // namespace

SyntheticConfig SyntheticConfig::defaults(Setting setting) {
  SyntheticConfig c;
  c.setting = setting;
  if (setting == Setting::Max) {
    // Dirichlet(1) rows wander through every level within 50 frames, so
    // nearly every bag would be labeled L.
    c.stay_concentration = 300.0;
    c.jump_concentration = 0.1;
  } else {
    c.min_length = 15;
    c.max_length = 25;
  }
  return c;
}

void validate(const SyntheticConfig& c) {
  if (c.L < 2) throw Error("synthetic config: L must be at least 2");
  if (c.d < 1) throw Error("synthetic config: d must be at least 1");
  if (c.min_length < 1 || c.max_length < c.min_length)
    throw Error("synthetic config: empty length range");
  if (c.n_train < 1 || c.n_val < 1 || c.n_test < 1)
    throw Error("synthetic config: every split needs at least one sequence");
  if (c.pool_size < 1) throw Error("synthetic config: empty feature pool");
  if (!(c.noise_sigma >= 0.0)) throw Error("synthetic config: negative noise");
  if (!(c.stay_concentration > 0.0) || !(c.jump_concentration > 0.0))
    throw Error("synthetic config: Dirichlet concentrations must be positive");
}

SyntheticData generate_dataset(const SyntheticConfig& config) {
  validate(config);
  const int L = config.L;
  const int d = config.d;
  SyntheticData out;
  out.config = config;

  Rng master(derive_seed(config.seed, kMasterStream));
  out.transition = dirichlet_rows(L, config.stay_concentration, config.jump_concentration, master);

  std::normal_distribution<double> std_normal(0.0, 1.0);
  out.generator = ModelParams::zeros(L, d);
  for (int k = 0; k < d; ++k) out.generator.beta(k) = std_normal(master);
  for (int l = 0; l < L - 1; ++l) out.generator.cutpoints(l) = std_normal(master);
  std::sort(out.generator.cutpoints.data(), out.generator.cutpoints.data() + L - 1);
  if (config.scale_cutpoints) out.generator.cutpoints *= out.generator.beta.norm();

  out.pool.resize(config.pool_size, d);
  for (int i = 0; i < config.pool_size; ++i)
    for (int k = 0; k < d; ++k) out.pool(i, k) = std_normal(master);
  Emitter emitter(out.pool, out.generator);

  const RowMatrix inc = monotone_transition(out.transition, RelLabel::Inc);
  const RowMatrix dec = monotone_transition(out.transition, RelLabel::Dec);
  const int counts[3] = {config.n_train, config.n_val, config.n_test};

  for (int s = 0; s < 3; ++s) {
    const auto split = static_cast<Split>(s);
    Dataset& weak = out.weak[s];
    weak.scale.L = L;
    weak.setting = config.setting;
    weak.d = d;
    weak.split = split;
    Dataset& full = out.full[s] = weak;

    const std::uint64_t split_seed = derive_seed(config.seed, kSplitStream + s);
    for (int i = 0; i < counts[s]; ++i) {
      Rng rng(derive_seed(split_seed, static_cast<std::uint64_t>(i)));
      std::uniform_int_distribution<int> length(config.min_length, config.max_length);
      std::uniform_int_distribution<int> level(0, L - 1);
      std::vector<int> path;
      BagLabel y;
      if (config.setting == Setting::Max) {
        extend_path(path, out.transition, level(rng), length(rng), rng);
        y = *std::max_element(path.begin(), path.end()) + 1;
      } else if (split == Split::Train) {
        const bool up = std::bernoulli_distribution(0.5)(rng);
        extend_path(path, up ? inc : dec, level(rng), length(rng), rng);
        y = trend_of(path);
      } else {
        // increasing segment, then a decreasing one continuing from its last level
        extend_path(path, inc, level(rng), length(rng), rng);
        const int last = path.back();
        const int T2 = length(rng);
        std::vector<int> tail;
        extend_path(tail, dec, draw_row(dec, last, rng), T2, rng);
        path.insert(path.end(), tail.begin(), tail.end());
        y = trend_of(path);
      }
      const std::string id = std::string(to_string(split)) + "_" + std::to_string(i);
      auto g = emit_sequence(id, path, y, out.pool, emitter, config.noise_sigma, rng);
      weak.bags.push_back(std::move(g.weak));
      full.bags.push_back(std::move(g.full));
      out.pool_index[s].push_back(std::move(g.pool_index));
    }
  }
  return out;
}

std::uint64_t suite_seed(std::uint64_t base_seed, int index) {
  return derive_seed(base_seed, static_cast<std::uint64_t>(index));
}

std::vector<SyntheticData> generate_benchmark_suite(std::uint64_t base_seed, int count,
                                                    const SyntheticConfig& base_config) {
  if (count < 1) throw Error("benchmark suite needs count >= 1");
  std::vector<SyntheticData> suite;
  for (int i = 0; i < count; ++i) {
    SyntheticConfig c = base_config;
    c.seed = suite_seed(base_seed, i);
    suite.push_back(generate_dataset(c));
  }
  return suite;
}

Dataset subsample_annotations(const Dataset& full, std::uint64_t seed,
                              std::optional<double> fraction) {
  if (fraction && !(*fraction > 0.0 && *fraction <= 1.0))
    throw Error("annotation fraction must lie in (0, 1]");
  Dataset out = full;
  for (std::size_t i = 0; i < out.bags.size(); ++i) {
    Bag& bag = out.bags[i];
    const int T = bag.sequence.length();
    if (!fully_annotated(bag.observed, T))
      throw Error("bag '" + bag.sequence.id + "' lacks full frame labels");
    const int keep =
        fraction ? std::clamp(static_cast<int>(std::ceil(*fraction * T)), 1, T) : 1;
    std::vector<int> order(T);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, i));
    std::shuffle(order.begin(), order.end(), rng);
    Annotations kept(T);
    for (int k = 0; k < keep; ++k) kept[order[k]] = bag.observed[order[k]];
    bag.observed = std::move(kept);
  }
  return out;
}

Dataset partial_train(const SyntheticData& data) {
  return subsample_annotations(data.full[0], derive_seed(data.config.seed, kPartialStream));
}

nlohmann::json metadata(const SyntheticData& data) {
  using nlohmann::json;
  const auto& c = data.config;
  json cfg = {{"setting", to_string(c.setting)},
              {"L", c.L},
              {"d", c.d},
              {"n_train", c.n_train},
              {"n_val", c.n_val},
              {"n_test", c.n_test},
              {"min_length", c.min_length},
              {"max_length", c.max_length},
              {"noise_sigma", c.noise_sigma},
              {"pool_size", c.pool_size},
              {"stay_concentration", c.stay_concentration},
              {"jump_concentration", c.jump_concentration},
              {"scale_cutpoints", c.scale_cutpoints},
              {"seed", c.seed}};
  json transition = json::array();
  for (int i = 0; i < data.transition.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < data.transition.cols(); ++j) row.push_back(data.transition(i, j));
    transition.push_back(row);
  }
  json truth = json::object();
  for (int s = 0; s < 3; ++s) {
    json split = json::object();
    for (const auto& bag : data.full[s].bags) split[bag.sequence.id] = annotated_path(bag.observed);
    truth[std::string(to_string(static_cast<Split>(s)))] = split;
  }
  return {{"config", cfg},
          {"transition_sampling", "dirichlet rows (concentration stay_concentration on the diagonal, 1 for adjacent levels, jump_concentration otherwise), uniform initial level"},
          {"transition", transition},
          {"generator",
           {{"beta", std::vector<double>(data.generator.beta.data(),
                                         data.generator.beta.data() + data.generator.beta.size())},
            {"cutpoints",
             std::vector<double>(data.generator.cutpoints.data(),
                                 data.generator.cutpoints.data() + data.generator.cutpoints.size())}}},
          {"rel_training_labels",
           c.setting == Setting::Rel ? "INC/DEC segments, NONE when constant, BOTH never"
                                     : "n/a"},
          {"partial_annotation", "train_po.json: one frame per sequence"},
          {"ground_truth", truth}};
}

void write_dataset_files(const SyntheticData& data, const std::filesystem::path& dir) {
  for (int s = 0; s < 3; ++s) {
    const std::string name(to_string(static_cast<Split>(s)));
    io::write_dataset(dir / (name + ".json"), data.weak[s]);
    io::write_dataset(dir / (name + "_full.json"), data.full[s]);
  }
  io::write_dataset(dir / "train_po.json", partial_train(data));
  io::write_json(dir / "meta.json", metadata(data));
}

}  // namespace midorf::synthetic
