#include "midorf/oracle.hpp"

#include <algorithm>

#include "midorf/potentials.hpp"

namespace midorf::oracle {

double accurate_log_sum(std::vector<double> terms) {
  std::erase(terms, kNegInf);
  if (terms.empty()) return kNegInf;
  const double m = *std::max_element(terms.begin(), terms.end());
  std::vector<double> scaled(terms.size());
  std::transform(terms.begin(), terms.end(), scaled.begin(),
                 [m](double e) { return std::exp(e - m); });
  std::sort(scaled.begin(), scaled.end());
  // Neumaier summation, smallest first
  double sum = 0.0;
  double comp = 0.0;
  for (double v : scaled) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return m + std::log(sum + comp);
}

double chain_energy(const Sequence& seq, const std::vector<int>& h, const ModelParams& params) {
  double e = 0.0;
  for (std::size_t t = 0; t < h.size(); ++t)
    e += potentials::node_log_potential(Eigen::VectorXd(seq.features.row(t).transpose()), params,
                                        h[t]);
  for (std::size_t t = 0; t + 1 < h.size(); ++t)
    e += potentials::edge_f(params.W(h[t] - 1, h[t + 1] - 1));
  return e;
}

double max_energy(const Sequence& seq, const std::vector<int>& h, int y, const ModelParams& params) {
  const int top = *std::max_element(h.begin(), h.end());
  if (top != y) return kNegInf;
  const auto matches = std::count(h.begin(), h.end(), y);
  return chain_energy(seq, h, params) + params.w * static_cast<double>(matches);
}

bool satisfies_trend(const std::vector<int>& h, RelLabel y) {
  bool exists_up = false;
  bool exists_down = false;
  bool all_nondecreasing = true;
  bool all_nonincreasing = true;
  bool all_equal = true;
  for (std::size_t t = 0; t + 1 < h.size(); ++t) {
    if (h[t] < h[t + 1]) exists_up = true;
    if (h[t] > h[t + 1]) exists_down = true;
    if (!(h[t] <= h[t + 1])) all_nondecreasing = false;
    if (!(h[t] >= h[t + 1])) all_nonincreasing = false;
    if (h[t] != h[t + 1]) all_equal = false;
  }
  switch (y) {
    case RelLabel::Inc: return exists_up && all_nondecreasing;
    case RelLabel::Dec: return exists_down && all_nonincreasing;
    case RelLabel::Both: return exists_up && exists_down;
    case RelLabel::None: return all_equal;
  }
  return false;
}

double rel_energy(const Sequence& seq, const std::vector<int>& h, RelLabel y,
                  const ModelParams& params) {
  if (!satisfies_trend(h, y)) return kNegInf;
  return chain_energy(seq, h, params);
}

namespace {

bool consistent(const std::vector<int>& h, const Annotations& evidence) {
  if (evidence.empty()) return true;
  for (std::size_t t = 0; t < h.size(); ++t)
    if (evidence[t] && *evidence[t] != h[t]) return false;
  return true;
}

// Summed left to right: node, then edge and node per step.
double lattice_path_sum(const chain::AugmentedLattice& lat, const std::vector<int>& states) {
  double sum = lat.node(0, states[0]);
  for (int t = 1; t < lat.T; ++t) {
    sum += lat.edge(t - 1)(states[t - 1], states[t]);
    sum += lat.node(t, states[t]);
  }
  return sum;
}

template <typename EnergyFn>
Enumeration enumerate(int T, int width, EnergyFn&& energy) {
  std::vector<std::vector<int>> paths;
  std::vector<double> energies;
  Enumeration out;
  for_each_path(T, width, [&](const std::vector<int>& h) {
    const double e = energy(h);
    if (e == kNegInf) return;
    if (e > out.max_score) {
      out.max_score = e;
      out.argmax_path = h;
    }
    paths.push_back(h);
    energies.push_back(e);
  });
  out.log_sum = accurate_log_sum(energies);
  out.marginals = RowMatrix::Zero(T, width);
  if (out.log_sum == kNegInf) return out;
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> acc =
      Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>::Zero(T, width);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const long double p = std::exp(static_cast<long double>(energies[i]) - out.log_sum);
    for (int t = 0; t < T; ++t) acc(t, paths[i][t] - 1) += p;
  }
  out.marginals = acc.cast<double>();
  return out;
}

}  // namespace

Enumeration enumerate_energy_max(const Sequence& seq, int y, const ModelParams& params,
                                 const Annotations& evidence) {
  return enumerate(seq.length(), params.levels(), [&](const std::vector<int>& h) {
    return consistent(h, evidence) ? max_energy(seq, h, y, params) : kNegInf;
  });
}

Enumeration enumerate_energy_rel(const Sequence& seq, RelLabel y, const ModelParams& params,
                                 const Annotations& evidence) {
  return enumerate(seq.length(), params.levels(), [&](const std::vector<int>& h) {
    return consistent(h, evidence) ? rel_energy(seq, h, y, params) : kNegInf;
  });
}

Enumeration enumerate_energy_chain(const Sequence& seq, const ModelParams& params,
                                   const Annotations& evidence) {
  return enumerate(seq.length(), params.levels(), [&](const std::vector<int>& h) {
    return consistent(h, evidence) ? chain_energy(seq, h, params) : kNegInf;
  });
}

Enumeration enumerate_lattice(const chain::AugmentedLattice& lat) {
  // States are enumerated 1-based internally and shifted back for output.
  auto out = enumerate(lat.T, lat.S, [&](const std::vector<int>& h) {
    std::vector<int> states(h.size());
    for (std::size_t t = 0; t < h.size(); ++t) states[t] = h[t] - 1;
    return lattice_path_sum(lat, states);
  });
  for (int& s : out.argmax_path) --s;
  return out;
}

double best_completion_score(const chain::AugmentedLattice& lat, const std::vector<int>& levels,
                             int L, int n_aux) {
  double best = kNegInf;
  for_each_path(lat.T, n_aux, [&](const std::vector<int>& aux) {
    std::vector<int> states(levels.size());
    for (std::size_t t = 0; t < levels.size(); ++t) states[t] = (aux[t] - 1) * L + levels[t] - 1;
    best = std::max(best, lattice_path_sum(lat, states));
  });
  return best;
}

}  // namespace midorf::oracle
