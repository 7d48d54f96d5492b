#pragma once

#include <cmath>

namespace midorf::oracle {

template <typename Fn>
void for_each_path(int T, int L, Fn&& fn) {
  if (T < 1 || L < 1) throw Error("oracle: empty path space");
  if (std::pow(static_cast<double>(L), T) > static_cast<double>(kMaxPaths))
    throw Error("oracle: path space exceeds the enumeration guard");
  std::vector<int> path(T, 1);
  while (true) {
    fn(static_cast<const std::vector<int>&>(path));
    int t = T - 1;
    while (t >= 0 && path[t] == L) path[t--] = 1;
    if (t < 0) return;
    ++path[t];
  }
}

}  // namespace midorf::oracle
