#pragma once

// Brute-force references shared by the unit tests.

#include <functional>
#include <vector>

#include "kpzlab/lattice.hpp"

namespace oracle {

using kpzlab::Grid;
using kpzlab::LatticePoint;

/// Calls fn(path) for every up-right path from p to q, as the vertex list.
inline void for_each_path(LatticePoint p, LatticePoint q, const std::function<void(const std::vector<LatticePoint>&)>& fn) {
  std::vector<LatticePoint> path{p};
  std::function<void(LatticePoint)> walk = [&](LatticePoint u) {
    if (u == q) {
      fn(path);
      return;
    }
    for (LatticePoint step : {kpzlab::e1, kpzlab::e2}) {
      const LatticePoint next = u + step;
      if (!kpzlab::precedes(next, q)) continue;
      path.push_back(next);
      walk(next);
      path.pop_back();
    }
  };
  walk(p);
}

/// Weight of a vertex list, first vertex excluded.
inline double weight(const Grid<double>& X, const std::vector<LatticePoint>& path) {
  double s = 0;
  for (std::size_t k = 1; k < path.size(); ++k) s += X(path[k]);
  return s;
}

struct Best {
  double value = -1;
  int maximisers = 0;
  std::vector<LatticePoint> path;
};

/// Maximum over all paths, with the number of maximisers.
inline Best enumerate(const Grid<double>& X, LatticePoint p, LatticePoint q) {
  Best best;
  for_each_path(p, q, [&](const std::vector<LatticePoint>& path) {
    const double w = weight(X, path);
    if (best.maximisers == 0 || w > best.value) {
      best = {w, 1, path};
    } else if (w == best.value) {
      ++best.maximisers;
    }
  });
  return best;
}

}  // namespace oracle
