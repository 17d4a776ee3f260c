#pragma once

// Max-plus dynamic programming for exponential last passage percolation.
//
// Passage times exclude the weight of the first vertex: T(p, p) = 0 and
// T(p, q) = max over up-right paths p -> q of the weight sum over the path
// without p. With weights on the 2^-32 grid every value below 2^21 is exact,
// so comparisons between differently ordered sums are bit-exact.

#include <cstdint>
#include <limits>
#include <vector>

#include "kpzlab/lattice.hpp"

namespace kpzlab {

enum class Orientation { from_source, to_sink };

template <typename Scalar>
struct BasicPassageTable {
  LatticePoint anchor;
  Orientation orientation = Orientation::from_source;
  Window window;  // rectangle on which values are defined
  Grid<Scalar> values;

  bool defined(LatticePoint p) const { return window.contains(p); }
  /// -inf outside the admissible cone.
  Scalar operator()(LatticePoint p) const {
    return defined(p) ? values(p) : -std::numeric_limits<Scalar>::infinity();
  }
};

using PassageTable = BasicPassageTable<double>;

/// Passage times from `anchor` to every p >= anchor in `window` (from_source),
/// or from every p <= anchor to `anchor` (to_sink).
template <typename Scalar>
BasicPassageTable<Scalar> passage_table(const Grid<Scalar>& weights, LatticePoint anchor, Orientation orientation,
                                        const Window& window) {
  const Window field = window.enlarged();
  if (!field.contains(anchor)) throw Error(Errc::precondition, "anchor outside window " + describe(field));
  const Window domain = orientation == Orientation::from_source ? Window{anchor, field.hi, 0}
                                                                 : Window{field.lo, anchor, 0};
  if (!weights.window().contains(domain))
    throw Error(Errc::precondition, "weights do not cover " + describe(domain));

  BasicPassageTable<Scalar> table{anchor, orientation, domain, Grid<Scalar>(domain, Scalar(0))};
  auto& out = table.values.array();
  const Eigen::Index rows = out.rows();
  const Eigen::Index cols = out.cols();
  const LatticePoint origin = weights.window().lo;
  const auto& x = weights.array();
  const Eigen::Index di = domain.lo.i - origin.i;
  const Eigen::Index dj = domain.lo.j - origin.j;

  // borders first so the inner loops are branch free
  if (orientation == Orientation::from_source) {
    for (Eigen::Index r = 1; r < rows; ++r) out(r, 0) = out(r - 1, 0) + x(r + di, dj);
    for (Eigen::Index c = 1; c < cols; ++c) {
      out(0, c) = out(0, c - 1) + x(di, c + dj);
      for (Eigen::Index r = 1; r < rows; ++r)
        out(r, c) = std::max(out(r - 1, c), out(r, c - 1)) + x(r + di, c + dj);
    }
  } else {
    const Eigen::Index R = rows - 1;
    const Eigen::Index C = cols - 1;
    for (Eigen::Index r = R - 1; r >= 0; --r) out(r, C) = x(r + 1 + di, C + dj) + out(r + 1, C);
    for (Eigen::Index c = C - 1; c >= 0; --c) {
      out(R, c) = x(R + di, c + 1 + dj) + out(R, c + 1);
      for (Eigen::Index r = R - 1; r >= 0; --r)
        out(r, c) = std::max(x(r + 1 + di, c + dj) + out(r + 1, c), x(r + di, c + 1 + dj) + out(r, c + 1));
    }
  }
  return table;
}

/// A monotone nearest-neighbour lattice path. `shift` places it on the
/// sublattice Z^2 + (shift/2)(1,1): 0 for primal paths, 1 for dual paths and 2
/// for paths on the dual of the dual lattice (which coincides with Z^2).
struct LatticePath {
  LatticePoint start;
  std::vector<Step> steps;
  int tie_count = 0;
  int shift = 0;

  std::size_t size() const { return steps.size() + 1; }
  std::vector<LatticePoint> points() const;
  LatticePoint end() const;
  /// Rotated view m -> x(m): one entry per vertex, in path order.
  std::vector<RotatedCoord> rotated() const;
};

/// Weight of the path excluding its first vertex, summed in path order.
template <typename Scalar>
Scalar path_weight(const Grid<Scalar>& weights, const LatticePath& path) {
  Scalar total = 0;
  LatticePoint p = path.start;
  for (Step s : path.steps) {
    p = p + displacement(s);
    total += weights.at(p);
  }
  return total;
}

/// Backtracks the maximising path to q through a from_source table anchored at
/// p. Exact ties are broken toward Up and counted.
template <typename Scalar>
LatticePath backtrack(const BasicPassageTable<Scalar>& table, LatticePoint q) {
  if (table.orientation != Orientation::from_source || !table.defined(q))
    throw Error(Errc::precondition, "backtrack needs a from_source table covering the endpoint");
  LatticePath path{table.anchor, {}, 0, 0};
  std::vector<Step> reversed;
  reversed.reserve(static_cast<std::size_t>((q.i - table.anchor.i) + (q.j - table.anchor.j)));
  LatticePoint cur = q;
  while (!(cur == table.anchor)) {
    const Scalar from_left = table(cur - e1);
    const Scalar from_below = table(cur - e2);
    if (from_left == from_below) ++path.tie_count;
    if (from_below >= from_left) {
      reversed.push_back(Step::Up);
      cur = cur - e2;
    } else {
      reversed.push_back(Step::Right);
      cur = cur - e1;
    }
  }
  path.steps.assign(reversed.rbegin(), reversed.rend());
  return path;
}

/// The geodesic from p to q (p <= q), attaining T(p, q) exactly.
template <typename Scalar>
LatticePath geodesic(const Grid<Scalar>& weights, LatticePoint p, LatticePoint q) {
  if (!precedes(p, q)) throw Error(Errc::ordering, "geodesic endpoints are not ordered");
  const auto table = passage_table(weights, p, Orientation::from_source, Window{p, q, 0});
  return backtrack(table, q);
}

struct UniquenessReport {
  std::int64_t violations = 0;
  std::int64_t segments_checked = 0;
};

/// Checks that for every pair of vertices a < b on a geodesic, the restriction
/// of the path is the only maximiser between them. Counts maximising paths
/// (saturated at 2) with a DP anchored at each vertex of the path.
UniquenessReport restriction_uniqueness_check(const Grid<double>& weights, const LatticePath& path);

/// Geodesic between p <= q computed without materialising the weight field:
/// weights are derived from the seed on the fly, one row of passage times is
/// kept, and the argmax decisions are stored as one bit per vertex.
struct StreamedGeodesic {
  LatticePath path;
  double passage_time = 0;
};

StreamedGeodesic streamed_geodesic(std::uint64_t seed, LatticePoint p, LatticePoint q);

/// T(p, q) from the seed with O(width) memory.
double streamed_passage_time(std::uint64_t seed, LatticePoint p, LatticePoint q);

}  // namespace kpzlab
