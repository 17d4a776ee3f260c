#pragma once

// Lattice geometry on Z^2 and its dual, the rotated (v, w) frame, the Box
// tiling, dense grids and the counter-based exponential weight field.

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>

#include "kpzlab/error.hpp"

namespace kpzlab {

struct LatticePoint {
  int i = 0;
  int j = 0;

  friend constexpr bool operator==(const LatticePoint&, const LatticePoint&) = default;
  friend constexpr LatticePoint operator+(LatticePoint a, LatticePoint b) { return {a.i + b.i, a.j + b.j}; }
  friend constexpr LatticePoint operator-(LatticePoint a, LatticePoint b) { return {a.i - b.i, a.j - b.j}; }
  friend constexpr LatticePoint operator*(int k, LatticePoint a) { return {k * a.i, k * a.j}; }
};

inline constexpr LatticePoint e1{1, 0};
inline constexpr LatticePoint e2{0, 1};
inline constexpr LatticePoint diagonal{1, 1};  // v = (1,1)

/// Coordinatewise partial order: p <= q iff both coordinates are <=.
constexpr bool precedes(LatticePoint p, LatticePoint q) { return p.i <= q.i && p.j <= q.j; }

/// A vertex of (Z^2)* = Z^2 + (1/2, 1/2), stored by its lower-left primal neighbour.
struct DualPoint {
  LatticePoint base;
  friend constexpr bool operator==(const DualPoint&, const DualPoint&) = default;
};

/// Unit lattice steps. Up-right paths use Right/Up, down-left paths Left/Down.
enum class Step : std::uint8_t { Right = 0, Up = 1, Left = 2, Down = 3, None = 255 };

constexpr LatticePoint displacement(Step s) {
  switch (s) {
    case Step::Right: return {1, 0};
    case Step::Up: return {0, 1};
    case Step::Left: return {-1, 0};
    case Step::Down: return {0, -1};
    case Step::None: break;
  }
  return {0, 0};
}

char step_letter(Step s);

/// Coordinates in the frame point = m v + x w, v = (1,1), w = (1,-1). Both
/// coordinates are half-integers and are stored doubled so that arithmetic
/// stays exact.
struct RotatedCoord {
  std::int64_t twice_m = 0;
  std::int64_t twice_x = 0;

  double m() const { return 0.5 * static_cast<double>(twice_m); }
  double x() const { return 0.5 * static_cast<double>(twice_x); }
  friend constexpr bool operator==(const RotatedCoord&, const RotatedCoord&) = default;
};

constexpr RotatedCoord to_rotated(LatticePoint p) { return {std::int64_t{p.i} + p.j, std::int64_t{p.i} - p.j}; }
constexpr RotatedCoord to_rotated(DualPoint d) {
  return {std::int64_t{d.base.i} + d.base.j + 1, std::int64_t{d.base.i} - d.base.j};
}

/// Inverse of to_rotated for primal points; throws if the coordinate is a dual point.
LatticePoint primal_from_rotated(RotatedCoord r);
/// Inverse of to_rotated for dual points; throws if the coordinate is a primal point.
DualPoint dual_from_rotated(RotatedCoord r);

/// The tile index r(q): the unique p with q in Box(p), where
/// Box(p) = p + { s v + x w : s in (-1/4, 1/4], x in (-1/2, 1/2] }.
LatticePoint box_of(const Eigen::Vector2d& q);

/// Membership test for Box(p), written directly from the definition.
bool in_box(LatticePoint p, const Eigen::Vector2d& q);

/// Inclusive lattice rectangle plus a margin of extra cells used for far roots.
struct Window {
  LatticePoint lo{0, 0};
  LatticePoint hi{-1, -1};
  int margin = 0;

  static Window square(int side) { return {{0, 0}, {side - 1, side - 1}, 0}; }
  /// side x side square containing the origin, centred up to rounding.
  static Window centered(int side) { return {{-side / 2, -side / 2}, {side - side / 2 - 1, side - side / 2 - 1}, 0}; }
  static Window spanning(LatticePoint a, LatticePoint b);

  bool empty() const { return hi.i < lo.i || hi.j < lo.j; }
  int width() const { return empty() ? 0 : hi.i - lo.i + 1; }
  int height() const { return empty() ? 0 : hi.j - lo.j + 1; }
  std::int64_t area() const { return std::int64_t{width()} * height(); }
  bool contains(LatticePoint p) const { return precedes(lo, p) && precedes(p, hi); }
  bool contains(const Window& other) const {
    return other.empty() || (!empty() && contains(other.lo) && contains(other.hi));
  }
  LatticePoint center() const { return {lo.i + (hi.i - lo.i) / 2, lo.j + (hi.j - lo.j) / 2}; }

  /// The window grown by its margin on all four sides, with margin reset to zero.
  Window enlarged() const { return {lo - margin * diagonal, hi + margin * diagonal, 0}; }
  /// Shrinks by r cells on every side; may become empty.
  Window shrunk(int r) const { return {lo + r * diagonal, hi - r * diagonal, 0}; }
  Window shifted(LatticePoint d) const { return {lo + d, hi + d, margin}; }
  Window united(const Window& other) const;
  Window intersected(const Window& other) const;

  /// Chebyshev distance from p to the nearest window edge (0 on the rim).
  int ring(LatticePoint p) const {
    return std::min(std::min(p.i - lo.i, hi.i - p.i), std::min(p.j - lo.j, hi.j - p.j));
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (int j = lo.j; j <= hi.j; ++j)
      for (int i = lo.i; i <= hi.i; ++i) fn(LatticePoint{i, j});
  }

  friend bool operator==(const Window&, const Window&) = default;
};

std::string describe(const Window& w);

/// Dense rectangular array over a lattice window. Column index j, row index i;
/// storage is column-major so a sweep in i at fixed j is contiguous.
template <typename Scalar>
class Grid {
 public:
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Grid() = default;
  Grid(const Window& w, Scalar fill) : lo_(w.lo), data_(Storage::Constant(w.width(), w.height(), fill)) {}

  Window window() const {
    return {lo_, {lo_.i + static_cast<int>(data_.rows()) - 1, lo_.j + static_cast<int>(data_.cols()) - 1}, 0};
  }
  bool contains(LatticePoint p) const {
    return p.i >= lo_.i && p.j >= lo_.j && p.i - lo_.i < data_.rows() && p.j - lo_.j < data_.cols();
  }

  Scalar operator()(LatticePoint p) const { return data_(p.i - lo_.i, p.j - lo_.j); }
  Scalar& operator()(LatticePoint p) { return data_(p.i - lo_.i, p.j - lo_.j); }

  Scalar at(LatticePoint p) const {
    if (!contains(p)) throw Error(Errc::precondition, "grid access outside " + describe(window()));
    return (*this)(p);
  }

  const Storage& array() const { return data_; }
  Storage& array() { return data_; }

  /// Copy of the sub-rectangle w, which must lie inside this grid.
  Grid restricted(const Window& w) const {
    if (!window().contains(w)) throw Error(Errc::precondition, "restriction outside grid");
    Grid out;
    out.lo_ = w.lo;
    out.data_ = data_.block(w.lo.i - lo_.i, w.lo.j - lo_.j, w.width(), w.height());
    return out;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.lo_ == b.lo_ && a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
           (a.data_ == b.data_).all();
  }

 private:
  LatticePoint lo_{0, 0};
  Storage data_;
};

// ---------------------------------------------------------------------------
// Counter-based randomness

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of replica `index` derived from a master seed by hashing, never by addition.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) ^ mix64(index + 0xbb67ae8584caa73bULL));
}

/// Uniform deviate in (0, 1) from (seed, p); the all-zero word maps to 2^-54.
double derive_uniform(std::uint64_t seed, LatticePoint p);

/// Weights live on the dyadic grid 2^-32 Z so that passage-time sums below 2^21
/// are computed exactly in double precision.
inline constexpr int weight_quantum_bits = 32;

/// i.i.d. exp(1) weight of vertex p: -ln U rounded up to the dyadic grid.
/// Pure; identical inputs give bitwise-identical outputs.
double derive_weight(std::uint64_t seed, LatticePoint p);

/// Materialised primal weights over a window (enlarged by its margin).
struct WeightField {
  std::uint64_t seed = 0;
  Window window;
  Grid<double> values;

  static WeightField generate(std::uint64_t seed, const Window& window);
  double operator()(LatticePoint p) const { return values(p); }
};

/// Parses a seed given as decimal or 0x-prefixed hexadecimal 64-bit unsigned.
std::uint64_t parse_seed(const std::string& text);

}  // namespace kpzlab

template <>
struct std::hash<kpzlab::LatticePoint> {
  std::size_t operator()(const kpzlab::LatticePoint& p) const noexcept {
    return kpzlab::mix64((static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.i)) << 32) |
                         static_cast<std::uint32_t>(p.j));
  }
};
