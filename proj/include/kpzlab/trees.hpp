#pragma once

// Finite-volume geodesic trees in the directions +v / -v, discrete Busemann
// fields, their stabilisation certificates, and coalescence censuses.

#include <cstdint>
#include <vector>

#include "kpzlab/lpp.hpp"

namespace kpzlab {

/// up: paths go up-right toward a far root at +K v; down: down-left toward -K v.
enum class Direction { up, down };

const char* to_string(Direction d);

struct GeodesicTree {
  Direction direction = Direction::down;
  Window window;       // requested window
  Window domain;       // rectangle spanned by window and root; steps defined here
  LatticePoint root;
  Grid<std::uint8_t> steps;  // Step values; Step::None at the root
  int tie_count = 0;
  int shift = 0;       // sublattice offset in half units, see LatticePath

  Step step(LatticePoint p) const { return static_cast<Step>(steps(p)); }
  bool has_step(LatticePoint p) const { return domain.contains(p) && step(p) != Step::None; }
  LatticePoint next(LatticePoint p) const { return p + displacement(step(p)); }
  /// Path from p to the root.
  LatticePath root_path(LatticePoint p) const;
};

/// The far root of a tree over `window`: window centre +/- K v.
LatticePoint far_root(const Window& window, Direction direction, int K);

/// Tree of geodesics from every vertex of the window to the far root.
///
/// Up trees take the argmax over u in {p+e1, p+e2} of X_u + T(u, root); down
/// trees the argmax over u in {p-e1, p-e2} of T(root, u). Ties go to the
/// vertical step and are counted.
GeodesicTree build_tree(const Grid<double>& weights, const Window& window, Direction direction, int K);

struct BusemannField {
  Direction direction = Direction::down;
  Window window;
  int source_distance = 0;
  LatticePoint anchor{0, 0};  // normalisation vertex
  Grid<double> values;

  double operator()(LatticePoint p) const { return values(p); }
};

/// Down fields: B(p) = T(S, p) - T(S, 0) with far source S = -K v.
/// Up fields: B(p) = T(p, S) - T(0, S) with far sink S = +K v.
BusemannField busemann_field(const Grid<double>& weights, const Window& window, int K, Direction direction);

struct StabilizationCertificate {
  Window requested;
  Window certified;  // possibly empty
  Window tree_certified;
  Window busemann_certified;
  int K = 0;
  int K_doubled = 0;
  Direction direction = Direction::down;

  bool empty() const { return certified.empty(); }
};

/// Compares tree steps and Busemann differences at distances K and 2K and
/// returns the largest centred sub-rectangle on which both agree exactly.
StabilizationCertificate certify_stabilization(const Grid<double>& weights, const Window& window, int K,
                                               Direction direction = Direction::down);

/// Largest centred sub-rectangle of `window` avoiding every cell flagged in `bad`.
Window largest_centered_clean(const Window& window, const Grid<std::uint8_t>& bad);

/// Weight rectangle needed to certify a window at distance K (covers 2K).
Window certification_support(const Window& window, int K, Direction direction);

/// First common vertex of the root paths of p and q.
LatticePoint coalescence_point(const GeodesicTree& tree, LatticePoint p, LatticePoint q);

struct TrifurcationCensus {
  std::vector<LatticePoint> points;
  int count = 0;
};

/// Confluence points of the sources' root paths: vertices reached by two
/// distinct branches (a source lying on another source's path counts as a branch).
TrifurcationCensus trifurcation_census(const GeodesicTree& tree, const std::vector<LatticePoint>& sources);

/// Confluence points of an arbitrary family of paths living in one forest.
std::vector<LatticePoint> confluence_points(const std::vector<std::vector<LatticePoint>>& paths);

}  // namespace kpzlab
