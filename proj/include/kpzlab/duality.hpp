#pragma once

// Dual weights built from Busemann increments, interface portraits on the dual
// lattice, and the exact finite-volume check that the primal geodesic tree is
// the interface portrait of the dual model (and vice versa).

#include <cstdint>
#include <optional>
#include <vector>

#include "kpzlab/trees.hpp"

namespace kpzlab {

/// Weights on (Z^2)*, indexed by the lower-left primal vertex of each dual vertex.
struct DualWeightField {
  Window window;
  Grid<double> values;
  int shift = 1;
};

/// X~(i+1/2, j+1/2) = min(B(i, j+1), B(i+1, j)) - B(i, j) for a down Busemann
/// field B. Throws a consistency error on any nonpositive value.
DualWeightField dual_weights(const BusemannField& busemann, const Window& window);

/// Tree built on the dual lattice from dual weights; shift is set to 1.
GeodesicTree build_tree(const DualWeightField& dual, const Window& window, Direction direction, int K);

/// Portrait of interfaces interlacing a geodesic tree. An up tree gives a down
/// portrait (steps Left/Down) and a down tree gives an up portrait (Right/Up).
/// Each dual vertex takes the unique step whose crossed primal edge is not a
/// tree edge.
struct InterfaceForest {
  Direction direction = Direction::down;
  Window window;                 // dual bases governed by the tree window
  Window domain;                 // dual bases with a defined step
  Grid<std::uint8_t> dual_step;  // Step values, Step::None where undefined
  int shift = 1;

  Step step(LatticePoint base) const {
    return domain.contains(base) ? static_cast<Step>(dual_step(base)) : Step::None;
  }
};

InterfaceForest interface_portrait(const GeodesicTree& tree);

/// Follows the portrait from p until leaving the window; the exit vertex is included.
LatticePath trace_interface(const InterfaceForest& portrait, DualPoint p);

/// An edge in doubled coordinates: a vertex at base b on sublattice shift s
/// sits at (2 b.i + s, 2 b.j + s).
struct DoubledEdge {
  std::int64_t x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  friend bool operator==(const DoubledEdge&, const DoubledEdge&) = default;
};

std::optional<DoubledEdge> outgoing_edge(const GeodesicTree& tree, LatticePoint base);
std::optional<DoubledEdge> outgoing_edge(const InterfaceForest& portrait, LatticePoint base);

struct CrossingScan {
  std::int64_t tree_edges = 0;
  std::int64_t portrait_edges = 0;
  std::int64_t crossings = 0;
};

/// Exhaustive scan for portrait edges crossing tree edges inside the tree window.
CrossingScan crossing_scan(const GeodesicTree& tree, const InterfaceForest& portrait);

struct DualWeightSummary {
  std::size_t count = 0;
  double mean = 0;
  double variance = 0;
  double ks_distance = 0;
  double lag1_e1 = 0;
  double lag1_e2 = 0;
  double min_value = 0;
};

/// Moments, KS distance to exp(1) and lag-1 autocorrelations over `region`.
DualWeightSummary dual_weight_distribution(const DualWeightField& dual, const Window& region);

/// Same, pooled over independent patches; neighbour pairs never straddle two patches.
DualWeightSummary dual_weight_distribution(const std::vector<Grid<double>>& patches);

struct DualityReport {
  std::uint64_t seed = 0;
  Window window;
  int K = 0;
  StabilizationCertificate primal_certificate;
  StabilizationCertificate dual_certificate;
  Window certified;
  double match_down = 0;
  double match_up = 0;
  std::int64_t compared_down = 0;
  std::int64_t compared_up = 0;
  std::int64_t tree_edges_down = 0;
  std::int64_t ties = 0;
  std::optional<DualWeightSummary> dual_summary;
};

class InsufficientCertification : public Error {
 public:
  InsufficientCertification(StabilizationCertificate primal, StabilizationCertificate dual);
  const StabilizationCertificate& primal() const { return primal_; }
  const StabilizationCertificate& dual() const { return dual_; }

 private:
  StabilizationCertificate primal_;
  StabilizationCertificate dual_;
};

/// Everything verify_duality computes, kept for export and further checks.
struct DualityArtifacts {
  DualityReport report;
  BusemannField busemann;
  DualWeightField dual;
  GeodesicTree primal_down;
  InterfaceForest primal_up_portrait;
  GeodesicTree dual_up;
  InterfaceForest dual_down_portrait;
};

DualityArtifacts run_duality(std::uint64_t seed, const Window& window, int K);

/// Builds the dual model from a seeded primal field and compares
/// T_down(X) with I_down(X~) and I_up(X) with T_up(X~) on the certified region.
DualityReport verify_duality(std::uint64_t seed, const Window& window, int K);

}  // namespace kpzlab
