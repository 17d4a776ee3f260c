#pragma once

// Estimators for the quantitative claims: box dimension, wandering and Hölder
// exponents, occupation exceedance, the Busemann increment law, highway and
// frame censuses, and interface coalescence.

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "kpzlab/duality.hpp"
#include "kpzlab/scaling.hpp"

namespace kpzlab {

struct Interval {
  double lo = 0;
  double hi = 0;
  double length() const { return hi - lo; }
  bool empty() const { return !(hi > lo); }
};

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double slope_stderr = 0;
};

/// Ordinary least squares y ~ a + b x. Throws an estimator error with fewer
/// than two distinct abscissae.
LinearFit least_squares(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// ---------------------------------------------------------------------------
// Box counting

struct BoxCountResult {
  std::vector<double> scales;  // ascending
  std::vector<std::int64_t> counts;
  double fitted_dimension = 0;
  double fit_stderr = 0;
  std::pair<double, double> scale_range_used{0, 0};
};

/// Counts occupied cells of the grid eps Z^2 for every scale and fits log N
/// against log(1/eps), dropping the two smallest scales and the largest.
/// Points are columns (x, t). Needs 10^3 points and 5 scales.
BoxCountResult box_dimension(const Eigen::Matrix2Xd& points, std::vector<double> scales);

/// Box counts of the graph {(x(t), t)} of a continuous piecewise-linear path,
/// computed exactly: within one time column the graph occupies every x cell
/// between its minimum and maximum. Same trimming and fit as above.
BoxCountResult box_dimension(const RescaledPath& path, std::vector<double> scales);

/// Dyadic scales 2^-1, ..., 2^-count.
std::vector<double> dyadic_scales(int count);

/// Graph {(x(t), t)} of a path, with extra points on each linear piece so that
/// consecutive points are closer than `resolution` in both coordinates.
Eigen::Matrix2Xd graph_points(const RescaledPath& path, double resolution);

/// Graph of a simple random walk with `steps` steps on [0, 1], x scaled by steps^{-1/2}.
RescaledPath random_walk_path(std::uint64_t seed, int steps);

// ---------------------------------------------------------------------------
// Exponents

struct ExponentFit {
  std::vector<double> sizes;
  std::vector<double> statistics;
  double fitted_exponent = 0;
  double fit_stderr = 0;
};

/// Log-log regression of statistics against sizes.
ExponentFit fit_exponent(std::vector<double> sizes, std::vector<double> statistics);

/// For each size L and replica, the geodesic from the origin to the far root
/// -L v and its transversal displacement |x| at depth L/2; fits RMS ~ L^chi.
ExponentFit fluctuation_exponent(std::uint64_t seed, const std::vector<int>& sizes, int replicas, int threads = 1);

/// RMS of each displacement set against its size, fitted as above.
ExponentFit fluctuation_fit(const std::vector<int>& sizes, const std::vector<std::vector<double>>& displacements);

/// Transversal displacements (signed, rotated units) behind fluctuation_exponent for one size.
std::vector<double> transversal_displacements(std::uint64_t seed, int size, int replicas, int threads = 1);

/// For each gap h, max over sample times t of |x(t + h) - x(t)|; fits ~ h^alpha.
ExponentFit holder_exponent(const RescaledPath& path, const std::vector<double>& gaps);

// ---------------------------------------------------------------------------
// Occupation

/// Lebesgue measure of { t in J : x(t) in I } for the piecewise-linear path.
double occupation_time(const RescaledPath& path, const Interval& I, const Interval& J);

struct OccupationResult {
  std::vector<double> M;
  std::vector<double> frequency;
};

/// Frequency over paths of occupation_time > M |I| |J|^{1/3}, per M.
OccupationResult occupation_exceedance(const std::vector<RescaledPath>& paths, const Interval& I,
                                       const Interval& J, const std::vector<double>& M_values);

// ---------------------------------------------------------------------------
// Busemann increments

struct IncrementLaw {
  std::size_t count = 0;
  double mean = 0;
  double variance = 0;
  double ks_distance = 0;
};

/// B(p + e1 - e2) - B(p) for successive p on the anti-diagonal i + j = a
/// inside `region`, in increasing i.
std::vector<double> antidiagonal_increments(const BusemannField& busemann, const Window& region, int antidiagonal);

/// Moments and KS distance of increment samples to the Laplace law of rate
/// 1/2, the difference of two independent exp(1/2). Needs 10^3 samples.
IncrementLaw increment_law(std::span<const double> samples);

/// The first `count` increments on one anti-diagonal of the certified region.
IncrementLaw busemann_increment_test(const BusemannField& busemann, const Window& certified, int antidiagonal,
                                     int count);

/// Increments pooled over independent replica fields: each replica certifies
/// a window x window square at distance K and contributes the increments on
/// the central anti-diagonal of its certified region.
std::vector<double> pooled_busemann_increments(std::uint64_t seed, int window, int K, std::size_t count,
                                               int threads = 1);

/// Dual weight patches over the certified regions of independent replica
/// fields, until at least `count` weights are collected.
std::vector<Grid<double>> pooled_dual_weights(std::uint64_t seed, int window, int K, std::size_t count,
                                              int threads = 1);

// ---------------------------------------------------------------------------
// Highways and frames

/// Vertex on the anti-diagonal line m (i + j = 2m) at transversal position x.
constexpr LatticePoint antidiagonal_point(int m, int x) { return {m + x, m - x}; }

struct HighwayCensus {
  std::int64_t pairs = 0;
  std::int64_t distinct = 0;
};

/// All geodesics from the bottom endpoints (line m = s) to the top endpoints
/// (line m = t), restricted to the vertices with strip.lo <= m <= strip.hi;
/// counts distinct restrictions.
HighwayCensus highway_census(const Grid<double>& weights, int s, int t, const Interval& strip,
                             const std::vector<int>& bottom_x, const std::vector<int>& top_x);

/// `count` equally spaced integer positions on [-half_width, half_width).
std::vector<int> endpoint_grid(int half_width, int count);

/// Fraction of window vertices interior to at least one geodesic from a bottom
/// endpoint to a top endpoint.
double frame_coverage(const Grid<double>& weights, const Window& window, const std::vector<LatticePoint>& bottom,
                      const std::vector<LatticePoint>& top);

struct FrameScale {
  int n = 0;
  Window window;
  double fraction = 0;
};

/// Frame coverage at scale n for a fixed rescaled picture: endpoints at rescaled
/// positions in [-1, 1] on times 0 and 1, window covering times [1/4, 3/4] and
/// positions [-1/2, 1/2].
FrameScale rescaled_frame_coverage(std::uint64_t seed, int n, int grid);

// ---------------------------------------------------------------------------
// Interfaces

struct InterfaceTraces {
  Window window;
  std::vector<LatticePath> traces;
  std::int64_t pairs = 0;
  std::int64_t coalesced_pairs = 0;
  std::int64_t neighbour_pairs = 0;  // sources s and s + 1
  std::int64_t coalesced_neighbours = 0;
  std::vector<LatticePoint> trifurcations;  // dual bases of the first meetings
  StabilizationCertificate certificate;

  double coalesced_fraction() const {
    return pairs == 0 ? 1.0 : static_cast<double>(coalesced_pairs) / static_cast<double>(pairs);
  }
  double neighbour_fraction() const {
    return neighbour_pairs == 0 ? 1.0
                                : static_cast<double>(coalesced_neighbours) / static_cast<double>(neighbour_pairs);
  }
  bool all_merged() const { return coalesced_pairs == pairs; }
};

/// Builds the up tree of the window [-H, (k - 1) spacing + H/2] x [-H, -1],
/// takes its down interface portrait and traces k interfaces from the dual
/// sources (s spacing, -1) + (1/2, 1/2) on the top row until they leave the
/// window. The sources do not depend on H.
InterfaceTraces trace_top_interfaces(std::uint64_t seed, int height, int k, int spacing, int K_factor = 4);

/// Fractions of neighbouring source pairs coalesced inside the window,
/// averaged over replicas, one per height.
std::vector<double> portrait_one_endedness(std::uint64_t seed, const std::vector<int>& heights, int k, int spacing,
                                           int replicas, int threads = 1);

/// Rescaled points of the interface traces (input for box_dimension).
Eigen::Matrix2Xd nu_set_points(const InterfaceForest& portrait, const std::vector<DualPoint>& sources,
                               const ScalingParams& params, double resolution);

}  // namespace kpzlab
