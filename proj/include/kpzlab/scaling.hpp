#pragma once

// KPZ 1:2:3 rescaling between lattice coordinates and directed-landscape
// coordinates, and the skew transform of rescaled paths.

#include <Eigen/Core>

#include <cmath>

#include "kpzlab/lpp.hpp"

namespace kpzlab {

struct ScalingParams {
  int n = 1;

  explicit ScalingParams(int n_) : n(n_) {
    if (n <= 0) throw Error(Errc::precondition, "scale parameter n must be positive");
  }

  double value_prefactor() const { return std::exp2(-4.0 / 3.0) * std::cbrt(1.0 / n); }
  double centering(double s, double t) const { return 4.0 * (t - s) * n; }
  double spatial_prefactor() const { return std::exp2(2.0 / 3.0) * std::pow(double(n), 2.0 / 3.0); }
  double path_prefactor() const { return std::exp2(-2.0 / 3.0) * std::pow(double(n), -2.0 / 3.0); }
  double temporal_factor() const { return n; }
};

/// Piecewise-linear path t -> x on [times(0), times(last)].
struct RescaledPath {
  Eigen::ArrayXd times;  // strictly increasing
  Eigen::ArrayXd xs;

  Eigen::Index size() const { return times.size(); }
  double start() const { return times(0); }
  double end() const { return times(times.size() - 1); }
  /// Linear interpolation; throws outside the domain.
  double operator()(double t) const;
};

/// 2^{-4/3} n^{-1/3} (T - 4 (t - s) n).
double rescale_value(double passage_time, double s, double t, const ScalingParams& params);

/// box_of(t n v + 2^{2/3} x n^{2/3} w).
LatticePoint landscape_point_to_lattice(double x, double t, const ScalingParams& params);

/// Samples a lattice path at every vertex of its rotated view: time m / n,
/// position 2^{-2/3} n^{-2/3} x. Paths on the dual lattice (odd shift) are
/// sampled at edge midpoints instead, which puts their times on 1/2 Z + 1/4.
/// Samples are returned in increasing time order whatever the path orientation.
RescaledPath rescale_path(const LatticePath& path, const ScalingParams& params);

/// x(t) + theta t on the same time samples.
RescaledPath skew_transform(const RescaledPath& path, double theta);

}  // namespace kpzlab
