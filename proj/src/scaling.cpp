#include "kpzlab/scaling.hpp"

#include <algorithm>

namespace kpzlab {

double RescaledPath::operator()(double t) const {
  if (size() == 0 || t < start() || t > end()) throw Error(Errc::precondition, "time outside the path domain");
  const auto* first = times.data();
  const auto* last = times.data() + times.size();
  const auto k = static_cast<Eigen::Index>(std::upper_bound(first, last, t) - first);
  if (k == times.size()) return xs(k - 1);
  const double t0 = times(k - 1);
  const double t1 = times(k);
  const double a = (t - t0) / (t1 - t0);
  return (1 - a) * xs(k - 1) + a * xs(k);
}

double rescale_value(double passage_time, double s, double t, const ScalingParams& params) {
  if (!(s < t)) throw Error(Errc::ordering, "rescale_value needs s < t");
  return params.value_prefactor() * (passage_time - params.centering(s, t));
}

LatticePoint landscape_point_to_lattice(double x, double t, const ScalingParams& params) {
  const double m = t * params.n;
  const double xd = params.spatial_prefactor() * x;
  return box_of(Eigen::Vector2d(m + xd, m - xd));
}

RescaledPath rescale_path(const LatticePath& path, const ScalingParams& params) {
  const auto coords = path.rotated();
  const double n = params.n;
  const double c = params.path_prefactor();
  RescaledPath out;
  if (path.shift % 2 != 0 && coords.size() > 1) {
    const auto k = static_cast<Eigen::Index>(coords.size() - 1);
    out.times.resize(k);
    out.xs.resize(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      out.times(a) = 0.25 * static_cast<double>(coords[a].twice_m + coords[a + 1].twice_m) / n;
      out.xs(a) = c * 0.25 * static_cast<double>(coords[a].twice_x + coords[a + 1].twice_x);
    }
  } else {
    const auto k = static_cast<Eigen::Index>(coords.size());
    out.times.resize(k);
    out.xs.resize(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      out.times(a) = coords[a].m() / n;
      out.xs(a) = c * coords[a].x();
    }
  }
  if (out.size() > 1 && out.times(0) > out.times(1)) {
    out.times.reverseInPlace();
    out.xs.reverseInPlace();
  }
  return out;
}

RescaledPath skew_transform(const RescaledPath& path, double theta) {
  return {path.times, path.xs + theta * path.times};
}

}  // namespace kpzlab
