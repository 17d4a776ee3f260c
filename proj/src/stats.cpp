#include "kpzlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <limits>
#include <set>
#include <unordered_map>

#include "kpzlab/distributions.hpp"
#include "kpzlab/parallel.hpp"

namespace kpzlab {

LinearFit least_squares(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw Error(Errc::precondition, "regression inputs differ in length");
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2 || (x.array() == x(0)).all())
    throw Error(Errc::estimator, "degenerate regression: fewer than two distinct abscissae");
  const double mx = x.mean();
  const double my = y.mean();
  const Eigen::ArrayXd dx = x.array() - mx;
  const Eigen::ArrayXd dy = y.array() - my;
  const double sxx = (dx * dx).sum();
  LinearFit fit;
  fit.slope = (dx * dy).sum() / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    const Eigen::ArrayXd residual = dy - fit.slope * dx;
    fit.slope_stderr = std::sqrt((residual * residual).sum() / (n - 2) / sxx);
  }
  return fit;
}

// ---------------------------------------------------------------------------

std::vector<double> dyadic_scales(int count) {
  std::vector<double> out;
  for (int k = 1; k <= count; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

namespace {

void check_scales(const std::vector<double>& scales) {
  if (scales.size() < 5) throw Error(Errc::precondition, "box counting needs at least 5 scales");
  for (double e : scales)
    if (!(e > 0)) throw Error(Errc::precondition, "box scales must be positive");
}

// scales ascending; drops the two smallest and the largest before fitting
BoxCountResult fit_box_counts(std::vector<double> scales, std::vector<std::int64_t> counts) {
  BoxCountResult result;
  const std::size_t first = 2;
  const std::size_t last = scales.size() - 2;  // inclusive
  const auto kept = static_cast<Eigen::Index>(last - first + 1);
  Eigen::VectorXd lx(kept), ly(kept);
  for (Eigen::Index k = 0; k < kept; ++k) {
    const std::size_t s = first + static_cast<std::size_t>(k);
    lx(k) = -std::log(scales[s]);
    ly(k) = std::log(static_cast<double>(counts[s]));
  }
  const LinearFit fit = least_squares(lx, ly);
  result.fitted_dimension = fit.slope;
  result.fit_stderr = fit.slope_stderr;
  result.scale_range_used = {scales[first], scales[last]};
  result.scales = std::move(scales);
  result.counts = std::move(counts);
  return result;
}

}  // namespace

BoxCountResult box_dimension(const Eigen::Matrix2Xd& points, std::vector<double> scales) {
  if (points.cols() < 1000) throw Error(Errc::insufficient_data, "box counting needs at least 10^3 points");
  check_scales(scales);
  if ((points.colwise() - points.col(0)).cwiseAbs().maxCoeff() == 0)
    throw Error(Errc::estimator, "degenerate point set: all points coincide");

  std::sort(scales.begin(), scales.end());
  std::vector<std::int64_t> counts;
  std::vector<std::pair<std::int64_t, std::int64_t>> cells(static_cast<std::size_t>(points.cols()));
  for (double eps : scales) {
    for (Eigen::Index c = 0; c < points.cols(); ++c)
      cells[static_cast<std::size_t>(c)] = {static_cast<std::int64_t>(std::floor(points(0, c) / eps)),
                                            static_cast<std::int64_t>(std::floor(points(1, c) / eps))};
    std::sort(cells.begin(), cells.end());
    counts.push_back(std::unique(cells.begin(), cells.end()) - cells.begin());
  }
  return fit_box_counts(std::move(scales), std::move(counts));
}

BoxCountResult box_dimension(const RescaledPath& path, std::vector<double> scales) {
  check_scales(scales);
  if (path.size() < 2) throw Error(Errc::insufficient_data, "graph needs at least two samples");
  if ((path.xs == path.xs(0)).all() && path.end() == path.start())
    throw Error(Errc::estimator, "degenerate graph: a single point");
  std::sort(scales.begin(), scales.end());
  std::vector<std::int64_t> counts;
  for (double eps : scales) {
    // per time column, the x range reached by the graph
    const auto first = static_cast<std::int64_t>(std::floor(path.start() / eps));
    const auto columns = static_cast<std::size_t>(static_cast<std::int64_t>(std::floor(path.end() / eps)) - first + 1);
    std::vector<double> lo(columns, std::numeric_limits<double>::infinity());
    std::vector<double> hi(columns, -std::numeric_limits<double>::infinity());
    auto visit = [&](std::int64_t column, double a, double b) {
      const auto c = static_cast<std::size_t>(column - first);
      lo[c] = std::min({lo[c], a, b});
      hi[c] = std::max({hi[c], a, b});
    };
    for (Eigen::Index k = 0; k + 1 < path.size(); ++k) {
      const double t0 = path.times(k);
      const double t1 = path.times(k + 1);
      const double x0 = path.xs(k);
      const double slope = (path.xs(k + 1) - x0) / (t1 - t0);
      auto c0 = static_cast<std::int64_t>(std::floor(t0 / eps));
      const auto c1 = static_cast<std::int64_t>(std::floor(t1 / eps));
      double ta = t0;
      for (; c0 <= c1; ++c0) {
        const double tb = std::min(t1, static_cast<double>(c0 + 1) * eps);
        visit(c0, x0 + slope * (ta - t0), x0 + slope * (tb - t0));
        ta = tb;
      }
    }
    std::int64_t n = 0;
    for (std::size_t c = 0; c < columns; ++c)
      if (lo[c] <= hi[c])
        n += static_cast<std::int64_t>(std::floor(hi[c] / eps)) - static_cast<std::int64_t>(std::floor(lo[c] / eps)) + 1;
    counts.push_back(n);
  }
  return fit_box_counts(std::move(scales), std::move(counts));
}

Eigen::Matrix2Xd graph_points(const RescaledPath& path, double resolution) {
  if (!(resolution > 0)) throw Error(Errc::precondition, "resolution must be positive");
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(static_cast<std::size_t>(path.size()));
  for (Eigen::Index k = 0; k < path.size(); ++k) {
    if (k > 0) {
      const double dt = path.times(k) - path.times(k - 1);
      const double dx = path.xs(k) - path.xs(k - 1);
      const int pieces = static_cast<int>(std::ceil(std::max(std::abs(dt), std::abs(dx)) / resolution));
      for (int q = 1; q < pieces; ++q) {
        const double a = static_cast<double>(q) / pieces;
        pts.emplace_back(path.xs(k - 1) + a * dx, path.times(k - 1) + a * dt);
      }
    }
    pts.emplace_back(path.xs(k), path.times(k));
  }
  Eigen::Matrix2Xd out(2, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t c = 0; c < pts.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = pts[c];
  return out;
}

RescaledPath random_walk_path(std::uint64_t seed, int steps) {
  if (steps < 1) throw Error(Errc::precondition, "random walk needs at least one step");
  RescaledPath path;
  path.times = Eigen::ArrayXd::LinSpaced(steps + 1, 0.0, 1.0);
  path.xs.resize(steps + 1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(steps));
  std::int64_t position = 0;
  path.xs(0) = 0;
  for (int k = 1; k <= steps; ++k) {
    position += (derive_seed(seed, static_cast<std::uint64_t>(k)) >> 63) ? 1 : -1;
    path.xs(k) = scale * static_cast<double>(position);
  }
  return path;
}

// ---------------------------------------------------------------------------

ExponentFit fit_exponent(std::vector<double> sizes, std::vector<double> statistics) {
  if (sizes.size() != statistics.size()) throw Error(Errc::precondition, "sizes and statistics differ in length");
  const auto n = static_cast<Eigen::Index>(sizes.size());
  Eigen::VectorXd lx(n), ly(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(sizes[static_cast<std::size_t>(k)] > 0) || !(statistics[static_cast<std::size_t>(k)] > 0))
      throw Error(Errc::estimator, "log-log fit needs positive sizes and statistics");
    lx(k) = std::log(sizes[static_cast<std::size_t>(k)]);
    ly(k) = std::log(statistics[static_cast<std::size_t>(k)]);
  }
  const LinearFit fit = least_squares(lx, ly);
  return {std::move(sizes), std::move(statistics), fit.slope, fit.slope_stderr};
}

std::vector<double> transversal_displacements(std::uint64_t seed, int size, int replicas, int threads) {
  if (size < 2 || size % 2 != 0) throw Error(Errc::precondition, "size must be even and at least 2");
  std::vector<double> out(static_cast<std::size_t>(replicas));
  const std::uint64_t size_seed = derive_seed(seed, static_cast<std::uint64_t>(size));
  parallel_for(out.size(), threads, [&](std::size_t r) {
    const auto g = streamed_geodesic(derive_seed(size_seed, r), -size * diagonal, {0, 0});
    // depth size/2 in m: the vertex on i + j = -size
    LatticePoint p = g.path.start;
    for (Step s : g.path.steps) {
      if (p.i + p.j == -size) break;
      p = p + displacement(s);
    }
    out[r] = 0.5 * static_cast<double>(p.i - p.j);
  });
  return out;
}

ExponentFit fluctuation_exponent(std::uint64_t seed, const std::vector<int>& sizes, int replicas, int threads) {
  if (replicas < 32) throw Error(Errc::insufficient_data, "fluctuation exponent needs at least 32 replicas per size");
  std::vector<std::vector<double>> displacements;
  for (int L : sizes) displacements.push_back(transversal_displacements(seed, L, replicas, threads));
  return fluctuation_fit(sizes, displacements);
}

ExponentFit fluctuation_fit(const std::vector<int>& sizes, const std::vector<std::vector<double>>& displacements) {
  if (sizes.size() != displacements.size()) throw Error(Errc::precondition, "one displacement set per size");
  std::vector<double> xs, rms;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const auto& d = displacements[k];
    if (d.empty()) throw Error(Errc::insufficient_data, "empty displacement set");
    double ss = 0;
    for (double v : d) ss += v * v;
    xs.push_back(sizes[k]);
    rms.push_back(std::sqrt(ss / static_cast<double>(d.size())));
  }
  return fit_exponent(std::move(xs), std::move(rms));
}

ExponentFit holder_exponent(const RescaledPath& path, const std::vector<double>& gaps) {
  if (path.size() < 2) throw Error(Errc::precondition, "path has fewer than two samples");
  if (gaps.empty()) throw Error(Errc::precondition, "no gaps given");
  const double span = path.end() - path.start();
  const double smallest = *std::min_element(gaps.begin(), gaps.end());
  if (!(smallest > 0)) throw Error(Errc::precondition, "gaps must be positive");
  if (span < 64 * smallest) throw Error(Errc::precondition, "path spans less than 2^6 times the smallest gap");
  std::vector<double> hs, maxima;
  for (double h : gaps) {
    if (h >= span) throw Error(Errc::precondition, "gap exceeds the path domain");
    double best = 0;
    Eigen::Index k = 0;  // index of the piece containing t + h
    for (Eigen::Index a = 0; a < path.size(); ++a) {
      const double t = path.times(a) + h;
      if (t > path.end()) break;
      while (k + 1 < path.size() && path.times(k + 1) < t) ++k;
      const double t0 = path.times(k);
      const double t1 = path.times(k + 1);
      const double w = (t - t0) / (t1 - t0);
      const double x = (1 - w) * path.xs(k) + w * path.xs(k + 1);
      best = std::max(best, std::abs(x - path.xs(a)));
    }
    hs.push_back(h);
    maxima.push_back(best);
  }
  return fit_exponent(std::move(hs), std::move(maxima));
}

// ---------------------------------------------------------------------------

double occupation_time(const RescaledPath& path, const Interval& I, const Interval& J) {
  double total = 0;
  for (Eigen::Index k = 0; k + 1 < path.size(); ++k) {
    const double t0 = path.times(k);
    const double t1 = path.times(k + 1);
    const double a = std::max(t0, J.lo);
    const double b = std::min(t1, J.hi);
    if (!(b > a)) continue;
    const double x0 = path.xs(k);
    const double slope = (path.xs(k + 1) - x0) / (t1 - t0);
    const double xa = x0 + slope * (a - t0);
    if (slope == 0) {
      if (xa >= I.lo && xa <= I.hi) total += b - a;
      continue;
    }
    // times in [a, b] at which the line crosses the ends of I
    double ta = a + (I.lo - xa) / slope;
    double tb = a + (I.hi - xa) / slope;
    if (ta > tb) std::swap(ta, tb);
    const double lo = std::max(a, ta);
    const double hi = std::min(b, tb);
    if (hi > lo) total += hi - lo;
  }
  return total;
}

OccupationResult occupation_exceedance(const std::vector<RescaledPath>& paths, const Interval& I, const Interval& J,
                                       const std::vector<double>& M_values) {
  if (I.empty() || J.empty()) throw Error(Errc::precondition, "empty occupation interval");
  if (paths.size() < 100) throw Error(Errc::insufficient_data, "occupation needs at least 100 paths");
  for (const auto& p : paths)
    if (p.size() == 0 || J.lo < p.start() || J.hi > p.end())
      throw Error(Errc::precondition, "J is not inside every path domain");
  std::vector<double> times;
  times.reserve(paths.size());
  for (const auto& p : paths) times.push_back(occupation_time(p, I, J));
  OccupationResult out;
  const double unit = I.length() * std::cbrt(J.length());
  for (double M : M_values) {
    const auto hits = std::count_if(times.begin(), times.end(), [&](double x) { return x > M * unit; });
    out.M.push_back(M);
    out.frequency.push_back(static_cast<double>(hits) / static_cast<double>(times.size()));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> antidiagonal_increments(const BusemannField& busemann, const Window& region, int antidiagonal) {
  if (!busemann.window.contains(region)) throw Error(Errc::precondition, "region outside the Busemann field");
  std::vector<double> out;
  for (int i = region.lo.i; i <= region.hi.i; ++i) {
    const LatticePoint p{i, antidiagonal - i};
    const LatticePoint q = p + e1 - e2;
    if (region.contains(p) && region.contains(q)) out.push_back(busemann(q) - busemann(p));
  }
  return out;
}

IncrementLaw increment_law(std::span<const double> samples) {
  if (samples.size() < 1000) throw Error(Errc::insufficient_data, "increment law needs at least 10^3 increments");
  IncrementLaw law;
  law.count = samples.size();
  const auto n = static_cast<double>(samples.size());
  law.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0;
  for (double z : samples) ss += (z - law.mean) * (z - law.mean);
  law.variance = ss / (n - 1);
  law.ks_distance = ks_statistic(samples, laplace_cdf(0.5));
  return law;
}

IncrementLaw busemann_increment_test(const BusemannField& busemann, const Window& certified, int antidiagonal,
                                     int count) {
  auto z = antidiagonal_increments(busemann, certified, antidiagonal);
  if (count < 1000 || z.size() < static_cast<std::size_t>(count))
    throw Error(Errc::insufficient_data, "only " + std::to_string(z.size()) + " certified increments on the anti-diagonal");
  z.resize(static_cast<std::size_t>(count));
  return increment_law(z);
}

namespace {

// Runs `take` on certified replica fields in batches until `enough` holds.
template <typename Take, typename Enough>
void certified_replicas(std::uint64_t seed, int side, int K, int threads, Take&& take, Enough&& enough) {
  const Window w = Window::centered(side);
  // consumption is in index order, so the batch size never changes the result
  const std::size_t batch = 4 * static_cast<std::size_t>(std::max(threads, 1));
  for (std::size_t first = 0; !enough(); first += batch) {
    if (first > 100'000) throw Error(Errc::insufficient_certification, "too few certified replicas");
    std::vector<std::optional<std::pair<BusemannField, Window>>> parts(batch);
    parallel_for(batch, threads, [&](std::size_t k) {
      const WeightField X =
          WeightField::generate(derive_seed(seed, first + k), certification_support(w, K, Direction::down));
      const auto cert = certify_stabilization(X.values, w, K, Direction::down);
      if (cert.empty()) return;
      parts[k].emplace(busemann_field(X.values, w, K, Direction::down), cert.certified);
    });
    for (const auto& p : parts)
      if (p && !enough()) take(p->first, p->second);
  }
}

}  // namespace

std::vector<double> pooled_busemann_increments(std::uint64_t seed, int window, int K, std::size_t count,
                                               int threads) {
  std::vector<double> out;
  certified_replicas(
      seed, window, K, threads,
      [&](const BusemannField& B, const Window& certified) {
        const LatticePoint c = certified.center();
        const auto z = antidiagonal_increments(B, certified, c.i + c.j);
        out.insert(out.end(), z.begin(), z.end());
      },
      [&] { return out.size() >= count; });
  out.resize(count);
  return out;
}

std::vector<Grid<double>> pooled_dual_weights(std::uint64_t seed, int window, int K, std::size_t count,
                                              int threads) {
  std::vector<Grid<double>> out;
  std::size_t total = 0;
  certified_replicas(
      seed, window, K, threads,
      [&](const BusemannField& B, const Window& certified) {
        const Window region{certified.lo, certified.hi - diagonal, 0};
        if (region.empty()) return;
        out.push_back(dual_weights(B, region).values);
        total += static_cast<std::size_t>(region.area());
      },
      [&] { return total >= count; });
  return out;
}

// ---------------------------------------------------------------------------

std::vector<int> endpoint_grid(int half_width, int count) {
  if (count < 1) return {};
  std::vector<int> out;
  for (int k = 0; k < count; ++k)
    out.push_back(-half_width + static_cast<int>((2LL * half_width * k) / count));
  return out;
}

HighwayCensus highway_census(const Grid<double>& weights, int s, int t, const Interval& strip,
                             const std::vector<int>& bottom_x, const std::vector<int>& top_x) {
  if (!(s < strip.lo && strip.lo <= strip.hi && strip.hi < t))
    throw Error(Errc::precondition, "strip must lie strictly between the endpoint lines");
  HighwayCensus census;
  std::set<std::vector<std::uint64_t>> restrictions;
  if (top_x.empty()) return census;
  const auto [ymin, ymax] = std::minmax_element(top_x.begin(), top_x.end());
  const LatticePoint hi{t + *ymax, t - *ymin};
  for (int x : bottom_x) {
    const LatticePoint b = antidiagonal_point(s, x);
    if (!precedes(b, hi)) continue;
    const auto table = passage_table(weights, b, Orientation::from_source, Window{b, hi, 0});
    for (int y : top_x) {
      const LatticePoint u = antidiagonal_point(t, y);
      if (!precedes(b, u)) continue;
      ++census.pairs;
      std::vector<std::uint64_t> part;
      for (const LatticePoint& p : backtrack(table, u).points()) {
        const double m = 0.5 * (p.i + p.j);
        if (m >= strip.lo && m <= strip.hi)
          part.push_back((std::uint64_t{static_cast<std::uint32_t>(p.i)} << 32) | static_cast<std::uint32_t>(p.j));
      }
      restrictions.insert(std::move(part));
    }
  }
  census.distinct = static_cast<std::int64_t>(restrictions.size());
  return census;
}

namespace {

template <typename Inside>
std::int64_t covered_vertices(const Grid<double>& weights, const Window& bounds, Inside&& inside,
                              const std::vector<LatticePoint>& bottom, const std::vector<LatticePoint>& top) {
  Grid<std::uint8_t> covered(bounds, 0);
  if (top.empty()) return 0;
  LatticePoint hi = top.front();
  for (const auto& u : top) hi = {std::max(hi.i, u.i), std::max(hi.j, u.j)};
  for (const LatticePoint& b : bottom) {
    if (!precedes(b, hi)) continue;
    const auto table = passage_table(weights, b, Orientation::from_source, Window{b, hi, 0});
    for (const LatticePoint& u : top) {
      if (!precedes(b, u)) continue;
      const auto pts = backtrack(table, u).points();
      for (std::size_t k = 1; k + 1 < pts.size(); ++k)
        if (bounds.contains(pts[k])) covered(pts[k]) = 1;
    }
  }
  std::int64_t n = 0;
  bounds.for_each([&](LatticePoint p) {
    if (covered(p) && inside(p)) ++n;
  });
  return n;
}

}  // namespace

double frame_coverage(const Grid<double>& weights, const Window& window, const std::vector<LatticePoint>& bottom,
                      const std::vector<LatticePoint>& top) {
  if (window.empty()) throw Error(Errc::precondition, "empty frame window");
  const auto n = covered_vertices(weights, window, [](LatticePoint) { return true; }, bottom, top);
  return static_cast<double>(n) / static_cast<double>(window.area());
}

FrameScale rescaled_frame_coverage(std::uint64_t seed, int n, int grid) {
  if (grid < 1) throw Error(Errc::precondition, "frame grid must be nonempty");
  const ScalingParams params(n);
  std::vector<LatticePoint> bottom, top;
  for (int k = 0; k < grid; ++k) {
    const double x = grid == 1 ? 0.0 : -1.0 + 2.0 * k / (grid - 1);
    bottom.push_back(landscape_point_to_lattice(x, 0.0, params));
    top.push_back(landscape_point_to_lattice(x, 1.0, params));
  }
  // rescaled region t in [1/4, 3/4], x in [-1/2, 1/2]
  const double half = 0.5 * params.spatial_prefactor();
  auto inside = [&](LatticePoint p) {
    const double m = 0.5 * (p.i + p.j);
    const double x = 0.5 * (p.i - p.j);
    return m >= 0.25 * n && m <= 0.75 * n && std::abs(x) <= half;
  };
  const int h = static_cast<int>(std::ceil(half));
  const Window bounds{{n / 4 - h, n / 4 - h}, {(3 * n) / 4 + h, (3 * n) / 4 + h}, 0};

  Window field = bounds;
  for (const auto& p : bottom) field = field.united(Window{p, p, 0});
  for (const auto& p : top) field = field.united(Window{p, p, 0});
  const WeightField X = WeightField::generate(seed, field);

  std::int64_t region = 0;
  bounds.for_each([&](LatticePoint p) { region += inside(p); });
  const auto covered = covered_vertices(X.values, bounds, inside, bottom, top);
  return {n, bounds, static_cast<double>(covered) / static_cast<double>(region)};
}

// ---------------------------------------------------------------------------

InterfaceTraces trace_top_interfaces(std::uint64_t seed, int height, int k, int spacing, int K_factor) {
  if (height < 1 || k < 1 || spacing < 1) throw Error(Errc::precondition, "height, k and spacing must be positive");
  InterfaceTraces out;
  // sources stay fixed as the window grows downward and to the left
  out.window = Window{{-height, -height}, {(k - 1) * spacing + height / 2, -1}, 0};
  const int K = K_factor * std::max(out.window.width(), out.window.height());
  const WeightField X = WeightField::generate(seed, certification_support(out.window, K, Direction::up));
  out.certificate = certify_stabilization(X.values, out.window, K, Direction::up);
  const GeodesicTree tree = build_tree(X.values, out.window, Direction::up, K);
  const InterfaceForest portrait = interface_portrait(tree);

  // union-find over sources; a trace joins the trace that first visited a vertex it reaches
  std::vector<int> parent(static_cast<std::size_t>(k));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)];
    return a;
  };
  std::unordered_map<LatticePoint, int> owner;
  std::vector<std::vector<LatticePoint>> inside_paths;
  for (int s = 0; s < k; ++s) {
    const DualPoint source{{s * spacing, -1}};
    LatticePath trace = trace_interface(portrait, source);
    for (const LatticePoint& b : trace.points()) {
      if (!out.window.contains(b)) break;
      auto [it, fresh] = owner.emplace(b, s);
      if (!fresh) {
        parent[static_cast<std::size_t>(find(s))] = find(it->second);
        break;
      }
    }
    // keep the full inside part for the confluence census
    std::vector<LatticePoint> full;
    for (const LatticePoint& b : trace.points()) {
      if (!out.window.contains(b)) break;
      full.push_back(b);
    }
    inside_paths.push_back(std::move(full));
    out.traces.push_back(std::move(trace));
  }
  std::vector<std::int64_t> group(static_cast<std::size_t>(k), 0);
  for (int s = 0; s < k; ++s) ++group[static_cast<std::size_t>(find(s))];
  for (auto g : group) out.coalesced_pairs += g * (g - 1) / 2;
  out.pairs = static_cast<std::int64_t>(k) * (k - 1) / 2;
  for (int s = 0; s + 1 < k; ++s) out.coalesced_neighbours += find(s) == find(s + 1);
  out.neighbour_pairs = k - 1;
  out.trifurcations = confluence_points(inside_paths);
  return out;
}

std::vector<double> portrait_one_endedness(std::uint64_t seed, const std::vector<int>& heights, int k, int spacing,
                                           int replicas, int threads) {
  if (k < 1) throw Error(Errc::precondition, "one-endedness needs at least one source");
  std::vector<double> out;
  for (int H : heights) {
    std::vector<double> fractions(static_cast<std::size_t>(replicas));
    parallel_for(fractions.size(), threads, [&](std::size_t r) {
      fractions[r] = trace_top_interfaces(derive_seed(seed, r), H, k, spacing).neighbour_fraction();
    });
    out.push_back(std::accumulate(fractions.begin(), fractions.end(), 0.0) / static_cast<double>(replicas));
  }
  return out;
}

Eigen::Matrix2Xd nu_set_points(const InterfaceForest& portrait, const std::vector<DualPoint>& sources,
                               const ScalingParams& params, double resolution) {
  std::vector<Eigen::Matrix2Xd> parts;
  Eigen::Index total = 0;
  for (const DualPoint& s : sources) {
    LatticePath trace = trace_interface(portrait, s);
    if (trace.steps.empty()) continue;
    trace.steps.pop_back();  // drop the exit vertex
    if (trace.steps.empty()) continue;
    parts.push_back(graph_points(rescale_path(trace, params), resolution));
    total += parts.back().cols();
  }
  Eigen::Matrix2Xd out(2, total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  return out;
}

}  // namespace kpzlab
