#include "kpzlab/duality.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "kpzlab/distributions.hpp"

namespace kpzlab {

DualWeightField dual_weights(const BusemannField& busemann, const Window& window) {
  if (busemann.direction != Direction::down) throw Error(Errc::precondition, "dual weights need a down Busemann field");
  if (!busemann.window.contains(Window{window.lo, window.hi + diagonal, 0}))
    throw Error(Errc::precondition, "Busemann field must cover the window expanded by one in +e1, +e2");
  DualWeightField dual{window, Grid<double>(window, 0.0), 1};
  window.for_each([&](LatticePoint p) {
    const double value = std::min(busemann(p + e2), busemann(p + e1)) - busemann(p);
    if (!(value > 0))
      throw Error(Errc::consistency, "nonpositive dual weight at (" + std::to_string(p.i) + "," +
                                         std::to_string(p.j) + "): Busemann field is not monotone");
    dual.values(p) = value;
  });
  return dual;
}

GeodesicTree build_tree(const DualWeightField& dual, const Window& window, Direction direction, int K) {
  GeodesicTree tree = build_tree(dual.values, window, direction, K);
  tree.shift = dual.shift;
  return tree;
}

InterfaceForest interface_portrait(const GeodesicTree& tree) {
  InterfaceForest forest;
  forest.shift = tree.shift + 1;
  if (tree.direction == Direction::up) {
    // dual vertex b + (1/2,1/2): Left crosses b--b+e2, Down crosses b--b+e1
    forest.direction = Direction::down;
    forest.window = tree.window;
    forest.domain = tree.domain;
    forest.dual_step = Grid<std::uint8_t>(forest.domain, static_cast<std::uint8_t>(Step::None));
    forest.domain.for_each([&](LatticePoint b) {
      const Step s = tree.step(b);
      if (s == Step::None) return;
      forest.dual_step(b) = static_cast<std::uint8_t>(s == Step::Up ? Step::Down : Step::Left);
    });
  } else {
    // dual vertex b + (1/2,1/2): Right crosses b+e1--b+(1,1), Up crosses b+e2--b+(1,1)
    forest.direction = Direction::up;
    forest.window = tree.window.shifted({-1, -1});
    forest.domain = tree.domain.shifted({-1, -1});
    forest.dual_step = Grid<std::uint8_t>(forest.domain, static_cast<std::uint8_t>(Step::None));
    forest.domain.for_each([&](LatticePoint b) {
      const Step s = tree.step(b + diagonal);
      if (s == Step::None) return;
      forest.dual_step(b) = static_cast<std::uint8_t>(s == Step::Down ? Step::Up : Step::Right);
    });
  }
  return forest;
}

LatticePath trace_interface(const InterfaceForest& portrait, DualPoint p) {
  LatticePath path{p.base, {}, 0, portrait.shift};
  LatticePoint cur = p.base;
  while (portrait.window.contains(cur)) {
    const Step s = portrait.step(cur);
    if (s == Step::None) break;
    path.steps.push_back(s);
    cur = cur + displacement(s);
  }
  return path;
}

namespace {

DoubledEdge make_edge(LatticePoint base, int shift, Step s) {
  const LatticePoint d = displacement(s);
  const std::int64_t x = 2 * std::int64_t{base.i} + shift;
  const std::int64_t y = 2 * std::int64_t{base.j} + shift;
  return {x, y, x + 2 * d.i, y + 2 * d.j};
}

std::uint64_t midpoint_key(const DoubledEdge& e) {
  const auto mx = static_cast<std::uint32_t>(e.x1 + e.x2);
  const auto my = static_cast<std::uint32_t>(e.y1 + e.y2);
  return (std::uint64_t{mx} << 32) | my;
}

}  // namespace

std::optional<DoubledEdge> outgoing_edge(const GeodesicTree& tree, LatticePoint base) {
  if (!tree.has_step(base)) return std::nullopt;
  return make_edge(base, tree.shift, tree.step(base));
}

std::optional<DoubledEdge> outgoing_edge(const InterfaceForest& portrait, LatticePoint base) {
  const Step s = portrait.step(base);
  if (s == Step::None) return std::nullopt;
  return make_edge(base, portrait.shift, s);
}

CrossingScan crossing_scan(const GeodesicTree& tree, const InterfaceForest& portrait) {
  // Unit edges of Z^2 + s/2 and Z^2 + (s+1)/2 cross exactly when their midpoints coincide.
  CrossingScan scan;
  std::unordered_set<std::uint64_t> midpoints;
  tree.window.for_each([&](LatticePoint p) {
    if (auto e = outgoing_edge(tree, p)) {
      midpoints.insert(midpoint_key(*e));
      ++scan.tree_edges;
    }
  });
  portrait.window.for_each([&](LatticePoint b) {
    if (auto e = outgoing_edge(portrait, b)) {
      ++scan.portrait_edges;
      if (midpoints.count(midpoint_key(*e))) ++scan.crossings;
    }
  });
  return scan;
}

DualWeightSummary dual_weight_distribution(const std::vector<Grid<double>>& patches) {
  std::vector<double> samples;
  for (const auto& g : patches) samples.insert(samples.end(), g.array().data(), g.array().data() + g.array().size());
  if (samples.size() < 1000) throw Error(Errc::insufficient_data, "fewer than 10^3 dual weights");

  DualWeightSummary s;
  s.count = samples.size();
  const auto n = static_cast<double>(samples.size());
  double sum = 0;
  for (double v : samples) sum += v;
  s.mean = sum / n;
  double ss = 0;
  for (double v : samples) ss += (v - s.mean) * (v - s.mean);
  s.variance = ss / (n - 1);
  s.min_value = *std::min_element(samples.begin(), samples.end());
  s.ks_distance = ks_statistic(samples, exponential_cdf(1.0));

  // lag-1 pairs are taken within each patch only
  auto lag1 = [&](Eigen::Index di, Eigen::Index dj) {
    double num = 0;
    double pairs = 0;
    for (const auto& g : patches) {
      const auto& v = g.array();
      const Eigen::Index rows = v.rows() - di;
      const Eigen::Index cols = v.cols() - dj;
      if (rows <= 0 || cols <= 0) continue;
      num += ((v.topLeftCorner(rows, cols) - s.mean) * (v.bottomRightCorner(rows, cols) - s.mean)).sum();
      pairs += static_cast<double>(rows * cols);
    }
    return pairs == 0 ? 0.0 : (num / pairs) / (ss / n);
  };
  s.lag1_e1 = lag1(1, 0);
  s.lag1_e2 = lag1(0, 1);
  return s;
}

DualWeightSummary dual_weight_distribution(const DualWeightField& dual, const Window& region) {
  if (!dual.window.contains(region)) throw Error(Errc::precondition, "region outside the dual field");
  return dual_weight_distribution(std::vector<Grid<double>>{dual.values.restricted(region)});
}

InsufficientCertification::InsufficientCertification(StabilizationCertificate primal, StabilizationCertificate dual)
    : Error(Errc::insufficient_certification, "empty certified intersection: primal " + describe(primal.certified) +
                                                  ", dual " + describe(dual.certified) + " (K=" +
                                                  std::to_string(primal.K) + ")"),
      primal_(std::move(primal)),
      dual_(std::move(dual)) {}

DualityArtifacts run_duality(std::uint64_t seed, const Window& window, int K) {
  if (!window.contains(LatticePoint{0, 0}))
    throw Error(Errc::configuration, "duality window must contain the origin vertex");

  const Window dual_region = certification_support(window, K, Direction::up);
  const Window busemann_region{dual_region.lo, dual_region.hi + diagonal, 0};
  const Window primal_region = certification_support(window, K, Direction::down)
                                   .united(busemann_region)
                                   .united(Window{-K * diagonal, -K * diagonal, 0});
  const WeightField X = WeightField::generate(seed, primal_region);

  DualityReport report;
  report.seed = seed;
  report.window = window;
  report.K = K;
  report.primal_certificate = certify_stabilization(X.values, window, K, Direction::down);

  BusemannField busemann = busemann_field(X.values, busemann_region, K, Direction::down);
  DualWeightField dual = dual_weights(busemann, dual_region);
  report.dual_certificate = certify_stabilization(dual.values, window, K, Direction::up);

  GeodesicTree primal_down = build_tree(X.values, window, Direction::down, K);
  InterfaceForest primal_up_portrait = interface_portrait(primal_down);
  GeodesicTree dual_up = build_tree(dual, window, Direction::up, K);
  InterfaceForest dual_down_portrait = interface_portrait(dual_up);

  const Window region = report.primal_certificate.certified.intersected(report.dual_certificate.certified).shrunk(1);
  if (report.primal_certificate.empty() || report.dual_certificate.empty() || region.empty())
    throw InsufficientCertification(report.primal_certificate, report.dual_certificate);
  report.certified = region;

  std::int64_t agree_down = 0;
  std::int64_t agree_up = 0;
  region.for_each([&](LatticePoint p) {
    const auto tree_edge = outgoing_edge(primal_down, p);
    // dual-of-dual base b sits at primal b + (1,1)
    const auto portrait_edge = outgoing_edge(dual_down_portrait, p - diagonal);
    ++report.compared_down;
    if (tree_edge) ++report.tree_edges_down;
    if (tree_edge && portrait_edge && *tree_edge == *portrait_edge) ++agree_down;

    const auto up_portrait_edge = outgoing_edge(primal_up_portrait, p);
    const auto dual_tree_edge = outgoing_edge(dual_up, p);
    ++report.compared_up;
    if (up_portrait_edge && dual_tree_edge && *up_portrait_edge == *dual_tree_edge) ++agree_up;
  });
  report.match_down = static_cast<double>(agree_down) / static_cast<double>(report.compared_down);
  report.match_up = static_cast<double>(agree_up) / static_cast<double>(report.compared_up);
  report.ties = primal_down.tie_count + dual_up.tie_count;
  if (region.area() >= 1000) report.dual_summary = dual_weight_distribution(dual, region);

  return {std::move(report),      std::move(busemann), std::move(dual), std::move(primal_down),
          std::move(primal_up_portrait), std::move(dual_up),  std::move(dual_down_portrait)};
}

DualityReport verify_duality(std::uint64_t seed, const Window& window, int K) {
  return run_duality(seed, window, K).report;
}

}  // namespace kpzlab
