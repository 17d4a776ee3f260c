#include "kpzlab/trees.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace kpzlab {

const char* to_string(Direction d) { return d == Direction::up ? "up" : "down"; }

LatticePath GeodesicTree::root_path(LatticePoint p) const {
  if (!domain.contains(p)) throw Error(Errc::precondition, "vertex outside tree domain");
  LatticePath path{p, {}, 0, shift};
  for (Step s = step(p); s != Step::None; s = step(p)) {
    path.steps.push_back(s);
    p = p + displacement(s);
  }
  return path;
}

LatticePoint far_root(const Window& window, Direction direction, int K) {
  const int sign = direction == Direction::up ? 1 : -1;
  return window.center() + (sign * K) * diagonal;
}

GeodesicTree build_tree(const Grid<double>& weights, const Window& window, Direction direction, int K) {
  if (window.empty()) throw Error(Errc::configuration, "empty tree window");
  if (K < std::max(window.width(), window.height()))
    throw Error(Errc::configuration, "root distance K must be at least the window side");
  const LatticePoint root = far_root(window, direction, K);
  const Window domain = window.united(Window{root, root, 0});
  if (!weights.window().contains(domain))
    throw Error(Errc::configuration, "root outside generated field " + describe(weights.window()));

  GeodesicTree tree;
  tree.direction = direction;
  tree.window = window;
  tree.domain = Window{domain.lo, domain.hi, 0};
  tree.root = root;
  tree.steps = Grid<std::uint8_t>(tree.domain, static_cast<std::uint8_t>(Step::None));

  if (direction == Direction::up) {
    const auto table = passage_table(weights, root, Orientation::to_sink, tree.domain);
    tree.domain.for_each([&](LatticePoint p) {
      if (p == root) return;
      const double right = table.defined(p + e1) ? weights(p + e1) + table.values(p + e1) : -INFINITY;
      const double up = table.defined(p + e2) ? weights(p + e2) + table.values(p + e2) : -INFINITY;
      if (right == up) ++tree.tie_count;
      tree.steps(p) = static_cast<std::uint8_t>(up >= right ? Step::Up : Step::Right);
    });
  } else {
    const auto table = passage_table(weights, root, Orientation::from_source, tree.domain);
    tree.domain.for_each([&](LatticePoint p) {
      if (p == root) return;
      const double left = table(p - e1);
      const double down = table(p - e2);
      if (left == down) ++tree.tie_count;
      tree.steps(p) = static_cast<std::uint8_t>(down >= left ? Step::Down : Step::Left);
    });
  }
  return tree;
}

BusemannField busemann_field(const Grid<double>& weights, const Window& window, int K, Direction direction) {
  const LatticePoint origin{0, 0};
  if (!window.contains(origin)) throw Error(Errc::configuration, "origin not in Busemann window");
  BusemannField field{direction, window, K, origin, Grid<double>(window, 0.0)};
  if (direction == Direction::down) {
    const LatticePoint source = -K * diagonal;
    if (!precedes(source, window.lo)) throw Error(Errc::configuration, "far source inside the window");
    if (!weights.window().contains(Window{source, window.hi, 0}))
      throw Error(Errc::configuration, "far source outside generated field");
    const auto table = passage_table(weights, source, Orientation::from_source, Window{source, window.hi, 0});
    const double at_origin = table.values(origin);
    window.for_each([&](LatticePoint p) { field.values(p) = table.values(p) - at_origin; });
  } else {
    const LatticePoint sink = K * diagonal;
    if (!precedes(window.hi, sink)) throw Error(Errc::configuration, "far sink inside the window");
    if (!weights.window().contains(Window{window.lo, sink, 0}))
      throw Error(Errc::configuration, "far sink outside generated field");
    const auto table = passage_table(weights, sink, Orientation::to_sink, Window{window.lo, sink, 0});
    const double at_origin = table.values(origin);
    window.for_each([&](LatticePoint p) { field.values(p) = table.values(p) - at_origin; });
  }
  return field;
}

Window largest_centered_clean(const Window& window, const Grid<std::uint8_t>& bad) {
  int shrink = 0;
  window.for_each([&](LatticePoint p) {
    if (bad(p)) shrink = std::max(shrink, window.ring(p) + 1);
  });
  const Window out = window.shrunk(shrink);
  return out.empty() ? Window{} : out;
}

Window certification_support(const Window& window, int K, Direction direction) {
  const LatticePoint origin{0, 0};
  const int sign = direction == Direction::up ? 1 : -1;
  Window support = window.united(Window{origin, origin, 0});
  const LatticePoint root = far_root(window, direction, 2 * K);
  const LatticePoint source = (sign * 2 * K) * diagonal;
  support = support.united(Window{root, root, 0}).united(Window{source, source, 0});
  return support;
}

namespace {

// Tree steps of the K-rooted tree on `window`, read off a passage table anchored at the root.
Grid<std::uint8_t> steps_on(const PassageTable& table, const Grid<double>& weights, const Window& window,
                            Direction direction) {
  Grid<std::uint8_t> steps(window, static_cast<std::uint8_t>(Step::None));
  window.for_each([&](LatticePoint p) {
    if (p == table.anchor) return;
    if (direction == Direction::up) {
      const double right = table.defined(p + e1) ? weights(p + e1) + table.values(p + e1) : -INFINITY;
      const double up = table.defined(p + e2) ? weights(p + e2) + table.values(p + e2) : -INFINITY;
      steps(p) = static_cast<std::uint8_t>(up >= right ? Step::Up : Step::Right);
    } else {
      const double left = table(p - e1);
      const double down = table(p - e2);
      steps(p) = static_cast<std::uint8_t>(down >= left ? Step::Down : Step::Left);
    }
  });
  return steps;
}

struct Probe {
  Grid<std::uint8_t> steps;
  Grid<double> busemann;  // unnormalised; only differences are compared
};

Probe probe(const Grid<double>& weights, const Window& window, const Window& busemann_window, int K,
            Direction direction) {
  const LatticePoint root = far_root(window, direction, K);
  const LatticePoint source = (direction == Direction::up ? K : -K) * diagonal;
  const Orientation o = direction == Direction::up ? Orientation::to_sink : Orientation::from_source;
  auto domain = [&](const Window& w, LatticePoint anchor) {
    const Window d = w.united(Window{anchor, anchor, 0});
    if (!weights.window().contains(d))
      throw Error(Errc::configuration, "root outside generated field " + describe(weights.window()));
    return d;
  };
  const Window outer = window.united(busemann_window);
  Probe out{Grid<std::uint8_t>(), Grid<double>(busemann_window, 0.0)};
  if (root == source) {
    const auto table = passage_table(weights, root, o, domain(outer, root));
    out.steps = steps_on(table, weights, window, direction);
    busemann_window.for_each([&](LatticePoint p) { out.busemann(p) = table.values(p); });
  } else {
    const auto tree_table = passage_table(weights, root, o, domain(window, root));
    out.steps = steps_on(tree_table, weights, window, direction);
    const auto table = passage_table(weights, source, o, domain(busemann_window, source));
    busemann_window.for_each([&](LatticePoint p) { out.busemann(p) = table.values(p); });
  }
  return out;
}

}  // namespace

StabilizationCertificate certify_stabilization(const Grid<double>& weights, const Window& window, int K,
                                               Direction direction) {
  if (window.empty()) throw Error(Errc::configuration, "empty tree window");
  if (K < std::max(window.width(), window.height()))
    throw Error(Errc::configuration, "root distance K must be at least the window side");
  StabilizationCertificate cert;
  cert.requested = window;
  cert.K = K;
  cert.K_doubled = 2 * K;
  cert.direction = direction;

  const Window busemann_window = window.united(Window{{0, 0}, {0, 0}, 0});
  const Probe near = probe(weights, window, busemann_window, K, direction);
  const Probe far = probe(weights, window, busemann_window, 2 * K, direction);
  Grid<std::uint8_t> tree_bad(window, 0);
  tree_bad.array() = (near.steps.array() != far.steps.array()).cast<std::uint8_t>();

  const LatticePoint c = window.center();
  const double offset = near.busemann(c) - far.busemann(c);
  Grid<std::uint8_t> busemann_bad(window, 0);
  window.for_each([&](LatticePoint p) { busemann_bad(p) = (near.busemann(p) - far.busemann(p)) != offset; });

  cert.tree_certified = largest_centered_clean(window, tree_bad);
  cert.busemann_certified = largest_centered_clean(window, busemann_bad);
  Grid<std::uint8_t> any_bad(window, 0);
  any_bad.array() = tree_bad.array() + busemann_bad.array();
  cert.certified = largest_centered_clean(window, any_bad);
  return cert;
}

LatticePoint coalescence_point(const GeodesicTree& tree, LatticePoint p, LatticePoint q) {
  if (!tree.domain.contains(p) || !tree.domain.contains(q))
    throw Error(Errc::precondition, "coalescence query outside tree domain");
  // each step moves the level i + j by exactly one toward the root
  const int toward = tree.direction == Direction::up ? 1 : -1;
  auto level = [&](LatticePoint u) { return toward * (u.i + u.j); };
  while (!(p == q)) {
    if (level(p) < level(q)) {
      p = tree.next(p);
    } else if (level(q) < level(p)) {
      q = tree.next(q);
    } else {
      p = tree.next(p);
      q = tree.next(q);
    }
  }
  return p;
}

namespace {

struct ConfluenceCounter {
  std::unordered_map<LatticePoint, int> incoming;
  std::unordered_set<LatticePoint> expanded;
  std::unordered_set<LatticePoint> sources;

  // returns false when the walk should stop (edge already shared)
  bool add_source(LatticePoint s) {
    if (!sources.insert(s).second) return false;
    ++incoming[s];
    return true;
  }
  bool add_edge(LatticePoint from, LatticePoint to) {
    if (!expanded.insert(from).second) return false;
    ++incoming[to];
    return true;
  }
  std::vector<LatticePoint> points() const {
    std::vector<LatticePoint> out;
    for (const auto& [p, n] : incoming)
      if (n >= 2) out.push_back(p);
    std::sort(out.begin(), out.end(), [](LatticePoint a, LatticePoint b) { return a.j != b.j ? a.j < b.j : a.i < b.i; });
    return out;
  }
};

}  // namespace

TrifurcationCensus trifurcation_census(const GeodesicTree& tree, const std::vector<LatticePoint>& sources) {
  ConfluenceCounter counter;
  for (const LatticePoint& s : sources) {
    if (!tree.window.contains(s)) throw Error(Errc::precondition, "census source outside window");
    if (!counter.add_source(s)) continue;
    for (LatticePoint cur = s; tree.has_step(cur);) {
      const LatticePoint nxt = tree.next(cur);
      if (!counter.add_edge(cur, nxt)) break;
      cur = nxt;
    }
  }
  TrifurcationCensus census;
  census.points = counter.points();
  census.count = static_cast<int>(census.points.size());
  return census;
}

std::vector<LatticePoint> confluence_points(const std::vector<std::vector<LatticePoint>>& paths) {
  ConfluenceCounter counter;
  for (const auto& path : paths) {
    if (path.empty() || !counter.add_source(path.front())) continue;
    for (std::size_t k = 0; k + 1 < path.size(); ++k)
      if (!counter.add_edge(path[k], path[k + 1])) break;
  }
  return counter.points();
}

}  // namespace kpzlab
