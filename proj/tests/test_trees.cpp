#include "doctest.h"

#include <algorithm>
#include <set>

#include "kpzlab/trees.hpp"
#include "oracles.hpp"

using namespace kpzlab;

namespace {

Grid<double> field_for(std::uint64_t seed, const Window& window, int K) {
  Window w = window.united(Window{{0, 0}, {0, 0}, 0});
  for (Direction d : {Direction::up, Direction::down}) {
    const LatticePoint r = far_root(window, d, K);
    w = w.united(Window{r, r, 0});
    const LatticePoint s = (d == Direction::up ? K : -K) * diagonal;
    w = w.united(Window{s, s, 0});
  }
  return WeightField::generate(seed, w).values;
}

std::set<std::pair<int, int>> as_set(const std::vector<LatticePoint>& pts) {
  std::set<std::pair<int, int>> out;
  for (LatticePoint p : pts) out.insert({p.i, p.j});
  return out;
}

}  // namespace

TEST_SUITE("trees") {
  TEST_CASE("root paths are geodesics to the root") {
    const Window w = Window::square(8);
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const Grid<double> X = field_for(seed, w, 8);
      const GeodesicTree up = build_tree(X, w, Direction::up, 8);
      const GeodesicTree down = build_tree(X, w, Direction::down, 8);
      CHECK(up.root == far_root(w, Direction::up, 8));
      w.for_each([&](LatticePoint p) {
        CHECK(up.root_path(p).steps == geodesic(X, p, up.root).steps);
        const auto reversed = geodesic(X, down.root, p).points();
        auto path = down.root_path(p).points();
        std::reverse(path.begin(), path.end());
        CHECK(path == reversed);
      });
      CHECK(up.tie_count == 0);
      CHECK(down.tie_count == 0);
    }
  }

  TEST_CASE("small tree against a per-vertex geodesic oracle") {
    const Window w = Window::square(2);
    const Grid<double> X = WeightField::generate(6, Window::square(3)).values;
    const GeodesicTree up = build_tree(X, w, Direction::up, 2);
    REQUIRE(up.root == LatticePoint{2, 2});
    w.for_each([&](LatticePoint p) {
      const oracle::Best best = oracle::enumerate(X, p, up.root);
      CHECK(up.root_path(p).points() == best.path);
    });
    // boundary of the cone: only Up is admissible below the root
    CHECK(up.step({2, 0}) == Step::Up);
    CHECK(up.step({0, 2}) == Step::Right);
  }

  TEST_CASE("root distance shorter than the window is rejected") {
    const Window w = Window::centered(64);
    const Grid<double> X = field_for(1, w, 64);
    CHECK_THROWS_AS(build_tree(X, w, Direction::down, 1), Error);
    CHECK_THROWS_AS(certify_stabilization(X, w, 1), Error);
    CHECK_THROWS_AS(build_tree(X, w, Direction::down, 400), Error);  // root outside the field
  }

  TEST_CASE("root paths merge at most once") {
    const Window w = Window::square(8);
    const Grid<double> X = field_for(3, w, 16);
    for (Direction d : {Direction::up, Direction::down}) {
      const GeodesicTree t = build_tree(X, w, d, 16);
      w.for_each([&](LatticePoint p) {
        const auto a = as_set(t.root_path(p).points());
        w.for_each([&](LatticePoint q) {
          const auto b = t.root_path(q).points();
          // once b enters a it stays in a
          bool inside = false;
          for (LatticePoint u : b) {
            const bool now = a.count({u.i, u.j}) > 0;
            CHECK((!inside || now));
            inside = inside || now;
          }
        });
      });
    }
  }

  TEST_CASE("coalescence point equals the first common vertex of materialised paths") {
    const Window w = Window::square(32);
    const Grid<double> X = field_for(8, w, 32);
    const GeodesicTree t = build_tree(X, w, Direction::down, 32);
    for (int k = 0; k < 200; ++k) {
      const LatticePoint p{k % 32, (k * 7) % 32}, q{(k * 13) % 32, (k * 3 + 5) % 32};
      const auto a = as_set(t.root_path(p).points());
      LatticePoint first{};
      for (LatticePoint u : t.root_path(q).points())
        if (a.count({u.i, u.j})) {
          first = u;
          break;
        }
      CHECK(coalescence_point(t, p, q) == first);
    }
    CHECK(coalescence_point(t, {4, 4}, {4, 4}) == LatticePoint{4, 4});
    const LatticePoint below = t.next(t.next({10, 10}));
    CHECK(coalescence_point(t, {10, 10}, below) == below);
  }

  TEST_CASE("Busemann field") {
    const Window w = Window::centered(5);
    const int K = 16;
    const Grid<double> X = field_for(2, w, K);
    const BusemannField B = busemann_field(X, w, K, Direction::down);
    CHECK(B({0, 0}) == 0);
    Window{w.lo, w.hi - diagonal, 0}.for_each([&](LatticePoint p) {
      CHECK(B(p + e1) - B(p) >= X(p + e1));
      CHECK(B(p + e2) - B(p) >= X(p + e2));
    });

    // recompute through the coalescence point of the down root paths
    const GeodesicTree t = build_tree(X, w, Direction::down, K);
    REQUIRE(t.root == -K * diagonal);
    w.for_each([&](LatticePoint p) {
      const LatticePoint z = coalescence_point(t, p, {0, 0});
      const double tp = path_weight(X, geodesic(X, z, p));
      const double t0 = path_weight(X, geodesic(X, z, {0, 0}));
      CHECK(B(p) == tp - t0);
    });

    // additivity along tree paths
    w.for_each([&](LatticePoint p) {
      const auto path = t.root_path(p).points();
      double sum = 0;
      for (std::size_t k = 1; k < path.size() && w.contains(path[k]); ++k) {
        sum += X(path[k - 1]);
        CHECK(B(p) - B(path[k]) == sum);
      }
    });

    const BusemannField U = busemann_field(X, w, K, Direction::up);
    CHECK(U({0, 0}) == 0);
    CHECK(U({0, 0}) - U({1, 0}) >= X({1, 0}));
    CHECK_THROWS_AS(busemann_field(X, Window::square(3).shifted({1, 1}), K, Direction::down), Error);
  }

  TEST_CASE("largest centred clean rectangle") {
    const Window w = Window::square(10);
    Grid<std::uint8_t> bad(w, 0);
    CHECK(largest_centered_clean(w, bad) == w);
    bad({2, 5}) = 1;  // ring 2
    CHECK(largest_centered_clean(w, bad) == w.shrunk(3));
    bad({4, 4}) = 1;  // ring 4
    CHECK(largest_centered_clean(w, bad).empty());
  }

  TEST_CASE("stabilisation certificate") {
    const Window w = Window::centered(8);
    const Grid<double> X = field_for(5, w, 1024);
    const StabilizationCertificate far = certify_stabilization(X, w, 512);
    CHECK(far.certified == w);
    CHECK(far.K_doubled == 1024);

    // certified(K) is contained in certified(2K)
    const Window big = Window::centered(32);
    const Grid<double> Y = field_for(5, big, 256);
    const Window c1 = certify_stabilization(Y, big, 32).certified;
    const Window c2 = certify_stabilization(Y, big, 64).certified;
    CHECK(c2.contains(c1));
  }

  TEST_CASE("trifurcation census") {
    const Window w = Window::square(32);
    const Grid<double> X = field_for(4, w, 64);
    const GeodesicTree t = build_tree(X, w, Direction::up, 64);
    CHECK(trifurcation_census(t, {{3, 3}}).count == 0);
    CHECK(trifurcation_census(t, {{3, 3}, {20, 3}}).count == 1);

    std::vector<LatticePoint> sources;
    for (int s = 0; s < 8; ++s) sources.push_back({4 * s, 0});
    const TrifurcationCensus census = trifurcation_census(t, sources);
    std::set<std::pair<int, int>> pairwise;
    for (std::size_t a = 0; a < sources.size(); ++a)
      for (std::size_t b = a + 1; b < sources.size(); ++b) {
        const LatticePoint z = coalescence_point(t, sources[a], sources[b]);
        pairwise.insert({z.i, z.j});
      }
    CHECK(as_set(census.points) == pairwise);
    CHECK(census.count <= 7);

    std::vector<std::vector<LatticePoint>> paths;
    for (LatticePoint s : sources) paths.push_back(t.root_path(s).points());
    CHECK(as_set(confluence_points(paths)) == pairwise);
  }
}
