#include "doctest.h"

#include <random>

#include "kpzlab/lpp.hpp"
#include "oracles.hpp"

using namespace kpzlab;

namespace {

Grid<double> field(std::uint64_t seed, int side) { return WeightField::generate(seed, Window::square(side)).values; }

}  // namespace

TEST_SUITE("lpp") {
  TEST_CASE("table values match exhaustive enumeration") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Grid<double> X = field(seed, 6);
      const auto from = passage_table(X, {0, 0}, Orientation::from_source, Window::square(6));
      const auto to = passage_table(X, {5, 5}, Orientation::to_sink, Window::square(6));
      Window::square(6).for_each([&](LatticePoint q) {
        CHECK(from(q) == oracle::enumerate(X, {0, 0}, q).value);
        CHECK(to(q) == oracle::enumerate(X, q, {5, 5}).value);
      });
    }
  }

  TEST_CASE("small closed forms") {
    const Grid<double> X = field(4, 2);
    const auto t = passage_table(X, {0, 0}, Orientation::from_source, Window::square(2));
    CHECK(t({0, 0}) == 0);
    CHECK(t({1, 0}) == X({1, 0}));
    CHECK(t({1, 1}) == X({1, 1}) + std::max(X({1, 0}), X({0, 1})));
    CHECK(t({-1, 0}) == -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(passage_table(X, {3, 0}, Orientation::from_source, Window::square(2)), Error);
  }

  TEST_CASE("geodesics attain the brute-force maximum") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const Grid<double> X = field(seed, 8);
      const LatticePoint q{static_cast<int>(seed % 8), static_cast<int>((seed * 5) % 8)};
      const oracle::Best best = oracle::enumerate(X, {0, 0}, q);
      const LatticePath g = geodesic(X, {0, 0}, q);
      REQUIRE(best.maximisers == 1);
      CHECK(g.points() == best.path);
      CHECK(path_weight(X, g) == best.value);
      CHECK(g.tie_count == 0);
    }
  }

  TEST_CASE("degenerate and single-column geodesics") {
    const Grid<double> X = field(2, 4);
    const LatticePath point = geodesic(X, {1, 1}, {1, 1});
    CHECK(point.steps.empty());
    CHECK(point.end() == LatticePoint{1, 1});
    const LatticePath column = geodesic(X, {0, 0}, {0, 3});
    CHECK(column.steps == std::vector<Step>(3, Step::Up));
    CHECK(column.tie_count == 0);
    CHECK_THROWS_AS(geodesic(X, {2, 0}, {1, 3}), Error);
  }

  TEST_CASE("rotated view moves by half steps") {
    const Grid<double> X = field(9, 16);
    const auto r = geodesic(X, {0, 0}, {15, 12}).rotated();
    for (std::size_t k = 1; k < r.size(); ++k) {
      CHECK(r[k].twice_m - r[k - 1].twice_m == 1);
      CHECK(std::abs(r[k].twice_x - r[k - 1].twice_x) == 1);
    }
  }

  TEST_CASE("composition law on random triples") {
    const Grid<double> X = field(17, 40);
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> u(0, 39);
    for (int trial = 0; trial < 60; ++trial) {
      LatticePoint a{u(rng), u(rng)}, b{u(rng), u(rng)};
      const LatticePoint p{std::min(a.i, b.i), std::min(a.j, b.j)};
      const LatticePoint r{std::max(a.i, b.i), std::max(a.j, b.j)};
      const auto from_p = passage_table(X, p, Orientation::from_source, Window{p, r, 0});
      const auto to_r = passage_table(X, r, Orientation::to_sink, Window{p, r, 0});
      // maximum over an anti-diagonal layer separating p from r
      const int level = (p.i + p.j + r.i + r.j) / 2;
      double best = -std::numeric_limits<double>::infinity();
      Window{p, r, 0}.for_each([&](LatticePoint q) {
        CHECK(from_p(r) >= from_p(q) + to_r(q));
        if (q.i + q.j == level) best = std::max(best, from_p(q) + to_r(q));
      });
      CHECK(best == from_p(r));
      // equality exactly on the geodesic
      const auto on = geodesic(X, p, r).points();
      for (LatticePoint q : on) CHECK(from_p(q) + to_r(q) == from_p(r));
    }
  }

  TEST_CASE("streamed geodesic equals the materialised one") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const LatticePoint p{-7, 3}, q{40, 29};
      const Grid<double> X = WeightField::generate(seed, Window{p, q, 0}).values;
      const LatticePath g = geodesic(X, p, q);
      const StreamedGeodesic s = streamed_geodesic(seed, p, q);
      CHECK(s.path.steps == g.steps);
      CHECK(s.path.start == g.start);
      CHECK(s.passage_time == path_weight(X, g));
      CHECK(streamed_passage_time(seed, p, q) == s.passage_time);
    }
    CHECK_THROWS_AS(streamed_geodesic(1, {1, 1}, {0, 3}), Error);
  }

  TEST_CASE("restriction uniqueness") {
    const Grid<double> X = field(3, 8);
    const LatticePath g = geodesic(X, {0, 0}, {7, 7});
    const UniquenessReport report = restriction_uniqueness_check(X, g);
    CHECK(report.violations == 0);
    CHECK(report.segments_checked == 15 * 14 / 2);
    CHECK(restriction_uniqueness_check(X, geodesic(X, {0, 0}, {1, 0})).violations == 0);

    // enumerated maximisers agree: every sub-segment has a single maximiser
    const auto pts = g.points();
    for (std::size_t a = 0; a < pts.size(); a += 3)
      for (std::size_t b = a + 1; b < pts.size(); b += 4) CHECK(oracle::enumerate(X, pts[a], pts[b]).maximisers == 1);

    // forced tie on a 2x2 block: X(0,1) = X(1,0)
    Grid<double> tied = field(3, 2);
    tied({0, 1}) = tied({1, 0});
    const LatticePath t = geodesic(tied, {0, 0}, {1, 1});
    CHECK(t.tie_count == 1);
    CHECK(t.steps.back() == Step::Up);  // the tie is resolved on the last step
    CHECK(restriction_uniqueness_check(tied, t).violations >= 1);

    LatticePath corner{{0, 0}, std::vector<Step>(7, Step::Right), 0, 0};
    corner.steps.insert(corner.steps.end(), 7, Step::Up);
    REQUIRE(corner.steps != g.steps);
    CHECK_THROWS_AS(restriction_uniqueness_check(X, corner), Error);
  }
}
