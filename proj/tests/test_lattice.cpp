#include "doctest.h"

#include <cmath>
#include <vector>

#include "kpzlab/distributions.hpp"
#include "kpzlab/lattice.hpp"

using namespace kpzlab;

TEST_SUITE("lattice") {
  TEST_CASE("box_of agrees with exhaustive box membership") {
    for (int k = 0; k < 4000; ++k) {
      const Eigen::Vector2d q(10 * derive_uniform(11, {k, 0}) - 5, 10 * derive_uniform(11, {k, 1}) - 5);
      int hits = 0;
      LatticePoint owner;
      for (int i = -8; i <= 8; ++i)
        for (int j = -8; j <= 8; ++j)
          if (in_box({i, j}, q)) {
            ++hits;
            owner = {i, j};
          }
      REQUIRE(hits == 1);
      CHECK(box_of(q) == owner);
    }
  }

  TEST_CASE("box boundaries follow the half-open convention") {
    // s = 1/4, x = 1/2 is inside Box(0)
    CHECK(box_of(Eigen::Vector2d(0.75, -0.25)) == LatticePoint{0, 0});
    // s = -1/4 is outside Box(0); it lands in Box(-1, 0) at s = 1/4, x = 1/2
    CHECK_FALSE(in_box({0, 0}, Eigen::Vector2d(-0.25, -0.25)));
    CHECK(box_of(Eigen::Vector2d(-0.25, -0.25)) == LatticePoint{-1, 0});
    CHECK(box_of(Eigen::Vector2d(3, -7)) == LatticePoint{3, -7});
    CHECK(box_of(Eigen::Vector2d(0.0, 0.0)) == LatticePoint{0, 0});
    CHECK(box_of(Eigen::Vector2d(0.25, 0.25)) == LatticePoint{0, 0});
    CHECK(box_of(Eigen::Vector2d(0.3, 0.3)) == LatticePoint{0, 1});
  }

  TEST_CASE("rotated coordinates of reference points") {
    CHECK(to_rotated(LatticePoint{0, 0}) == RotatedCoord{0, 0});
    CHECK(to_rotated(LatticePoint{1, 1}).m() == 1);
    CHECK(to_rotated(LatticePoint{1, 1}).x() == 0);
    CHECK(to_rotated(DualPoint{{0, 0}}).m() == 0.5);
    CHECK(to_rotated(DualPoint{{0, 0}}).x() == 0);
  }

  TEST_CASE("rotated coordinates round trip and respect sublattice parity") {
    for (int i = -5; i <= 5; ++i)
      for (int j = -5; j <= 5; ++j) {
        const LatticePoint p{i, j};
        const RotatedCoord r = to_rotated(p);
        CHECK(primal_from_rotated(r) == p);
        CHECK(r.m() == 0.5 * (i + j));
        CHECK(r.x() == 0.5 * (i - j));
        CHECK_THROWS_AS(dual_from_rotated(r), Error);
        const DualPoint d{p};
        CHECK(dual_from_rotated(to_rotated(d)) == d);
        CHECK_THROWS_AS(primal_from_rotated(to_rotated(d)), Error);
      }
  }

  TEST_CASE("window algebra") {
    const Window c = Window::centered(4);
    CHECK(c.lo == LatticePoint{-2, -2});
    CHECK(c.hi == LatticePoint{1, 1});
    CHECK(c.contains(LatticePoint{0, 0}));
    CHECK(Window::centered(5).center() == LatticePoint{0, 0});
    CHECK(c.shrunk(1).area() == 4);
    CHECK(c.shrunk(2).empty());
    CHECK(Window::square(3).united(Window::square(3).shifted({5, 0})).width() == 8);
    CHECK(Window::square(3).intersected(Window::square(3).shifted({5, 0})).empty());
    CHECK(c.ring(c.lo) == 0);
    CHECK(c.ring({0, -1}) == 1);

    std::vector<LatticePoint> order;
    Window::square(2).for_each([&](LatticePoint p) { order.push_back(p); });
    CHECK(order == std::vector<LatticePoint>{{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  }

  TEST_CASE("grid access and restriction") {
    Grid<double> g(Window::square(4), 0.0);
    Window::square(4).for_each([&](LatticePoint p) { g(p) = p.i + 10 * p.j; });
    const Grid<double> r = g.restricted(Window{{1, 1}, {2, 3}, 0});
    CHECK(r({2, 3}) == 32);
    CHECK(r.window().area() == 6);
    CHECK_THROWS_AS(r.at({0, 0}), Error);
    CHECK_THROWS_AS(g.restricted(Window{{0, 0}, {4, 0}, 0}), Error);
  }

  TEST_CASE("weights are exp(1) on the dyadic grid and reproducible") {
    std::vector<double> w;
    for (int k = 0; k < 100000; ++k) {
      const double x = derive_weight(5, {k % 317, k / 317});
      REQUIRE(x > 0);
      REQUIRE(std::ldexp(x, weight_quantum_bits) == std::floor(std::ldexp(x, weight_quantum_bits)));
      w.push_back(x);
    }
    CHECK(ks_statistic(w, exponential_cdf(1.0)) < 0.01);
    CHECK(derive_weight(5, {3, 4}) == derive_weight(5, {3, 4}));
    CHECK(derive_weight(5, {3, 4}) != derive_weight(6, {3, 4}));
    CHECK(derive_weight(5, {3, 4}) != derive_weight(5, {4, 3}));

    const WeightField f = WeightField::generate(5, Window::square(8));
    Window::square(8).for_each([&](LatticePoint p) { CHECK(f(p) == derive_weight(5, p)); });
  }

  TEST_CASE("replica seeds are hashed, not offset") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 1) != derive_seed(2, 0));
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));
  }

  TEST_CASE("seed parsing") {
    CHECK(parse_seed("42") == 42);
    CHECK(parse_seed("0x2a") == 42);
    CHECK(parse_seed("0X2A") == 42);
    CHECK(parse_seed("18446744073709551615") == 18446744073709551615ULL);
    CHECK_THROWS_AS(parse_seed(""), Error);
    CHECK_THROWS_AS(parse_seed("-1"), Error);
    CHECK_THROWS_AS(parse_seed("12x"), Error);
    CHECK_THROWS_AS(parse_seed("18446744073709551616"), Error);
  }
}
