#include <catch_amalgamated.hpp>

#include <cmath>

#include "bubbleflow/core/bubble.hpp"
#include "bubbleflow/core/inequalities.hpp"
#include "oracles.hpp"

using namespace bubbleflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("radial Sobolev bound", "[inequalities]") {
  const auto g = make_geometric_grid(5, 2048, 1e4, 1.005);
  const auto zero = radial_sobolev_bound(RadialField::zero(g), 1.0);
  REQUIRE(zero.lhs == 0.0);
  REQUIRE(zero.rhs == 0.0);

  const auto s = radial_sobolev_bound(bubble_field(g), 1.0);
  REQUIRE(s.lhs < s.rhs);
  REQUIRE(s.holds());
  REQUIRE_THAT(s.lhs, WithinRel(oracle::w(5, 1.0), 1e-3));
  REQUIRE_THAT(s.rhs, WithinRel(std::sqrt(2.0) * oracle::enorm(5, 1.0), 1e-3));

  for (double lam : {0.1, 1.0, 10.0}) {
    const auto sl = radial_sobolev_bound(bubble_field(g, lam), 1.0);
    REQUIRE(sl.holds());
    const double ref_l = std::pow(lam, -1.5) * oracle::w(5, 1.0 / lam);
    const double ref_r = std::sqrt(2.0) * oracle::enorm_scaled(5, lam, 1.0);
    REQUIRE_THAT(sl.lhs, WithinRel(ref_l, 1e-3));
    REQUIRE_THAT(sl.rhs, WithinRel(ref_r, 1e-3));
  }
}

TEST_CASE("Hardy inequality on tails", "[inequalities]") {
  REQUIRE_THAT(hardy_constant(3), WithinAbs(4.0, 1e-15));
  REQUIRE_THAT(hardy_constant(5), WithinAbs(4.0 / 9.0, 1e-15));
  const auto g = make_geometric_grid(5, 2048, 1e4, 1.005);
  const auto zero = hardy_tail_constant_check(RadialField::zero(g), 0.5);
  REQUIRE(zero.lhs == 0.0);
  REQUIRE(zero.rhs == 0.0);

  const auto h = hardy_tail_constant_check(bubble_field(g), 0.5);
  REQUIRE(h.holds());
  REQUIRE_THAT(h.lhs, WithinRel(oracle::hardy_sq(5, 0.5), 1e-3));
  REQUIRE_THAT(h.rhs, WithinRel(4.0 / 9.0 * oracle::gradient_sq(5, 0.5), 1e-3));
}

TEST_CASE("trapping certificates", "[inequalities]") {
  const auto g = make_geometric_grid(5, 2048, 1e4, 1.005);
  // C = C3^{-1} / (4 (1 + C3^{-1})) with C3^{-1} = (D-2)^2/4
  REQUIRE_THAT(trapping_constant(5), WithinRel(2.25 / (4.0 * 3.25), 1e-14));
  REQUIRE_THAT(default_trapping_delta(5), WithinRel(0.1 * oracle::enorm(5), 1e-12));

  const auto z = trapping_bound(RadialField::zero(g), 0.0);
  REQUIRE(z.certified);
  REQUIRE(z.energy == 0.0);
  REQUIRE(z.enorm2 == 0.0);

  const auto small = trapping_bound(0.01 * bubble_field(g), 0.0);
  REQUIRE(small.certified);
  REQUIRE(small.bound_holds());
  REQUIRE(small.energy >= small.constant * small.enorm2);

  REQUIRE(oracle::enorm(5) > default_trapping_delta(5));
  REQUIRE_FALSE(trapping_bound(bubble_field(g), 0.0).certified);
}

TEST_CASE("trapping threshold is configurable", "[inequalities]") {
  const auto g = make_geometric_grid(3, 1024, 1e3, 1.01);
  const auto v = 0.05 * bubble_field(g);
  REQUIRE(trapping_bound(v, 1.0, 10.0).certified);
  REQUIRE_FALSE(trapping_bound(v, 1.0, 1e-6).certified);
}
