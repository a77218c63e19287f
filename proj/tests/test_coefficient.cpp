#include <catch_amalgamated.hpp>

#include <cmath>

#include "frbm/coefficient.hpp"

using namespace frbm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("constant coefficient", "[coefficient]") {
  auto c = Coefficient::constant(3.5);
  CHECK(c.is_constant());
  CHECK(c(0.3) == 3.5);
  CHECK(c.average() == 3.5);
  auto [hi, lo] = c.sup_inf();
  CHECK(hi == 3.5);
  CHECK(lo == 3.5);
  CHECK(c.interior_breakpoints().empty());
}

TEST_CASE("piecewise constant takes right limits at breakpoints",
          "[coefficient]") {
  auto c = Coefficient::piecewise_constant({0.0, 0.5, 1.0}, {5.0, 3.0});
  CHECK(c(0.25) == 5.0);
  CHECK(c(0.5) == 3.0);  // value on [b_i, b_{i+1})
  CHECK(c(0.75) == 3.0);
  CHECK(c(1.0) == 3.0);
  CHECK_THAT(c.average(), WithinRel(4.0, 1e-15));
  auto [hi, lo] = c.sup_inf();
  CHECK(hi == 5.0);
  CHECK(lo == 3.0);
  auto bp = c.interior_breakpoints();
  REQUIRE(bp.size() == 1);
  CHECK(bp[0] == 0.5);

  CHECK_THROWS_AS(Coefficient::piecewise_constant({0.0, 1.0}, {1.0, 2.0}),
                  ValidationError);
  CHECK_THROWS_AS(Coefficient::piecewise_constant({0.0, 0.7, 0.4, 1.0},
                                                  {1.0, 2.0, 3.0}),
                  ValidationError);
  CHECK_THROWS_AS(Coefficient::piecewise_constant({0.1, 1.0}, {1.0}),
                  ValidationError);
}

TEST_CASE("affine coefficient", "[coefficient]") {
  auto c = Coefficient::affine(1.0, 2.0);
  CHECK(c.is_affine());
  CHECK_THAT(c(0.25), WithinRel(1.5, 1e-15));
  CHECK_THAT(c.average(), WithinRel(2.0, 1e-15));
  auto [hi, lo] = c.sup_inf();
  CHECK_THAT(hi, WithinRel(3.0, 1e-15));
  CHECK_THAT(lo, WithinRel(1.0, 1e-15));

  auto dec = Coefficient::affine(2.0, -1.5);
  auto [hi2, lo2] = dec.sup_inf();
  CHECK_THAT(hi2, WithinRel(2.0, 1e-15));
  CHECK_THAT(lo2, WithinRel(0.5, 1e-15));
}

TEST_CASE("power coefficient", "[coefficient]") {
  auto c = Coefficient::power({2.0, 0.5});
  CHECK(c.is_power());
  CHECK_THAT(c(0.25), WithinRel(1.0, 1e-15));
  CHECK_THAT(c.average(), WithinRel(2.0 / 1.5, 1e-15));
  auto [hi, lo] = c.sup_inf();
  CHECK(hi == 2.0);
  CHECK(lo == 0.0);
  // Negative exponents blow up at 0.
  auto sing = Coefficient::power({1.0, -0.25});
  auto [hs, ls] = sing.sup_inf();
  CHECK(std::isinf(hs));
  CHECK(ls == 1.0);
  CHECK_THROWS_AS(Coefficient::power({1.0, -0.6}), ValidationError);
}

TEST_CASE("closure coefficient with sampled statistics", "[coefficient]") {
  auto c = Coefficient::closure([](double x) { return 4.0 + std::sin(2.0 * M_PI * x); });
  CHECK(c.kind() == Coefficient::Kind::Closure);
  CHECK_THAT(c(0.25), WithinRel(5.0, 1e-14));
  CHECK_THAT(c.average(), WithinRel(4.0, 1e-12));
  auto [hi, lo] = c.sup_inf();
  // Grid-sampled extrema of a smooth function: accurate to O(m^-2).
  CHECK_THAT(hi, WithinAbs(5.0, 1e-6));
  CHECK_THAT(lo, WithinAbs(3.0, 1e-6));
  CHECK_THROWS_AS(Coefficient::closure(nullptr), ValidationError);
}

TEST_CASE("closure declares kinks for quadrature splitting", "[coefficient]") {
  auto c = Coefficient::closure([](double x) { return std::abs(x - 0.3); },
                                {0.3});
  auto bp = c.interior_breakpoints();
  REQUIRE(bp.size() == 1);
  CHECK(bp[0] == 0.3);
  CHECK_THAT(c.average(), WithinRel(0.5 * (0.09 + 0.49), 1e-12));
}
