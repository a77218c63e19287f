#include <catch_amalgamated.hpp>

#include <cmath>

#include "frbm/power_term.hpp"
#include "frbm/special_functions.hpp"

using namespace frbm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("fractional integral power rule", "[power]") {
  // I^sigma x^p = Gamma(p+1)/Gamma(p+1+sigma) x^{p+sigma}
  PowerTerm t{2.0, 1.5};
  PowerTerm r = frac_integral_power(t, 0.75);
  CHECK_THAT(r.exponent, WithinAbs(2.25, 1e-15));
  CHECK_THAT(r.coef, WithinRel(2.0 * gamma_fn(2.5) / gamma_fn(3.25), 1e-14));

  // Reference: I^{0.5} x^2 at x = 1 equals Gamma(3)/Gamma(3.5).
  PowerTerm q = frac_integral_power(PowerTerm{1.0, 2.0}, 0.5);
  CHECK_THAT(eval(q, 1.0),
             WithinRel(0.601802222450940039411284748331, 1e-14));
}

TEST_CASE("fractional derivative power rule and pole annihilation",
          "[power]") {
  // D^beta x^p = Gamma(p+1)/Gamma(p+1-beta) x^{p-beta}
  PowerTerm r = frac_deriv_power(PowerTerm{1.0, 1.0}, 0.5);
  CHECK_THAT(r.exponent, WithinAbs(0.5, 1e-15));
  CHECK_THAT(r.coef, WithinRel(2.0 / std::sqrt(M_PI), 1e-14));
  CHECK_THAT(r.coef, WithinRel(1.12837916709551257389615890312, 1e-14));

  // D^{s/2} x^{s/2-1} = 0: the target Gamma sits at a pole.
  for (double s : {1.8, 1.5, 1.2}) {
    PowerTerm z = frac_deriv_power(PowerTerm{1.0, 0.5 * s - 1.0}, 0.5 * s);
    CHECK(z.coef == 0.0);
  }
}

TEST_CASE("semigroup property on power sums", "[power]") {
  PowerSum f{{1.0, 0.5}, {-2.0, 2.0}};
  PowerSum lhs = frac_integral_power(frac_integral_power(f, 0.4), 0.35);
  PowerSum rhs = frac_integral_power(f, 0.75);
  for (double x : {0.2, 0.5, 0.9})
    CHECK_THAT(eval(lhs, x), WithinRel(eval(rhs, x), 1e-13));
}

TEST_CASE("derivative inverts the integral", "[power]") {
  PowerSum f{{3.0, 0.7}, {1.0, 1.3}};
  PowerSum back = frac_deriv_power(frac_integral_power(f, 0.6), 0.6);
  for (double x : {0.1, 0.4, 0.8})
    CHECK_THAT(eval(back, x), WithinRel(eval(f, x), 1e-13));
}

TEST_CASE("classical derivative drops constants", "[power]") {
  PowerSum f{{2.0, 0.0}, {1.0, 2.0}};
  PowerSum d = classical_deriv(f);
  for (double x : {0.25, 0.75}) CHECK_THAT(eval(d, x), WithinRel(2.0 * x, 1e-14));
}

TEST_CASE("unit-interval integral of a power sum", "[power]") {
  PowerSum f{{1.0, 0.5}, {-1.0, 1.5}};
  CHECK_THAT(integral01(f), WithinRel(2.0 / 3.0 - 2.0 / 5.0, 1e-14));
  CHECK_THROWS_AS(integral01(PowerSum{{1.0, -1.0}}), ValidationError);
}

TEST_CASE("products distribute over terms", "[power]") {
  PowerSum a{{1.0, 0.5}, {2.0, 1.0}};
  PowerSum b{{-1.0, 0.25}};
  PowerSum ab = product(a, b);
  for (double x : {0.3, 0.6, 0.9})
    CHECK_THAT(eval(ab, x), WithinRel(eval(a, x) * eval(b, x), 1e-13));
}
