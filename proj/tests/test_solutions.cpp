#include <catch_amalgamated.hpp>

#include <cmath>

#include "frbm/solutions.hpp"

using namespace frbm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("first closed-form family point values", "[solutions]") {
  // u = (x^{s-1} - x^s)/Gamma(s+1), multiprecision references.
  CHECK_THAT(ex1_solution(1.8)(0.5),
             WithinRel(0.171295059206498636632650082438, 1e-13));
  CHECK_THAT(ex1_solution(1.5)(0.5),
             WithinRel(0.26596152026762178529329737329, 1e-13));
  CHECK_THAT(ex1_solution(1.2)(0.5),
             WithinRel(0.395057449271624900093107600977, 1e-13));
  CHECK_THAT(ex1_solution(1.8)(0.25),
             WithinRel(0.147574764547218525392768869426, 1e-13));
  CHECK_THAT(ex1_solution(1.5)(0.25),
             WithinRel(0.28209479177387814347403972578, 1e-13));
  CHECK_THAT(ex1_solution(1.2)(0.25),
             WithinRel(0.515876227496614565663706240959, 1e-13));
  CHECK(ex1_solution(1.5)(0.0) == 0.0);
  CHECK_THAT(ex1_solution(1.5)(1.0), WithinAbs(0.0, 1e-15));
}

TEST_CASE("second closed-form family point values", "[solutions]") {
  CHECK_THAT(ex2_solution(1.8)(0.5),
             WithinRel(0.0354181513396895677247960696771, 1e-13));
  CHECK_THAT(ex2_solution(1.5)(0.5),
             WithinRel(0.0531923040535243570586594746579, 1e-13));
  CHECK_THAT(ex2_solution(1.2)(0.5),
             WithinRel(0.0729509494393625525740113467714, 1e-13));
  CHECK_THAT(ex2_solution(1.8)(0.25),
             WithinRel(0.0294733434833495645168828804069, 1e-13));
  CHECK_THAT(ex2_solution(1.5)(0.25),
             WithinRel(0.0564189583547756286948079451561, 1e-13));
  CHECK_THAT(ex2_solution(1.2)(0.25),
             WithinRel(0.100757075682932532356192625187, 1e-13));
  // Sources: f = 1 and f = x(1-x).
  CHECK(ex1_source().size() == 1);
  CHECK(ex2_source().size() == 2);
}

TEST_CASE("strong solution reproduces the unit-diffusion closed form",
          "[solutions]") {
  for (double s : {1.8, 1.5, 1.2}) {
    StrongSolution ss(Coefficient::constant(1.0), Coefficient::constant(1.0),
                      FracOrder(s), 64, 24);
    auto u = ex1_solution(s);
    for (double x : {0.1, 0.25, 0.5, 0.9})
      CHECK_THAT(ss.value_exact(x), WithinAbs(u(x), 1e-9));
    // p is the homogeneous layer x^{s-1} when d = 1.
    CHECK_THAT(ss.p_exact(0.5), WithinRel(std::pow(0.5, s - 1.0), 1e-9));
  }
}

TEST_CASE("strong solution with the parabolic source", "[solutions]") {
  StrongSolution ss(Coefficient::constant(1.0),
                    Coefficient::closure([](double x) { return x * (1.0 - x); }),
                    FracOrder(1.5), 64, 24);
  auto u = ex2_solution(1.5);
  for (double x : {0.25, 0.5, 0.75})
    CHECK_THAT(ss.value_exact(x), WithinAbs(u(x), 1e-9));
}

TEST_CASE("strong solution for the smooth-coefficient problem",
          "[solutions]") {
  // d = 4 + sin(2 pi x), f = 1. References from multiprecision evaluation
  // of rho = I^{s/2}(d^{-1} x^{s/2-1}) and g = I^{s/2}(d^{-1} I^{s/2} f).
  auto d = Coefficient::closure(
      [](double x) { return 4.0 + std::sin(2.0 * M_PI * x); });
  StrongSolution ss(d, Coefficient::constant(1.0), FracOrder(1.5), 64, 24);
  CHECK_THAT(ss.rho1(), WithinRel(0.356109239097199666641998406574, 1e-9));
  CHECK_THAT(ss.p_exact(0.5),
             WithinRel(0.604050200446282664688398394037, 1e-9));
  CHECK_THAT(ss.value_exact(0.5),
             WithinRel(0.0677275623089972083080142355016, 1e-8));
  CHECK_THAT(ss.value_exact(0.25),
             WithinRel(0.068739871328289746139606950403, 1e-8));
  CHECK(ss.p_exact(0.0) == 0.0);
  CHECK_THAT(ss.p_exact(1.0), WithinAbs(1.0, 1e-12));

  StrongSolution s18(d, Coefficient::constant(1.0), FracOrder(1.8), 64, 24);
  CHECK_THAT(s18.rho1(), WithinRel(0.295993180146371388178905287994, 1e-9));
  StrongSolution s12(d, Coefficient::constant(1.0), FracOrder(1.2), 64, 24);
  CHECK_THAT(s12.rho1(), WithinRel(0.416713182575445937415784678844, 1e-9));
}

TEST_CASE("strong solution with a diffusion jump", "[solutions]") {
  auto d = Coefficient::piecewise_constant({0.0, 0.5, 1.0}, {5.0, 3.0});
  StrongSolution ss(d, Coefficient::constant(1.0), FracOrder(1.5), 64, 24);
  CHECK_THAT(ss.rho1(), WithinRel(0.368729247486023120284156319666, 1e-9));
  CHECK_THAT(ss.value_exact(0.5),
             WithinRel(0.06799087896471103536780440227, 1e-8));
  CHECK(ss.p_exact(0.0) == 0.0);
  CHECK_THAT(ss.p_exact(1.0), WithinAbs(1.0, 1e-12));
}

TEST_CASE("grid interpolant tracks the exact evaluator", "[solutions]") {
  auto d = Coefficient::closure(
      [](double x) { return 4.0 + std::sin(2.0 * M_PI * x); });
  StrongSolution ss(d, Coefficient::constant(1.0), FracOrder(1.5), 512, 24);
  auto fn = ss.as_function();
  for (double x : {0.05, 0.21, 0.48, 0.73, 0.97})
    CHECK_THAT(fn(x), WithinAbs(ss.value_exact(x), 1e-7));
  REQUIRE(ss.grid().size() == 512);
  CHECK(ss.grid().front() == 0.0);
  CHECK(ss.grid().back() == 1.0);
  CHECK(ss.values().front() == 0.0);
}

TEST_CASE("strong solution rejects sign-changing diffusion", "[solutions]") {
  CHECK_THROWS(StrongSolution(Coefficient::affine(0.5, -1.0),
                              Coefficient::constant(1.0), FracOrder(1.5), 64,
                              24));
}
