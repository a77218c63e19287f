#pragma once

#include <cmath>
#include <vector>

#include "frbm/common.hpp"
#include "frbm/special_functions.hpp"

namespace frbm {

/// One algebraic term coef * x^exponent on (0,1). Sums of these close under
/// the left-sided Riemann-Liouville calculus, which is all the closed-form
/// solutions need.
struct PowerTerm {
  double coef = 0.0;
  double exponent = 0.0;
};

using PowerSum = std::vector<PowerTerm>;

inline double eval(const PowerTerm& t, double x) {
  if (t.coef == 0.0) return 0.0;
  if (t.exponent == 0.0) return t.coef;
  return t.coef * std::pow(x, t.exponent);
}

inline double eval(const PowerSum& s, double x) {
  double v = 0.0;
  for (const auto& t : s) v += eval(t, x);
  return v;
}

/// Left Riemann-Liouville integral of order sigma > 0:
/// I^sigma x^p = Gamma(p+1)/Gamma(p+1+sigma) * x^{p+sigma}.
inline PowerTerm frac_integral_power(const PowerTerm& t, double sigma) {
  require(sigma > 0.0, "frac_integral_power: order must be positive");
  require(t.exponent > -1.0, "frac_integral_power: exponent must exceed -1");
  double c = t.coef * gamma_ratio(t.exponent + 1.0, t.exponent + 1.0 + sigma);
  return {c, t.exponent + sigma};
}

/// Left Riemann-Liouville derivative of order beta in (0,1):
/// D^beta x^p = Gamma(p+1)/Gamma(p+1-beta) * x^{p-beta}.
/// The pole convention in gamma_ratio makes D^beta x^{beta-1} vanish.
inline PowerTerm frac_deriv_power(const PowerTerm& t, double beta) {
  require(beta > 0.0 && beta < 1.0, "frac_deriv_power: order must lie in (0,1)");
  require(t.exponent > -1.0, "frac_deriv_power: exponent must exceed -1");
  double c = t.coef * gamma_ratio(t.exponent + 1.0, t.exponent + 1.0 - beta);
  if (c == 0.0) return {0.0, 0.0};
  return {c, t.exponent - beta};
}

inline PowerSum frac_integral_power(const PowerSum& s, double sigma) {
  PowerSum out;
  out.reserve(s.size());
  for (const auto& t : s) out.push_back(frac_integral_power(t, sigma));
  return out;
}

inline PowerSum frac_deriv_power(const PowerSum& s, double beta) {
  PowerSum out;
  out.reserve(s.size());
  for (const auto& t : s) out.push_back(frac_deriv_power(t, beta));
  return out;
}

/// d/dx of a power sum (classical derivative, used by error identities).
inline PowerSum classical_deriv(const PowerSum& s) {
  PowerSum out;
  for (const auto& t : s) {
    if (t.exponent == 0.0 || t.coef == 0.0) continue;
    out.push_back({t.coef * t.exponent, t.exponent - 1.0});
  }
  return out;
}

/// int_0^1 of a power sum (exponents > -1).
inline double integral01(const PowerSum& s) {
  double v = 0.0;
  for (const auto& t : s) {
    require(t.exponent > -1.0, "integral01: non-integrable exponent");
    v += t.coef / (t.exponent + 1.0);
  }
  return v;
}

/// Product of two power sums (term-by-term exponent addition).
inline PowerSum product(const PowerSum& a, const PowerSum& b) {
  PowerSum out;
  out.reserve(a.size() * b.size());
  for (const auto& ta : a)
    for (const auto& tb : b) out.push_back({ta.coef * tb.coef, ta.exponent + tb.exponent});
  return out;
}

}  // namespace frbm
