#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "frbm/assembly.hpp"
#include "frbm/common.hpp"
#include "frbm/mesh.hpp"
#include "frbm/power_term.hpp"
#include "frbm/quadrature.hpp"

namespace frbm {

enum class NormKind { L2, SemiNorm, Full };

/// Error between a coarse FE function and a reference FE function on a nested
/// finer mesh: prolong, subtract, apply the requested Gram form.
inline double fe_error(const PiecewiseLinearFn& u_h,
                       const PiecewiseLinearFn& u_ref, FracOrder order,
                       NormKind norm) {
  require(u_ref.mesh.refines(u_h.mesh), "fe_error: meshes must be nested");
  Eigen::VectorXd e = u_ref.values - prolong(u_h, u_ref.mesh).values;
  double sq = 0.0;
  if (norm == NormKind::L2 || norm == NormKind::Full)
    sq += mass_quadratic_form(u_ref.mesh, e);
  if (norm == NormKind::SemiNorm || norm == NormKind::Full)
    sq += SeminormStencil(u_ref.mesh, order.beta()).quadratic_form(e);
  return std::sqrt(std::max(sq, 0.0));
}

/// Closed-form references enter by nodal interpolation onto the reference
/// mesh; the interpolation floor is below the FE error when the reference
/// mesh is much finer than the study mesh.
inline double fe_error(const PiecewiseLinearFn& u_h,
                       const std::function<double(double)>& u_ref,
                       const Mesh& ref_mesh, FracOrder order, NormKind norm) {
  return fe_error(u_h, interpolate(u_ref, ref_mesh), order, norm);
}

namespace detail {

/// T(a, q, p) = int_a^1 (x-a)^q x^{p-1} dx for q in (0,1), p > 0.
/// a = 0 collapses to a pure power. For a > 0 the first dyadic panel
/// carries the Holder factor into a Gauss-Jacobi weight; the remaining
/// panels double geometrically so the smooth factor stays uniformly
/// resolved even when a is one mesh cell away from the singular origin.
inline double weighted_tail_moment(double a, double q, double p, int n_quad = 24) {
  if (a <= 0.0) return 1.0 / (q + p);
  if (a >= 1.0) return 0.0;
  auto F = [p](double x) { return std::pow(x, p - 1.0); };
  double acc = 0.0;
  double lo = a, hi = std::min(2.0 * a, 1.0);
  acc += integrate_endpoint_weighted(F, lo, hi, q, 0.0, n_quad);
  while (hi < 1.0) {
    lo = hi;
    hi = std::min(2.0 * lo, 1.0);
    auto Fw = [&](double x) { return F(x) * std::pow(x - a, q); };
    acc += integrate_endpoint_weighted(Fw, lo, hi, 0.0, 0.0, n_quad);
  }
  return acc;
}

}  // namespace detail

/// (I^{2-2beta} u_h', u') for an algebraic u: the jump representation of
/// u_h' turns the fractional integral into shifted power tails, leaving one
/// weighted moment per (node, term) pair.
inline double cross_energy_term(const PiecewiseLinearFn& u_h, const PowerSum& u,
                                FracOrder order) {
  const double beta = order.beta();
  const double q = 2.0 - 2.0 * beta;
  const auto sig = u_h.slope_jumps();
  const int N = u_h.mesh.n_elements();
  double acc = 0.0;
  for (int k = 0; k < N; ++k) {
    if (sig[k] == 0.0) continue;
    double xk = u_h.mesh.node(k);
    double inner = 0.0;
    for (const auto& t : u)
      inner += t.coef * t.exponent *
               detail::weighted_tail_moment(xk, q, t.exponent);
    acc += sig[k] * inner;
  }
  return acc / gamma_fn(q + 1.0);
}

struct ExactErrors {
  double l2 = 0.0;
  double seminorm = 0.0;
};

/// Exact discretization errors against an algebraic solution of the
/// unit-diffusion, reaction-free problem with source f (so that the weak
/// action of u against any test function is (f, .)). The semi-norm error
/// comes from expanding a1(u - u_h, u - u_h) and moving every u-only or
/// mixed pairing onto closed-form integrals; no refinement-based reference
/// enters, so slow asymptotic rates are measured cleanly.
inline ExactErrors exact_errors(const PiecewiseLinearFn& u_h, const PowerSum& u,
                                const PowerSum& f, FracOrder order) {
  const Mesh& mesh = u_h.mesh;
  const double beta = order.beta();
  const double cb = std::abs(std::cos(M_PI * beta));

  // L2: ||u||^2 - 2 (u, u_h) + ||u_h||^2, all pieces exact
  double uu = integral01(product(u, u));
  double u_uh = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    double xl = mesh.node(e), xr = mesh.node(e + 1);
    double sl = u_h.slope(e);
    double c0 = u_h.node_value(e) - sl * xl;
    for (const auto& t : u)
      u_uh += t.coef * detail::power_linear_integral(xl, xr, t.exponent, sl, c0);
  }
  double uhuh = mass_quadratic_form(mesh, u_h.values);
  ExactErrors out;
  out.l2 = std::sqrt(std::max(uu - 2.0 * u_uh + uhuh, 0.0));

  // semi-norm: |e|^2 = |u_h|^2_G + [(f,u) - (f,u_h) - (I^{2-2b}u_h',u')]/|cos(pi b)|
  double fu = integral01(product(f, u));
  double fuh = assemble_load(mesh, f).dot(u_h.values);
  double cross = cross_energy_term(u_h, u, order);
  double semi_sq = SeminormStencil(mesh, beta).quadratic_form(u_h.values) +
                   (fu - fuh - cross) / cb;
  out.seminorm = std::sqrt(std::max(semi_sq, 0.0));
  return out;
}

}  // namespace frbm
