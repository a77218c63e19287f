#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "frbm/coefficient.hpp"
#include "frbm/common.hpp"
#include "frbm/power_term.hpp"
#include "frbm/quadrature.hpp"
#include "frbm/special_functions.hpp"

namespace frbm {

/// Algebraic solution with a known power expansion; evaluates anywhere.
struct ClosedFormSolution {
  PowerSum terms;
  std::string label;

  double operator()(double x) const { return eval(terms, x); }
};

/// Unit diffusion, no reaction, f = 1.
inline ClosedFormSolution ex1_solution(double s) {
  require(s > 1.0 && s < 2.0, "ex1_solution: s must lie in (1,2)");
  double c = 1.0 / gamma_fn(s + 1.0);
  return {PowerSum{{c, s - 1.0}, {-c, s}}, "ex1"};
}

inline PowerSum ex1_source() { return PowerSum{{1.0, 0.0}}; }

/// Unit diffusion, no reaction, f = x(1-x). The 2/Gamma(s+3) weight on the
/// second term group is what makes -D^s of the expansion equal x - x^2;
/// the power rule on each term verifies it (x^{s-1} terms are annihilated).
inline ClosedFormSolution ex2_solution(double s) {
  require(s > 1.0 && s < 2.0, "ex2_solution: s must lie in (1,2)");
  double c1 = 1.0 / gamma_fn(s + 2.0);
  double c2 = 2.0 / gamma_fn(s + 3.0);
  return {PowerSum{{c1, s - 1.0}, {-c1, s + 1.0}, {-c2, s - 1.0}, {c2, s + 2.0}},
          "ex2"};
}

inline PowerSum ex2_source() { return PowerSum{{1.0, 1.0}, {-1.0, 2.0}}; }

namespace detail {

/// int_0^1 (1-t)^A t^B S(t) dt with S piecewise smooth. Without kinks a
/// single Gauss-Jacobi rule absorbs both endpoint factors. With kinks the
/// domain is cut dyadically toward both endpoints plus at every kink, so a
/// cut landing near an endpoint never leaves an unresolved boundary layer
/// of the folded weight inside a panel.
inline double weighted_unit_integral(const std::function<double(double)>& S,
                                     double A, double B,
                                     const std::vector<double>& kinks, int n) {
  bool interior_kink = false;
  for (double c : kinks)
    if (c > 1e-13 && c < 1.0 - 1e-13) interior_kink = true;
  if (!interior_kink) return integrate_endpoint_weighted(S, 0.0, 1.0, B, A, n);

  const int L = 44;
  std::vector<double> cuts;
  cuts.push_back(0.0);
  for (int j = L; j >= 2; --j) cuts.push_back(std::ldexp(1.0, -j));
  cuts.push_back(0.5);
  for (int j = 2; j <= L; ++j) cuts.push_back(1.0 - std::ldexp(1.0, -j));
  cuts.push_back(1.0);
  for (double c : kinks)
    if (c > 1e-13 && c < 1.0 - 1e-13) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return b - a < 1e-15; }),
             cuts.end());

  double total = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    double lo = cuts[p], hi = cuts[p + 1];
    bool at0 = (p == 0), at1 = (p + 2 == cuts.size());
    auto F = [&](double t) {
      double v = S(t);
      if (!at0) v *= std::pow(t, B);
      if (!at1) v *= std::pow(1.0 - t, A);
      return v;
    };
    total += integrate_endpoint_weighted(F, lo, hi, at0 ? B : 0.0,
                                         at1 ? A : 0.0, n);
  }
  return total;
}

/// Fritsch-Carlson monotone cubic interpolant on a strictly increasing grid.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    require(n >= 3 && y_.size() == n, "MonotoneCubic: need at least 3 points");
    std::vector<double> h(n - 1), del(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      require(h[i] > 0.0, "MonotoneCubic: grid must increase");
      del[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    m_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (del[i - 1] * del[i] <= 0.0) continue;
      double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
      m_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
    }
    m_[0] = edge_slope(h[0], h[1], del[0], del[1]);
    m_[n - 1] = edge_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  }

  double operator()(double x) const {
    const std::size_t n = x_.size();
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    std::size_t i =
        std::upper_bound(x_.begin(), x_.end(), x) - x_.begin() - 1;
    i = std::min(i, n - 2);
    double h = x_[i + 1] - x_[i];
    double t = (x - x_[i]) / h;
    double t2 = t * t, t3 = t2 * t;
    return y_[i] * (2.0 * t3 - 3.0 * t2 + 1.0) + h * m_[i] * (t3 - 2.0 * t2 + t) +
           y_[i + 1] * (-2.0 * t3 + 3.0 * t2) + h * m_[i + 1] * (t3 - t2);
  }

 private:
  static double edge_slope(double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0) return 0.0;
    if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return m;
  }

  std::vector<double> x_, y_, m_;
};

}  // namespace detail

/// u = -g + [(I_d^s f)(1)] p with g = I^{s/2}(d^{-1} I^{s/2} f) and
/// p = rho / rho(1), rho = I^{s/2}(d^{-1} x^{s/2-1}); the r = 0 strong
/// solution. All fractional integrals are rescaled to (0,1) so one weighted
/// rule serves every evaluation point; values are cached on a Chebyshev-
/// distributed grid and interpolated monotonically in between.
class StrongSolution {
 public:
  StrongSolution(Coefficient d, Coefficient f, FracOrder order,
                 int grid_size = 4096, int n_quad = 24)
      : d_(std::move(d)), f_(std::move(f)), s_(order.s()), n_(n_quad) {
    sigma_ = 0.5 * s_;
    // rule-doubling agreement gates the whole construction
    self_check();
    rho1_ = rho_at(1.0, n_);
    require(rho1_ > 0.0, "StrongSolution: rho(1) must be positive");
    scale_ = g_at(1.0, n_);
    const int M = grid_size;
    require(M >= 16, "StrongSolution: grid too small");
    grid_.resize(M);
    u_.resize(M);
    p_.resize(M);
    for (int i = 0; i < M; ++i) {
      double t = std::sin(M_PI * i / (2.0 * (M - 1)));
      grid_[i] = t * t;
    }
    grid_.front() = 0.0;
    grid_.back() = 1.0;
    for (int i = 0; i < M; ++i) {
      double x = grid_[i];
      if (x == 0.0) {
        p_[i] = 0.0;
        u_[i] = 0.0;
      } else {
        p_[i] = rho_at(x, n_) / rho1_;
        u_[i] = -g_at(x, n_) + scale_ * p_[i];
      }
    }
    interp_ = detail::MonotoneCubic(grid_, u_);
  }

  double operator()(double x) const { return interp_(x); }

  double value_exact(double x) const {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -g_at(x, n_) + scale_ * rho_at(x, n_) / rho1_;
  }

  double p_exact(double x) const {
    if (x <= 0.0) return 0.0;
    return rho_at(x, n_) / rho1_;
  }

  double scale() const { return scale_; }
  double rho1() const { return rho1_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return u_; }
  const std::vector<double>& p_values() const { return p_; }

  std::function<double(double)> as_function() const {
    auto interp = interp_;
    return [interp](double x) { return interp(x); };
  }

 private:
  double dinv(double y) const {
    double v = d_(y);
    if (v <= 0.0)
      throw CoefficientSignError("StrongSolution: diffusion nonpositive");
    return 1.0 / v;
  }

  std::vector<double> mapped_kinks(const Coefficient& c, double x) const {
    std::vector<double> out;
    if (x <= 0.0) return out;
    for (double k : c.interior_breakpoints())
      if (k < x) out.push_back(k / x);
    return out;
  }

  double rho_at(double x, int n) const {
    if (x <= 0.0) return 0.0;
    auto S = [&](double tau) { return dinv(x * tau); };
    return std::pow(x, s_ - 1.0) / gamma_fn(sigma_) *
           detail::weighted_unit_integral(S, sigma_ - 1.0, sigma_ - 1.0,
                                          mapped_kinks(d_, x), n);
  }

  // vtilde(t) = I^{sigma} f (t) / t^sigma, smooth in t
  double vtilde_at(double t, int n) const {
    auto S = [&](double w) { return f_(t * w); };
    return detail::weighted_unit_integral(S, sigma_ - 1.0, 0.0,
                                          mapped_kinks(f_, t), n) /
           gamma_fn(sigma_);
  }

  double g_at(double x, int n) const {
    if (x <= 0.0) return 0.0;
    auto S = [&](double tau) { return dinv(x * tau) * vtilde_at(x * tau, n); };
    std::vector<double> kinks = mapped_kinks(d_, x);
    for (double k : mapped_kinks(f_, x)) kinks.push_back(k);
    return std::pow(x, s_) / gamma_fn(sigma_) *
           detail::weighted_unit_integral(S, sigma_ - 1.0, sigma_,
                                          kinks, n);
  }

  void self_check() const {
    const double probes[3] = {0.37, 0.81, 1.0};
    for (double x : probes) {
      double a = rho_at(x, n_), b = rho_at(x, 2 * n_);
      if (std::abs(a - b) > 1e-8 * std::max(1.0, std::abs(a)))
        throw QuadratureError("StrongSolution: rho quadrature not converged");
      double ga = g_at(x, n_), gb = g_at(x, 2 * n_);
      if (std::abs(ga - gb) > 1e-8 * std::max(1.0, std::abs(ga)))
        throw QuadratureError("StrongSolution: g quadrature not converged");
    }
  }

  Coefficient d_, f_;
  double s_, sigma_ = 0.0, rho1_ = 0.0, scale_ = 0.0;
  int n_;
  std::vector<double> grid_, u_, p_;
  detail::MonotoneCubic interp_;
};

inline StrongSolution build_strong_solution(const Coefficient& d,
                                            const Coefficient& f, double s,
                                            int grid_size = 4096,
                                            int n_quad = 24) {
  return StrongSolution(d, f, FracOrder(s), grid_size, n_quad);
}

}  // namespace frbm
