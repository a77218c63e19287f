#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <tuple>
#include <vector>

#include "frbm/common.hpp"
#include "frbm/special_functions.hpp"

namespace frbm {

enum class RuleKind { GaussLegendre, GaussJacobi };

/// Quadrature rule on the reference element [0,1].
///
/// Nodes and weights satisfy  sum_i w_i F(t_i) ~ int_0^1 (1-t)^a t^b F(t) dt,
/// i.e. the endpoint weight (1-t)^a t^b is absorbed into the rule. Gauss-
/// Legendre is the (a,b) = (0,0) case. Rules are positive and open: nodes lie
/// strictly inside (0,1), so integrands may be singular at the endpoints as
/// long as the singular factor is the declared weight.
struct QuadratureRule {
  RuleKind kind = RuleKind::GaussLegendre;
  double alpha = 0.0;  // exponent on (1-t), the upper endpoint
  double beta = 0.0;   // exponent on t, the lower endpoint
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

namespace detail {

// Golub-Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
// matrix of the orthogonal-polynomial recurrence; weights come from the first
// eigenvector components scaled by the zeroth moment.
inline QuadratureRule golub_welsch(int n, double a, double b, RuleKind kind) {
  require(n >= 1, "quadrature: need at least one node");
  require(a > -1.0 && b > -1.0, "quadrature: exponents must exceed -1");
  require(std::abs(a + b + 1.0) > 1e-8,
          "quadrature: exponent sum -1 is outside the supported range");
  // Kernel-table assembly requests the same few rules millions of times;
  // memoize per thread so the eigensolve runs once per distinct rule.
  using Key = std::tuple<int, int, double, double>;
  thread_local std::map<Key, QuadratureRule> memo;
  const Key key{static_cast<int>(kind), n, a, b};
  if (auto hit = memo.find(key); hit != memo.end()) return hit->second;
  Eigen::VectorXd diag(n), sub(n > 1 ? n - 1 : 1);
  double apb = a + b;
  diag(0) = (b - a) / (apb + 2.0);
  for (int k = 1; k < n; ++k) {
    double t = 2.0 * k + apb;
    diag(k) = (b * b - a * a) / (t * (t + 2.0));
    double num = 4.0 * k * (k + a) * (k + b) * (k + apb);
    double den = t * t * (t + 1.0) * (t - 1.0);
    sub(k - 1) = std::sqrt(num / den);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub.head(std::max(n - 1, 1)),
                            Eigen::ComputeEigenvectors);
  double mu0 = std::pow(2.0, apb + 1.0) * beta_fn(a + 1.0, b + 1.0);
  QuadratureRule rule;
  rule.kind = kind;
  rule.alpha = a;
  rule.beta = b;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  double scale = std::pow(2.0, apb + 1.0);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
    double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0 / scale;
  }
  memo[key] = rule;
  return rule;
}

}  // namespace detail

/// n-point Gauss-Legendre rule mapped to [0,1].
inline QuadratureRule gauss_legendre(int n) {
  return detail::golub_welsch(n, 0.0, 0.0, RuleKind::GaussLegendre);
}

/// n-point Gauss-Jacobi rule on [0,1] for the weight (1-t)^alpha t^beta.
inline QuadratureRule gauss_jacobi(int n, double alpha, double beta) {
  return detail::golub_welsch(n, alpha, beta, RuleKind::GaussJacobi);
}

/// Composite quadrature of fn over consecutive panels of an increasing
/// partition, applying the (weight-free) rule on each panel.
inline double composite_quadrature(const std::function<double(double)>& fn,
                                   const std::vector<double>& partition,
                                   const QuadratureRule& rule) {
  require(rule.kind == RuleKind::GaussLegendre,
          "composite_quadrature: panels require a weight-free rule");
  require(partition.size() >= 2, "composite_quadrature: need at least one panel");
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < partition.size(); ++p) {
    double lo = partition[p], hi = partition[p + 1];
    require(hi > lo, "composite_quadrature: partition must increase");
    double len = hi - lo;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
      acc += rule.weights[i] * fn(lo + len * rule.nodes[i]);
    total += acc * len;
  }
  return total;
}

/// int_a^b (x-a)^{pa} (b-x)^{pb} F(x) dx with F smooth on [a,b], via a
/// Gauss-Jacobi rule absorbing both endpoint factors exactly.
inline double integrate_endpoint_weighted(const std::function<double(double)>& F,
                                          double a, double b, double pa,
                                          double pb, int n = 20) {
  require(b > a, "integrate_endpoint_weighted: empty interval");
  QuadratureRule rule = gauss_jacobi(n, pb, pa);
  double len = b - a;
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    acc += rule.weights[i] * F(a + len * rule.nodes[i]);
  return acc * std::pow(len, pa + pb + 1.0);
}

/// Same integral but with F only piecewise smooth: the interval is split at
/// the given interior breakpoints, and on fragments not touching a singular
/// endpoint the corresponding weight factor is folded into the integrand.
inline double integrate_piecewise_weighted(const std::function<double(double)>& F,
                                           double a, double b, double pa, double pb,
                                           const std::vector<double>& breaks,
                                           int n = 20) {
  std::vector<double> cuts{a};
  for (double c : breaks)
    if (c > a + 1e-14 && c < b - 1e-14) cuts.push_back(c);
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    double lo = cuts[p], hi = cuts[p + 1];
    bool at_a = (p == 0), at_b = (p + 2 == cuts.size());
    double ea = at_a ? pa : 0.0;
    double eb = at_b ? pb : 0.0;
    auto G = [&](double x) {
      double v = F(x);
      if (!at_a) v *= std::pow(x - a, pa);
      if (!at_b) v *= std::pow(b - x, pb);
      return v;
    };
    total += integrate_endpoint_weighted(G, lo, hi, ea, eb, n);
  }
  return total;
}

/// Brute-force integrator: composite Gauss-Legendre on panels graded
/// geometrically toward singular endpoints. Used as an independent oracle for
/// the closed-form and Gauss-Jacobi paths (run_verify and the test suite).
inline double integrate_graded(const std::function<double(double)>& F, double a,
                               double b, bool grade_left, bool grade_right,
                               int levels = 40, int n = 20) {
  require(b > a, "integrate_graded: empty interval");
  std::vector<double> part;
  part.push_back(a);
  double len = b - a;
  if (grade_left) {
    for (int k = levels; k >= 1; --k) part.push_back(a + len * 0.5 * std::pow(0.5, k));
  }
  double mid = a + 0.5 * len;
  if (!grade_left && !grade_right) {
    part.push_back(mid);
  } else if (grade_left && !grade_right) {
    // panels already approach mid from the left
  } else if (!grade_left && grade_right) {
    part.push_back(mid);
  }
  if (grade_right) {
    for (int k = 1; k <= levels; ++k) part.push_back(b - len * 0.5 * std::pow(0.5, k));
  }
  part.push_back(b);
  std::vector<double> clean;
  for (double x : part)
    if (clean.empty() || x > clean.back() + 1e-300) clean.push_back(x);
  return composite_quadrature(F, clean, gauss_legendre(n));
}

}  // namespace frbm
