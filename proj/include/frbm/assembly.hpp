#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "frbm/coefficient.hpp"
#include "frbm/common.hpp"
#include "frbm/mesh.hpp"
#include "frbm/power_term.hpp"
#include "frbm/quadrature.hpp"
#include "frbm/special_functions.hpp"

namespace frbm {

using DenseOperator = Eigen::MatrixXd;

namespace detail {

/// Node-pair kernel integrals
///   W(k,l) = int_{x_k}^{x_l} d(x) (x - x_k)^{1-beta} (x_l - x)^{1-beta} dx
/// for k < l (zero otherwise). Every stiffness entry is a 3x3 patch of this
/// table weighted by hat slope jumps, so the table is the whole assembly.
/// Structured coefficients integrate in closed form (Beta / incomplete Beta /
/// affine moments); smooth closures use a Gauss-Jacobi rule that absorbs both
/// endpoint singularities exactly.
inline Eigen::MatrixXd kernel_table(const Mesh& mesh, double beta,
                                    const Coefficient& d, bool enforce_positive,
                                    int n_quad = 20) {
  const int N = mesh.n_elements();
  const double q = 1.0 - beta;          // kink exponent
  const double p3 = 3.0 - 2.0 * beta;   // total power of the pair distance
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(N + 1, N + 1);

  const double Bqq = beta_fn(2.0 - beta, 2.0 - beta);

  if (d.is_constant()) {
    const double v = d.constant_value();
    for (int k = 0; k <= N; ++k)
      for (int l = k + 1; l <= N; ++l) {
        double delta = (static_cast<double>(l) - k) * mesh.h();
        W(k, l) = v * std::pow(delta, p3) * Bqq;
      }
    return W;
  }

  if (d.is_piecewise_constant()) {
    const auto& bp = d.pc_breakpoints();
    const auto& vals = d.pc_values();
    for (int k = 0; k <= N; ++k) {
      double xk = mesh.node(k);
      for (int l = k + 1; l <= N; ++l) {
        double xl = mesh.node(l);
        double delta = xl - xk;
        double acc = 0.0;
        for (std::size_t pc = 0; pc < vals.size(); ++pc) {
          double lo = std::max(xk, bp[pc]), hi = std::min(xl, bp[pc + 1]);
          if (hi <= lo) continue;
          double tlo = (lo - xk) / delta, thi = (hi - xk) / delta;
          acc += vals[pc] * (inc_beta(2.0 - beta, 2.0 - beta, thi) -
                             inc_beta(2.0 - beta, 2.0 - beta, tlo));
        }
        W(k, l) = std::pow(delta, p3) * acc;
      }
    }
    return W;
  }

  if (d.is_affine()) {
    const double c0 = d.affine_c0(), c1 = d.affine_c1();
    const double Bq1q = beta_fn(3.0 - beta, 2.0 - beta);
    for (int k = 0; k <= N; ++k) {
      double xk = mesh.node(k);
      for (int l = k + 1; l <= N; ++l) {
        double delta = mesh.node(l) - xk;
        W(k, l) = std::pow(delta, p3) *
                  ((c0 + c1 * xk) * Bqq + c1 * delta * Bq1q);
      }
    }
    return W;
  }

  // Power or closure: Gauss-Jacobi in the normalized variable, splitting at
  // declared kinks. Positivity is checked at the sampled nodes when the
  // caller requires it.
  const auto kinks = d.interior_breakpoints();
  parallel_for(static_cast<std::size_t>(N + 1), [&](std::size_t ks) {
    int k = static_cast<int>(ks);
    double xk = mesh.node(k);
    for (int l = k + 1; l <= N; ++l) {
      double xl = mesh.node(l);
      double delta = xl - xk;
      auto F = [&](double tau) {
        double v = d(xk + delta * tau);
        if (enforce_positive && v <= 0.0)
          throw CoefficientSignError(
              "assemble_diffusion: coefficient nonpositive at quadrature node");
        return v;
      };
      std::vector<double> tbreaks;
      for (double c : kinks)
        if (c > xk && c < xl) tbreaks.push_back((c - xk) / delta);
      W(k, l) = std::pow(delta, p3) *
                integrate_piecewise_weighted(F, 0.0, 1.0, q, q, tbreaks, n_quad);
    }
  });
  return W;
}

/// Toeplitz stencil of the constant-coefficient stiffness on a uniform mesh:
/// entry a1(phi_j, phi_i) depends only on m = i - j. The (1,-2,1) hat-jump
/// pattern autocorrelates to (1,-4,6,-4,1), giving a closed form.
inline double toeplitz_entry(int m, double h, double beta) {
  static const double a[5] = {1.0, -4.0, 6.0, -4.0, 1.0};
  const double p3 = 3.0 - 2.0 * beta;
  double acc = 0.0;
  for (int e = -2; e <= 2; ++e) {
    double t = static_cast<double>(m + e);
    if (t > 0.0) acc += a[e + 2] * std::pow(t, p3);
  }
  double g = gamma_fn(2.0 - beta);
  return -beta_fn(2.0 - beta, 2.0 - beta) * std::pow(h, 1.0 - 2.0 * beta) /
         (g * g) * acc;
}

}  // namespace detail

/// Diffusion component assembly without the positivity gate. Used for affine
/// parameter components (indicator weights), where individual pieces vanish
/// on most of the domain and only the assembled sum must be positive.
inline DenseOperator assemble_diffusion_component(const Mesh& mesh, FracOrder order,
                                                  const Coefficient& d,
                                                  int n_quad = 20) {
  const int N = mesh.n_elements();
  const int n = mesh.n_interior();
  const double beta = order.beta();
  const double h = mesh.h();
  Eigen::MatrixXd W = detail::kernel_table(mesh, beta, d, false, n_quad);
  const double g = gamma_fn(2.0 - beta);
  const double scale = -1.0 / (g * g * h * h);
  static const double c[3] = {1.0, -2.0, 1.0};
  DenseOperator A(n, n);
  for (int i = 1; i <= N - 1; ++i)
    for (int j = 1; j <= N - 1; ++j) {
      double acc = 0.0;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          int kj = j + dj, ki = i + di;
          if (kj < ki) acc += c[dj + 1] * c[di + 1] * W(kj, ki);
        }
      A(i - 1, j - 1) = scale * acc;
    }
  return A;
}

/// Stiffness of the diffusion form a1(u,v) = -(d D^{s/2} u, Dbar^{s/2} v).
/// Rows index test functions, columns trial functions. The coefficient must
/// be strictly positive (checked exactly for structured kinds, at quadrature
/// nodes for closures).
inline DenseOperator assemble_diffusion(const Mesh& mesh, FracOrder order,
                                        const Coefficient& d, int n_quad = 20) {
  if (d.kind() != Coefficient::Kind::Closure) {
    auto [sup, inf] = d.sup_inf();
    (void)sup;
    if (inf <= 0.0)
      throw CoefficientSignError("assemble_diffusion: coefficient must be positive");
  }
  const int N = mesh.n_elements();
  const int n = mesh.n_interior();
  const double beta = order.beta();
  const double h = mesh.h();
  Eigen::MatrixXd W = detail::kernel_table(mesh, beta, d, true, n_quad);
  const double g = gamma_fn(2.0 - beta);
  const double scale = -1.0 / (g * g * h * h);
  static const double c[3] = {1.0, -2.0, 1.0};
  DenseOperator A(n, n);
  for (int i = 1; i <= N - 1; ++i)
    for (int j = 1; j <= N - 1; ++j) {
      double acc = 0.0;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          int kj = j + dj, ki = i + di;
          if (kj < ki) acc += c[dj + 1] * c[di + 1] * W(kj, ki);
        }
      A(i - 1, j - 1) = scale * acc;
    }
  return A;
}

/// Exact mass matrix (tridiagonal, returned dense).
inline DenseOperator assemble_mass(const Mesh& mesh) {
  const int n = mesh.n_interior();
  const double h = mesh.h();
  DenseOperator M = DenseOperator::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    M(i, i) = 2.0 * h / 3.0;
    if (i + 1 < n) {
      M(i, i + 1) = h / 6.0;
      M(i + 1, i) = h / 6.0;
    }
  }
  return M;
}

/// Reaction matrix (r u, v); tridiagonal, returned dense. No sign constraint.
inline DenseOperator assemble_reaction(const Mesh& mesh, const Coefficient& r,
                                       int n_quad = 10) {
  const int N = mesh.n_elements();
  const int n = mesh.n_interior();
  const double h = mesh.h();
  const auto kinks = r.interior_breakpoints();
  DenseOperator M = DenseOperator::Zero(n, n);
  for (int e = 0; e < N; ++e) {
    double xl = mesh.node(e), xr = mesh.node(e + 1);
    std::vector<double> local;
    for (double c : kinks)
      if (c > xl && c < xr) local.push_back(c);
    // shape a: descending hat of node e; shape b: ascending hat of node e+1
    auto sa = [&](double x) { return (xr - x) / h; };
    auto sb = [&](double x) { return (x - xl) / h; };
    double maa = integrate_piecewise_weighted(
        [&](double x) { return r(x) * sa(x) * sa(x); }, xl, xr, 0.0, 0.0, local, n_quad);
    double mab = integrate_piecewise_weighted(
        [&](double x) { return r(x) * sa(x) * sb(x); }, xl, xr, 0.0, 0.0, local, n_quad);
    double mbb = integrate_piecewise_weighted(
        [&](double x) { return r(x) * sb(x) * sb(x); }, xl, xr, 0.0, 0.0, local, n_quad);
    int ia = e - 1, ib = e;  // interior indices of nodes e and e+1
    if (ia >= 0) M(ia, ia) += maa;
    if (ia >= 0 && ib < n) {
      M(ia, ib) += mab;
      M(ib, ia) += mab;
    }
    if (ib < n) M(ib, ib) += mbb;
  }
  return M;
}

inline Eigen::VectorXd assemble_load(const Mesh& mesh, const PowerSum& f);

/// Load vector (f, phi_i) for a coefficient-valued source. Power-kind
/// sources route through the exact algebraic overload.
inline Eigen::VectorXd assemble_load(const Mesh& mesh, const Coefficient& f,
                                     int n_quad = 10) {
  if (f.is_power()) return assemble_load(mesh, PowerSum{f.power_term()});
  const int N = mesh.n_elements();
  const int n = mesh.n_interior();
  const double h = mesh.h();
  const auto kinks = f.interior_breakpoints();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < N; ++e) {
    double xl = mesh.node(e), xr = mesh.node(e + 1);
    std::vector<double> local;
    for (double c : kinks)
      if (c > xl && c < xr) local.push_back(c);
    auto va = integrate_piecewise_weighted(
        [&](double x) { return f(x) * (xr - x) / h; }, xl, xr, 0.0, 0.0, local, n_quad);
    auto vb = integrate_piecewise_weighted(
        [&](double x) { return f(x) * (x - xl) / h; }, xl, xr, 0.0, 0.0, local, n_quad);
    int ia = e - 1, ib = e;
    if (ia >= 0) b(ia) += va;
    if (ib < n) b(ib) += vb;
  }
  return b;
}

namespace detail {

// int_a^b x^p (alpha x + gamma) dx, exact.
inline double power_linear_integral(double a, double b, double p, double alpha,
                                    double gamma) {
  auto ipow = [](double x, double e) { return x <= 0.0 ? 0.0 : std::pow(x, e); };
  return alpha * (ipow(b, p + 2.0) - ipow(a, p + 2.0)) / (p + 2.0) +
         gamma * (ipow(b, p + 1.0) - ipow(a, p + 1.0)) / (p + 1.0);
}

}  // namespace detail

/// Load vector for an algebraic power-sum source, assembled in closed form
/// (each element integral is a power-times-linear moment).
inline Eigen::VectorXd assemble_load(const Mesh& mesh, const PowerSum& f) {
  const int N = mesh.n_elements();
  const int n = mesh.n_interior();
  const double h = mesh.h();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < N; ++e) {
    double xl = mesh.node(e), xr = mesh.node(e + 1);
    double va = 0.0, vb = 0.0;
    for (const auto& t : f) {
      require(t.exponent > -1.0, "assemble_load: non-integrable source exponent");
      // (xr - x)/h = (xr/h) + (-1/h) x ; (x - xl)/h = (-xl/h) + (1/h) x
      va += t.coef * detail::power_linear_integral(xl, xr, t.exponent, -1.0 / h, xr / h);
      vb += t.coef * detail::power_linear_integral(xl, xr, t.exponent, 1.0 / h, -xl / h);
    }
    int ia = e - 1, ib = e;
    if (ia >= 0) b(ia) += va;
    if (ib < n) b(ib) += vb;
  }
  return b;
}

/// Semi-norm Gram operator as a Toeplitz stencil: G(i,j) = row[|i-j|] with
///   G = -(M + M^T) / (2 cos(pi beta)),  M the unit-diffusion stiffness.
/// u^T G u equals |u_h|^2 in the order-beta semi-norm on the real line.
/// Kept as a stencil so reference-mesh quadratic forms need O(N) storage.
class SeminormStencil {
 public:
  SeminormStencil(const Mesh& mesh, double beta) : n_(mesh.n_interior()) {
    require(beta > 0.5 && beta < 1.0, "SeminormStencil: beta must lie in (1/2,1)");
    const double cb = std::cos(M_PI * beta);
    row_.resize(n_);
    for (int m = 0; m < n_; ++m) {
      double t = detail::toeplitz_entry(m, mesh.h(), beta);
      double tn = detail::toeplitz_entry(-m, mesh.h(), beta);
      row_[m] = -(t + tn) / (2.0 * cb);
    }
  }

  int size() const { return n_; }
  double entry(int i, int j) const { return row_[std::abs(i - j)]; }

  double quadratic_form(const Eigen::VectorXd& u) const {
    require(u.size() == n_, "SeminormStencil: dimension mismatch");
    double acc = 0.0;
    for (int i = 0; i < n_; ++i) {
      double s = row_[0] * u(i);
      for (int j = 0; j < i; ++j) s += 2.0 * row_[i - j] * u(j);
      acc += u(i) * s;
    }
    return acc;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const {
    require(u.size() == n_, "SeminormStencil: dimension mismatch");
    Eigen::VectorXd out(n_);
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (int j = 0; j < n_; ++j) s += row_[std::abs(i - j)] * u(j);
      out(i) = s;
    }
    return out;
  }

 private:
  int n_;
  std::vector<double> row_;
};

/// Dense semi-norm Gram matrix with an SPD gate (Cholesky must succeed).
inline DenseOperator assemble_seminorm_gram(const Mesh& mesh, FracOrder order) {
  SeminormStencil st(mesh, order.beta());
  const int n = mesh.n_interior();
  DenseOperator G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = st.entry(i, j);
  Eigen::LLT<DenseOperator> llt(G);
  if (llt.info() != Eigen::Success)
    throw AssemblyError("assemble_seminorm_gram: Gram matrix failed the SPD check");
  return G;
}

/// Exact L2 quadratic form of a zero-trace piecewise-linear coefficient
/// vector (tridiagonal mass stencil applied directly).
inline double mass_quadratic_form(const Mesh& mesh, const Eigen::VectorXd& u) {
  const double h = mesh.h();
  const int n = mesh.n_interior();
  require(u.size() == n, "mass_quadratic_form: dimension mismatch");
  double diag = 0.0, off = 0.0;
  for (int i = 0; i < n; ++i) diag += u(i) * u(i);
  for (int i = 0; i + 1 < n; ++i) off += u(i) * u(i + 1);
  return h * (2.0 / 3.0 * diag + 1.0 / 3.0 * off);
}

}  // namespace frbm
