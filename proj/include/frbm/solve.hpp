#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "frbm/assembly.hpp"
#include "frbm/common.hpp"

namespace frbm {

/// Dense LU solve with partial pivoting. The residual contract is part of the
/// interface: a returned vector always satisfies |Ax-b| <= 1e-10 |b|.
inline Eigen::VectorXd solve_dense(const DenseOperator& A,
                                   const Eigen::VectorXd& b) {
  require(A.rows() == A.cols(), "solve_dense: matrix must be square");
  require(A.rows() == b.size(), "solve_dense: dimension mismatch");
  Eigen::PartialPivLU<DenseOperator> lu(A);
  const double scale = A.cwiseAbs().maxCoeff();
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > 1e-14 * scale))
    throw SolveError("solve_dense: matrix numerically singular");
  Eigen::VectorXd x = lu.solve(b);
  const double bn = b.norm();
  const double resid = (A * x - b).norm();
  if (resid > 1e-10 * (bn > 0.0 ? bn : 1.0))
    throw SolveError("solve_dense: residual contract violated");
  return x;
}

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES without preconditioning. Not used by any acceptance path;
/// it exists to expose the iteration growth that mirrors the conditioning
/// study (unpreconditioned Krylov cost scales with kappa).
inline GmresResult gmres(const DenseOperator& A, const Eigen::VectorXd& b,
                         double tol = 1e-10, int restart = 30,
                         int max_iters = 10000) {
  require(A.rows() == A.cols(), "gmres: matrix must be square");
  require(A.rows() == b.size(), "gmres: dimension mismatch");
  require(tol > 0.0 && restart >= 1, "gmres: bad parameters");
  const int n = static_cast<int>(A.rows());
  const double bn = b.norm();
  GmresResult out;
  out.x = Eigen::VectorXd::Zero(n);
  if (bn == 0.0) {
    out.converged = true;
    return out;
  }
  const int m = std::min(restart, n);
  Eigen::MatrixXd V(n, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);
  int iters = 0;
  while (iters < max_iters) {
    Eigen::VectorXd r = b - A * out.x;
    double beta = r.norm();
    out.residual = beta / bn;
    if (out.residual <= tol) {
      out.converged = true;
      return out;
    }
    V.col(0) = r / beta;
    g.setZero();
    g(0) = beta;
    int k = 0;
    for (; k < m && iters < max_iters; ++k, ++iters) {
      Eigen::VectorXd w = A * V.col(k);
      for (int i = 0; i <= k; ++i) {
        H(i, k) = V.col(i).dot(w);
        w -= H(i, k) * V.col(i);
      }
      H(k + 1, k) = w.norm();
      if (H(k + 1, k) > 0.0) V.col(k + 1) = w / H(k + 1, k);
      // apply accumulated Givens rotations, then generate a new one
      for (int i = 0; i < k; ++i) {
        double t = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
        H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
        H(i, k) = t;
      }
      double denom = std::hypot(H(k, k), H(k + 1, k));
      if (denom == 0.0) {
        cs(k) = 1.0;
        sn(k) = 0.0;
      } else {
        cs(k) = H(k, k) / denom;
        sn(k) = H(k + 1, k) / denom;
      }
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);
      if (std::abs(g(k + 1)) / bn <= tol) {
        ++k;
        break;
      }
    }
    // solve the small triangular system and update the iterate
    Eigen::VectorXd y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g(i);
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y(j);
      y(i) = s / H(i, i);
    }
    for (int i = 0; i < k; ++i) out.x += y(i) * V.col(i);
    out.iterations = iters;
    if (k == 0) break;
  }
  out.residual = (b - A * out.x).norm() / bn;
  out.iterations = iters;
  out.converged = out.residual <= tol;
  return out;
}

/// Assemble and solve the full problem -D^beta(d D^beta u) + r u = f weakly.
struct FemSystem {
  Mesh mesh;
  DenseOperator A;
  Eigen::VectorXd load;
};

inline FemSystem build_system(const Mesh& mesh, FracOrder order,
                              const Coefficient& d, const Coefficient& r,
                              const Coefficient& f) {
  FemSystem sys{mesh, assemble_diffusion(mesh, order, d), assemble_load(mesh, f)};
  if (!(r.is_constant() && r.constant_value() == 0.0))
    sys.A += assemble_reaction(mesh, r);
  return sys;
}

inline PiecewiseLinearFn fem_solve(const Mesh& mesh, FracOrder order,
                                   const Coefficient& d, const Coefficient& r,
                                   const Coefficient& f) {
  FemSystem sys = build_system(mesh, order, d, r, f);
  return PiecewiseLinearFn{mesh, solve_dense(sys.A, sys.load)};
}

}  // namespace frbm
