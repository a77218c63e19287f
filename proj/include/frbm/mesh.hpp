#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "frbm/common.hpp"
#include "frbm/special_functions.hpp"

namespace frbm {

/// Uniform mesh on (0,1) with N elements, nodes x_i = i/N. Trial and test
/// functions vanish at both endpoints, so a mesh carries N-1 interior
/// degrees of freedom.
class Mesh {
 public:
  explicit Mesh(int n_elements) : n_(n_elements) {
    require(n_elements >= 2, "Mesh: need at least two elements");
  }
  int n_elements() const { return n_; }
  int n_interior() const { return n_ - 1; }
  double h() const { return 1.0 / n_; }
  double node(int i) const { return static_cast<double>(i) / n_; }

  bool refines(const Mesh& coarse) const { return n_ % coarse.n_elements() == 0; }

 private:
  int n_;
};

inline Mesh build_mesh(int n_elements) { return Mesh(n_elements); }

enum class Side { Left, Right };

/// Piecewise-linear function on a mesh with zero boundary values, stored as
/// the vector of interior nodal values.
struct PiecewiseLinearFn {
  Mesh mesh;
  Eigen::VectorXd values;  // size mesh.n_interior()

  PiecewiseLinearFn(Mesh m, Eigen::VectorXd v) : mesh(m), values(std::move(v)) {
    require(values.size() == mesh.n_interior(),
            "PiecewiseLinearFn: value count must equal interior node count");
  }

  static PiecewiseLinearFn zero(Mesh m) {
    return PiecewiseLinearFn(m, Eigen::VectorXd::Zero(m.n_interior()));
  }

  double node_value(int i) const {
    if (i <= 0 || i >= mesh.n_elements()) return 0.0;
    return values(i - 1);
  }

  double operator()(double x) const {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    int n = mesh.n_elements();
    int e = std::min(n - 1, static_cast<int>(std::floor(x * n)));
    double xl = mesh.node(e);
    double t = (x - xl) * n;
    return (1.0 - t) * node_value(e) + t * node_value(e + 1);
  }

  /// Slope on element e (0-based), zero outside [0,1].
  double slope(int e) const {
    int n = mesh.n_elements();
    if (e < 0 || e >= n) return 0.0;
    return (node_value(e + 1) - node_value(e)) * n;
  }

  /// Slope jumps sigma_k = slope(k) - slope(k-1) at all nodes k = 0..N.
  /// These are the weights of the exact fractional-derivative expansion.
  std::vector<double> slope_jumps() const {
    int n = mesh.n_elements();
    std::vector<double> sig(n + 1);
    for (int k = 0; k <= n; ++k) sig[k] = slope(k) - slope(k - 1);
    return sig;
  }
};

/// Exact Riemann-Liouville derivative of order beta in (0,1) of a zero-trace
/// piecewise-linear function:
///   left  D^beta f(x)  = 1/Gamma(2-beta) * sum_k sigma_k (x - x_k)_+^{1-beta}
///   right Dbar^beta f(x) = 1/Gamma(2-beta) * sum_k sigma_k (x_k - x)_+^{1-beta}
/// Both follow from D^beta f = I^{1-beta} f' with f' piecewise constant; no
/// quadrature is involved. The left form is valid for every real x (and is
/// identically zero for x <= 0), the right form mirrors it around the support.
inline double frac_deriv_pl(const PiecewiseLinearFn& f, Side side, double beta,
                            double x) {
  require(beta > 0.0 && beta < 1.0, "frac_deriv_pl: order must lie in (0,1)");
  const double p = 1.0 - beta;
  const double scale = 1.0 / gamma_fn(2.0 - beta);
  const auto sig = f.slope_jumps();
  const int n = f.mesh.n_elements();
  double acc = 0.0;
  if (side == Side::Left) {
    for (int k = 0; k <= n; ++k) {
      double d = x - f.mesh.node(k);
      if (d <= 0.0) break;  // nodes are increasing; later ones contribute nothing
      acc += sig[k] * std::pow(d, p);
    }
  } else {
    for (int k = n; k >= 0; --k) {
      double d = f.mesh.node(k) - x;
      if (d <= 0.0) break;
      acc += sig[k] * std::pow(d, p);
    }
  }
  return scale * acc;
}

/// Exact Riemann-Liouville integral of order sigma > 0 of a zero-trace
/// piecewise-linear function, via I^sigma f = I^{sigma+1} f'.
inline double frac_integral_pl(const PiecewiseLinearFn& f, Side side, double sigma,
                               double x) {
  require(sigma > 0.0, "frac_integral_pl: order must be positive");
  const double p = sigma + 1.0;
  const double scale = 1.0 / gamma_fn(sigma + 2.0);
  const auto sig = f.slope_jumps();
  const int n = f.mesh.n_elements();
  double acc = 0.0;
  if (side == Side::Left) {
    for (int k = 0; k <= n; ++k) {
      double d = x - f.mesh.node(k);
      if (d <= 0.0) break;
      acc += sig[k] * std::pow(d, p);
    }
  } else {
    for (int k = n; k >= 0; --k) {
      double d = f.mesh.node(k) - x;
      if (d <= 0.0) break;
      acc += sig[k] * std::pow(d, p);
    }
  }
  return scale * acc;
}

/// Nodal interpolation of a callable onto a mesh.
inline PiecewiseLinearFn interpolate(const std::function<double(double)>& fn,
                                     Mesh mesh) {
  Eigen::VectorXd v(mesh.n_interior());
  for (int i = 1; i < mesh.n_elements(); ++i) v(i - 1) = fn(mesh.node(i));
  return PiecewiseLinearFn(mesh, std::move(v));
}

/// Exact re-representation of u on a nested finer mesh. Node positions are
/// resolved in integer arithmetic so shared nodes copy bit-exactly.
inline PiecewiseLinearFn prolong(const PiecewiseLinearFn& u, Mesh fine) {
  require(fine.refines(u.mesh), "prolong: target mesh must be a nested refinement");
  const long c = u.mesh.n_elements(), f = fine.n_elements();
  Eigen::VectorXd v(fine.n_interior());
  for (long i = 1; i < f; ++i) {
    long j = (i * c) / f, r = (i * c) % f;
    if (r == 0) {
      v(i - 1) = u.node_value(static_cast<int>(j));
    } else {
      double t = static_cast<double>(r) / static_cast<double>(f);
      v(i - 1) = (1.0 - t) * u.node_value(static_cast<int>(j)) +
                 t * u.node_value(static_cast<int>(j) + 1);
    }
  }
  return PiecewiseLinearFn(fine, std::move(v));
}

}  // namespace frbm
