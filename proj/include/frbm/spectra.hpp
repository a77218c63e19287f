#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <vector>

#include "frbm/assembly.hpp"
#include "frbm/coefficient.hpp"
#include "frbm/common.hpp"
#include "frbm/fit.hpp"
#include "frbm/mesh.hpp"

namespace frbm {

/// Singular values in descending order, all nonnegative.
inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& a) {
  require(a.size() > 0, "singular_values: empty matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  if (svd.info() != Eigen::Success)
    throw SolveError("singular_values: SVD iteration failed to converge");
  return svd.singularValues();
}

struct SpectrumRecord {
  int n_elements = 0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  double kappa = 0.0;
};

struct SpectrumReport {
  std::vector<SpectrumRecord> records;
  double slope_max = 0.0;  // d log(sigma_max) / d log(N)
  double slope_min = 0.0;
};

/// Extreme singular values of the stiffness matrix across mesh levels, with
/// log-log growth slopes fitted without the coarsest level (it sits in the
/// pre-asymptotic range).
inline SpectrumReport condition_study(const Coefficient& d, const Coefficient& r,
                                      double s, const std::vector<int>& levels) {
  require(levels.size() >= 3, "condition_study: need at least three levels");
  FracOrder order(s);
  SpectrumReport report;
  for (int n : levels) {
    Mesh mesh = build_mesh(n);
    DenseOperator a = assemble_diffusion(mesh, order, d);
    if (!(r.is_constant() && r.constant_value() == 0.0))
      a += assemble_reaction(mesh, r);
    Eigen::VectorXd sv = singular_values(a);
    SpectrumRecord rec;
    rec.n_elements = n;
    rec.sigma_max = sv(0);
    rec.sigma_min = sv(sv.size() - 1);
    require(rec.sigma_min > 0.0, "condition_study: singular stiffness matrix");
    rec.kappa = rec.sigma_max / rec.sigma_min;
    report.records.push_back(rec);
  }
  std::vector<double> ns, smax, smin;
  for (std::size_t i = 1; i < report.records.size(); ++i) {
    ns.push_back(static_cast<double>(report.records[i].n_elements));
    smax.push_back(report.records[i].sigma_max);
    smin.push_back(report.records[i].sigma_min);
  }
  report.slope_max = loglog_slope(ns, smax);
  report.slope_min = loglog_slope(ns, smin);
  return report;
}

}  // namespace frbm
