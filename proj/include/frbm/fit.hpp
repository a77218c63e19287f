#pragma once

#include <cmath>
#include <vector>

#include "frbm/common.hpp"

namespace frbm {

/// Least-squares slope of y against x.
inline double least_squares_slope(const std::vector<double>& x,
                                  const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2,
          "least_squares_slope: need at least two matched samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  require(den > 0.0, "least_squares_slope: degenerate abscissae");
  return num / den;
}

/// Slope of log y versus log x; the algebraic convergence rate when x = h.
inline double loglog_slope(const std::vector<double>& x,
                           const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "loglog_slope: needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return least_squares_slope(lx, ly);
}

/// Exponential decay rate r in y ~ C exp(-r n), fitted on log y.
inline double semilog_decay_rate(const std::vector<double>& n,
                                 const std::vector<double>& y) {
  std::vector<double> ly;
  for (double v : y) {
    require(v > 0.0, "semilog_decay_rate: needs positive data");
    ly.push_back(std::log(v));
  }
  return -least_squares_slope(n, ly);
}

}  // namespace frbm
