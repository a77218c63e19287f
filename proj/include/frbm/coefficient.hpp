#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "frbm/common.hpp"
#include "frbm/power_term.hpp"
#include "frbm/quadrature.hpp"

namespace frbm {

/// Scalar coefficient on [0,1]. The structured kinds (constant, piecewise
/// constant, affine, power) admit exact integration and exact range
/// statistics; the closure kind is sampled, with optional declared
/// breakpoints so quadrature can split around known kinks.
///
/// Convention: at a breakpoint a piecewise-constant coefficient evaluates to
/// the value of the interval starting there (right limit). Quadrature never
/// places nodes on breakpoints, so this only affects raw point evaluation.
class Coefficient {
 public:
  enum class Kind { Constant, PiecewiseConstant, Affine, Power, Closure };

  static Coefficient constant(double v) {
    Coefficient c;
    c.kind_ = Kind::Constant;
    c.c0_ = v;
    return c;
  }

  /// breakpoints = {0 = b_0 < b_1 < ... < b_m = 1}, values_i on [b_i, b_{i+1}).
  static Coefficient piecewise_constant(std::vector<double> breakpoints,
                                        std::vector<double> values) {
    require(breakpoints.size() >= 2, "Coefficient: need at least one interval");
    require(values.size() + 1 == breakpoints.size(),
            "Coefficient: values/breakpoints size mismatch");
    require(std::abs(breakpoints.front()) < 1e-14 &&
                std::abs(breakpoints.back() - 1.0) < 1e-14,
            "Coefficient: breakpoints must span [0,1]");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
      require(breakpoints[i + 1] > breakpoints[i],
              "Coefficient: breakpoints must increase");
    Coefficient c;
    c.kind_ = Kind::PiecewiseConstant;
    c.breaks_ = std::move(breakpoints);
    c.values_ = std::move(values);
    return c;
  }

  /// c0 + c1 * x.
  static Coefficient affine(double c0, double c1) {
    Coefficient c;
    c.kind_ = Kind::Affine;
    c.c0_ = c0;
    c.c1_ = c1;
    return c;
  }

  /// coef * x^p with p > -1/2 (square-integrable on (0,1)).
  static Coefficient power(PowerTerm t) {
    require(t.exponent > -0.5, "Coefficient: power exponent must exceed -1/2");
    Coefficient c;
    c.kind_ = Kind::Power;
    c.term_ = t;
    return c;
  }

  /// Arbitrary sampled coefficient; range statistics are grid-sampled
  /// (documented approximation) and quadrature splits at declared kinks.
  static Coefficient closure(std::function<double(double)> fn,
                             std::vector<double> kinks = {}) {
    require(static_cast<bool>(fn), "Coefficient: empty closure");
    Coefficient c;
    c.kind_ = Kind::Closure;
    c.fn_ = std::move(fn);
    c.kinks_ = std::move(kinks);
    return c;
  }

  Kind kind() const { return kind_; }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::Constant: return c0_;
      case Kind::Affine: return c0_ + c1_ * x;
      case Kind::Power: return eval(term_, x);
      case Kind::PiecewiseConstant: {
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
        std::size_t idx = it == breaks_.begin()
                              ? 0
                              : static_cast<std::size_t>(it - breaks_.begin()) - 1;
        if (idx >= values_.size()) idx = values_.size() - 1;
        return values_[idx];
      }
      case Kind::Closure: return fn_(x);
    }
    return 0.0;
  }

  /// Interior breakpoints (kinks/jumps) in (0,1), for quadrature splitting.
  std::vector<double> interior_breakpoints() const {
    std::vector<double> out;
    if (kind_ == Kind::PiecewiseConstant) {
      for (std::size_t i = 1; i + 1 < breaks_.size(); ++i) out.push_back(breaks_[i]);
    } else if (kind_ == Kind::Closure) {
      for (double k : kinks_)
        if (k > 1e-14 && k < 1.0 - 1e-14) out.push_back(k);
    }
    return out;
  }

  bool is_constant() const { return kind_ == Kind::Constant; }
  double constant_value() const {
    require(kind_ == Kind::Constant, "Coefficient: not constant");
    return c0_;
  }
  bool is_piecewise_constant() const { return kind_ == Kind::PiecewiseConstant; }
  const std::vector<double>& pc_breakpoints() const { return breaks_; }
  const std::vector<double>& pc_values() const { return values_; }
  bool is_affine() const { return kind_ == Kind::Affine; }
  double affine_c0() const { return c0_; }
  double affine_c1() const { return c1_; }
  bool is_power() const { return kind_ == Kind::Power; }
  PowerTerm power_term() const {
    require(kind_ == Kind::Power, "Coefficient: not a power term");
    return term_;
  }

  /// Exact mean over (0,1) for structured kinds; quadrature for closures.
  double average() const {
    switch (kind_) {
      case Kind::Constant: return c0_;
      case Kind::Affine: return c0_ + 0.5 * c1_;
      case Kind::Power: return term_.coef / (term_.exponent + 1.0);
      case Kind::PiecewiseConstant: {
        double acc = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
          acc += values_[i] * (breaks_[i + 1] - breaks_[i]);
        return acc;
      }
      case Kind::Closure: {
        std::vector<double> part{0.0};
        for (double k : interior_breakpoints()) part.push_back(k);
        part.push_back(1.0);
        return composite_quadrature(fn_, part, gauss_legendre(32));
      }
    }
    return 0.0;
  }

  /// Supremum / infimum over (0,1); exact for structured kinds, sampled on a
  /// dense grid for closures.
  std::pair<double, double> sup_inf() const {
    switch (kind_) {
      case Kind::Constant: return {c0_, c0_};
      case Kind::Affine: {
        double a = c0_, b = c0_ + c1_;
        return {std::max(a, b), std::min(a, b)};
      }
      case Kind::Power: {
        // Monotone on (0,1): compare the x->0+ limit with the value at 1.
        double at1 = term_.coef;
        double at0;
        if (term_.exponent > 0.0) at0 = 0.0;
        else if (term_.exponent == 0.0) at0 = term_.coef;
        else
          at0 = term_.coef >= 0.0 ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
        return {std::max(at0, at1), std::min(at0, at1)};
      }
      case Kind::PiecewiseConstant: {
        double hi = values_[0], lo = values_[0];
        for (double v : values_) {
          hi = std::max(hi, v);
          lo = std::min(lo, v);
        }
        return {hi, lo};
      }
      case Kind::Closure: {
        const int m = 8192;
        double hi = fn_(0.5 / m), lo = hi;
        for (int i = 0; i <= m; ++i) {
          double x = std::min(1.0 - 1e-12, std::max(1e-12, double(i) / m));
          double v = fn_(x);
          hi = std::max(hi, v);
          lo = std::min(lo, v);
        }
        return {hi, lo};
      }
    }
    return {0.0, 0.0};
  }

 private:
  Kind kind_ = Kind::Constant;
  double c0_ = 0.0, c1_ = 0.0;
  PowerTerm term_;
  std::vector<double> breaks_, values_;
  std::vector<double> kinks_;
  std::function<double(double)> fn_;
};

}  // namespace frbm
