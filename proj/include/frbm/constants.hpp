#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "frbm/coefficient.hpp"
#include "frbm/common.hpp"
#include "frbm/special_functions.hpp"

namespace frbm {

struct CoefficientStats {
  double sup = 0.0;
  double inf = 0.0;
  double average = 0.0;
  double range = 0.0;
  bool sampled = false;  // true when sup/inf came from sampling, not shape
};

inline CoefficientStats coefficient_stats(const Coefficient& c) {
  auto [sup, inf] = c.sup_inf();
  CoefficientStats st;
  st.sup = sup;
  st.inf = inf;
  st.average = 0.5 * (sup + inf);
  st.range = 0.5 * (sup - inf);
  st.sampled = (c.kind() == Coefficient::Kind::Closure);
  return st;
}

struct ConstantSet {
  double gamma_sd = 0.0;
  double c_sdr = 0.0;
  double alpha_sd = 0.0;
  double alpha_tilde = 0.0;
  double continuity = 0.0;
  bool coercive = false;
};

/// All explicit constants of the well-posedness theory in one place.
/// gamma depends on s and the diffusion stats alone; the reaction enters
/// through its essential infimum. Negative values are returned as-is and
/// only flagged, since the experiments run non-coercive cases too.
inline ConstantSet constant_set(double s, const CoefficientStats& d_stats,
                                const CoefficientStats& r_stats) {
  require(s > 1.0 && s < 2.0, "constant_set: s must lie in (1,2)");
  const double g1 = gamma_fn(0.5 * s + 1.0);
  const double cosfac = std::abs(std::cos(0.5 * s * M_PI));
  ConstantSet cs;
  cs.gamma_sd = d_stats.average * cosfac - d_stats.range;
  cs.c_sdr = cs.gamma_sd * g1 * g1 + r_stats.inf;
  cs.alpha_sd = cs.gamma_sd * g1 * g1 * g1 * g1 / 8.0;
  cs.alpha_tilde = 0.5 * cs.gamma_sd * g1 * g1 + 0.5 * std::min(r_stats.inf, 0.0);
  double dn = std::max(std::abs(d_stats.sup), std::abs(d_stats.inf));
  double rn = std::max(std::abs(r_stats.sup), std::abs(r_stats.inf));
  cs.continuity = 2.0 * (dn + rn);
  cs.coercive = cs.c_sdr >= 0.0;
  return cs;
}

enum class AlphaVariant { Alpha, AlphaTilde, Gamma };

inline std::string variant_name(AlphaVariant v) {
  switch (v) {
    case AlphaVariant::Alpha: return "alpha";
    case AlphaVariant::AlphaTilde: return "alpha-tilde";
    case AlphaVariant::Gamma: return "gamma";
  }
  throw ValidationError("variant_name: unreachable");
}

inline AlphaVariant parse_variant(const std::string& name) {
  if (name == "alpha") return AlphaVariant::Alpha;
  if (name == "alpha-tilde") return AlphaVariant::AlphaTilde;
  if (name == "gamma") return AlphaVariant::Gamma;
  throw ValidationError("parse_variant: unknown variant '" + name + "'");
}

/// Coercivity lower bound selected by variant; used for certification, so a
/// nonpositive value is an error rather than a flag.
inline double alpha_from_stats(double s, const CoefficientStats& d_stats,
                               const CoefficientStats& r_stats,
                               AlphaVariant variant) {
  ConstantSet cs = constant_set(s, d_stats, r_stats);
  double v = 0.0;
  switch (variant) {
    case AlphaVariant::Alpha: v = cs.alpha_sd; break;
    case AlphaVariant::AlphaTilde: v = cs.alpha_tilde; break;
    case AlphaVariant::Gamma: v = cs.gamma_sd; break;
  }
  require(v > 0.0, "alpha_from_stats: coercivity bound nonpositive");
  return v;
}

struct NwidthPrediction {
  int M_s = 0;
  double rate = 0.0;
};

/// Reaction-only model (d = 1, mu in [0, mu_plus]): the solution manifold is
/// covered by M_s = ceil(mu_plus / alpha_s) analyticity disks, giving the
/// exponential width bound exp(-n ln2 / M_s). Reported for cross-s ordering.
inline NwidthPrediction predicted_nwidth_rate(double s, double mu_plus) {
  require(s > 1.0 && s < 2.0, "predicted_nwidth_rate: s must lie in (1,2)");
  require(mu_plus > 0.0, "predicted_nwidth_rate: mu_plus must be positive");
  const double alpha_s = std::abs(std::cos(0.5 * s * M_PI));
  NwidthPrediction out;
  out.M_s = static_cast<int>(std::ceil(mu_plus / alpha_s));
  out.rate = std::log(2.0) / out.M_s;
  return out;
}

}  // namespace frbm
