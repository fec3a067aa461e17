#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uel/pseudo.hpp"
#include "uel/stats.hpp"

namespace uel {

enum class Method { EL, mEL, IJWald, JWald };

inline const char* to_string(Method method) {
  switch (method) {
    case Method::EL: return "EL";
    case Method::mEL: return "mEL";
    case Method::IJWald: return "IJ-Wald";
    case Method::JWald: return "J-Wald";
  }
  throw std::invalid_argument("unknown method");
}

inline Method method_from_string(const std::string& name) {
  if (name == "el" || name == "EL") return Method::EL;
  if (name == "mel" || name == "mEL") return Method::mEL;
  if (name == "ij" || name == "IJ-Wald") return Method::IJWald;
  if (name == "jk" || name == "J-Wald") return Method::JWald;
  throw std::invalid_argument("unknown method '" + name + "' (expected el|mel|ij|jk)");
}

/// Outcome of the one-dimensional dual EL problem at a fixed theta.
struct ELEvaluation {
  double lambda_hat = 0.0;
  double statistic = 0.0;  // +infinity when zero is outside the value hull
  bool feasible = true;
  bool degenerate = false;  // all supplied values were exactly zero
  int iterations = 0;
};

/// Solves sup_lambda sum log(1 + lambda V_i) through its first-order
/// condition sum V_i / (1 + lambda V_i) = 0, a strictly decreasing map on
/// the open bracket (-1/max V, -1/min V). Bracketed bisection with Newton
/// acceleration, relative tolerance 1e-12, at most 200 iterations.
inline ELEvaluation solve_lambda(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("solve_lambda: needs n >= 1");

  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double vmin = *min_it;
  const double vmax = *max_it;

  ELEvaluation eval;
  if (vmin == 0.0 && vmax == 0.0) {
    eval.degenerate = true;
    return eval;
  }
  if (!(vmin < 0.0 && vmax > 0.0)) {
    eval.feasible = false;
    eval.statistic = std::numeric_limits<double>::infinity();
    return eval;
  }

  // Poles of the dual objective; shrink inward so every log argument stays
  // strictly positive in floating point.
  const double shrink = 1.0 - 1e-10;
  double lo = (-1.0 / vmax) * shrink;
  double hi = (-1.0 / vmin) * shrink;

  const auto derivative = [&](double lambda, double& g, double& dg) {
    g = 0.0;
    dg = 0.0;
    for (const double v : values) {
      const double denom = 1.0 + lambda * v;
      const double t = v / denom;
      g += t;
      dg -= t * t;
    }
  };

  double x = 0.0;  // zero is always interior to (lo, hi)
  double g = 0.0, dg = 0.0;
  int iter = 0;
  for (; iter < 200; ++iter) {
    derivative(x, g, dg);
    if (g == 0.0) break;
    if (g > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = (dg < 0.0) ? x - g / dg : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-12 * std::max(1.0, std::fabs(x))) {
      x = next;
      ++iter;
      break;
    }
    x = next;
  }

  eval.lambda_hat = x;
  eval.iterations = iter;
  double stat = 0.0;
  for (const double v : values) stat += std::log1p(x * v);
  eval.statistic = std::max(2.0 * stat, 0.0);
  return eval;
}

/// EL log-likelihood-ratio statistic at theta, over V^(i)(theta) = a_i - theta.
inline ELEvaluation el_stat(const PseudoValueSet& pvs, double theta) {
  const std::vector<double> values = values_at(pvs, theta);
  return solve_lambda(values);
}

/// Modified EL statistic at theta, over the shrinkage-adjusted pseudo-values.
inline ELEvaluation mel_stat(const PseudoValueSet& pvs, double theta) {
  const std::vector<double> values = modified_values(pvs, theta);
  return solve_lambda(values);
}

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;
  Method method = Method::EL;

  double length() const { return upper - lower; }
  bool contains(double value) const { return lower <= value && value <= upper; }
};

namespace detail {

// The statistic function used for interval inversion. Both EL and mEL reduce
// to mean-EL over a fixed point set: EL over the anchors themselves, mEL over
// the anchors stretched about theta_hat by 1/c (scale invariance of the dual
// makes the c-factor drop out of the statistic).
inline std::vector<double> effective_points(const PseudoValueSet& pvs, Method method) {
  std::vector<double> points(pvs.anchors.size());
  if (method == Method::EL) {
    points = pvs.anchors;
  } else if (method == Method::mEL) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      points[i] = pvs.theta_hat + (pvs.anchors[i] - pvs.theta_hat) / pvs.c;
    }
  } else {
    throw std::invalid_argument("invert_ci: method must be EL or mEL");
  }
  return points;
}

inline double stat_at(const std::vector<double>& points, double theta) {
  std::vector<double> values(points.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = points[i] - theta;
  return solve_lambda(values).statistic;
}

// One-sided bisection for the crossing statistic(theta) = quantile between an
// infeasible span edge (statistic +inf) and theta_hat (statistic 0).
inline double bisect_crossing(const std::vector<double>& points, double edge, double center,
                              double quantile, double tol) {
  double outside = edge;   // statistic above the quantile (or infeasible)
  double inside = center;  // statistic below the quantile
  while (std::fabs(outside - inside) > tol) {
    const double mid = 0.5 * (outside + inside);
    if (stat_at(points, mid) > quantile) {
      outside = mid;
    } else {
      inside = mid;
    }
  }
  return 0.5 * (outside + inside);
}

}  // namespace detail

/// Inverts the EL or mEL statistic into a confidence interval at the given
/// level: the two crossings of statistic(theta) = chi2 quantile, found by
/// bisection inside the feasible span of the effective points. V1, V2 and c
/// stay frozen at theta_hat throughout. Degenerate pseudo-value sets give the
/// zero-width interval at theta_hat.
inline ConfidenceInterval invert_ci(const PseudoValueSet& pvs, Method method, double level) {
  const double quantile = chi2_quantile_1df(level);
  ConfidenceInterval ci;
  ci.level = level;
  ci.method = method;
  if (pvs.degenerate) {
    ci.lower = ci.upper = pvs.theta_hat;
    return ci;
  }
  const std::vector<double> points = detail::effective_points(pvs, method);
  const auto [min_it, max_it] = std::minmax_element(points.begin(), points.end());
  if (*min_it == *max_it) {
    ci.lower = ci.upper = pvs.theta_hat;
    return ci;
  }
  const double tol = 1e-8 * std::max(1.0, std::fabs(pvs.theta_hat));
  ci.lower = detail::bisect_crossing(points, *min_it, pvs.theta_hat, quantile, tol);
  ci.upper = detail::bisect_crossing(points, *max_it, pvs.theta_hat, quantile, tol);
  return ci;
}

/// Sparse-subsampling severity indicator V2 / V1; large values flag regimes
/// where the unmodified EL statistic over-covers. NaN when the pseudo-value
/// spread is zero.
inline double sparsity_diagnostic(const PseudoValueSet& pvs) {
  if (pvs.v1 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double ratio = pvs.v2 / pvs.v1;
  return ratio > 0.0 ? ratio : 0.0;
}

}  // namespace uel
