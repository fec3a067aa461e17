#pragma once

#include <cmath>
#include <vector>

#include "uel/el.hpp"
#include "uel/ensemble.hpp"
#include "uel/pseudo.hpp"
#include "uel/stats.hpp"

namespace uel {

struct VarianceEstimate {
  double value = 0.0;      // corrected and floored at zero
  double raw_value = 0.0;  // before correction/flooring, may be negative
  Method method = Method::JWald;
  bool floored = false;
};

/// Leave-one-out jackknife variance V_J = ((n-1)/n) sum (theta^(i) - theta)^2,
/// with theta^(i) recovered from the anchors via a_i - theta = (n-1)(theta - theta^(i)).
inline VarianceEstimate jackknife_variance(const PseudoValueSet& pvs) {
  const double n = static_cast<double>(pvs.n);
  double ss = 0.0;
  for (const double a : pvs.anchors) {
    const double loo_dev = (a - pvs.theta_hat) / (n - 1.0);  // theta_hat - theta^(i)
    ss += loo_dev * loo_dev;
  }
  VarianceEstimate est;
  est.method = Method::JWald;
  est.raw_value = (n - 1.0) / n * ss;
  est.value = est.raw_value;
  return est;
}

/// Infinitesimal-jackknife variance: raw = sum_i Cov_i^2 with
/// Cov_i = (1/B) sum_b (M_bi - s/n)(h_b - theta_hat), corrected for the
/// Monte Carlo noise of the membership indicators by
/// (s/n)(1 - s/n)(n/B) * zeta_hat and floored at zero.
inline VarianceEstimate ij_variance(const EnsembleFit& fit) {
  const double n = static_cast<double>(fit.n);
  const double B = static_cast<double>(fit.B);
  const double frac = static_cast<double>(fit.s) / n;

  std::vector<double> member_sum(static_cast<std::size_t>(fit.n), 0.0);
  double all_sum = 0.0;
  double var_h = 0.0;
  for (int b = 0; b < fit.B; ++b) {
    const double centered = fit.tree_values[static_cast<std::size_t>(b)] - fit.theta_hat;
    all_sum += centered;
    var_h += centered * centered;
    for (const int i : fit.memberships[static_cast<std::size_t>(b)]) {
      member_sum[static_cast<std::size_t>(i)] += centered;
    }
  }
  var_h /= B;

  double raw = 0.0;
  for (int i = 0; i < fit.n; ++i) {
    const double cov = (member_sum[static_cast<std::size_t>(i)] - frac * all_sum) / B;
    raw += cov * cov;
  }

  VarianceEstimate est;
  est.method = Method::IJWald;
  est.raw_value = raw;
  const double corrected = raw - frac * (1.0 - frac) * (n / B) * var_h;
  est.floored = corrected < 0.0;
  est.value = est.floored ? 0.0 : corrected;
  return est;
}

/// Wald interval theta_hat +- z * sqrt(variance).
inline ConfidenceInterval wald_ci(double theta_hat, const VarianceEstimate& variance,
                                  double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("wald_ci: level must lie in (0, 1)");
  }
  const double z = normal_quantile(0.5 * (1.0 + level));
  const double half = z * std::sqrt(variance.value);
  ConfidenceInterval ci;
  ci.lower = theta_hat - half;
  ci.upper = theta_hat + half;
  ci.level = level;
  ci.method = variance.method;
  return ci;
}

}  // namespace uel
