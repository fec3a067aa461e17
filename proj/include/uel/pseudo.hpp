#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "uel/ensemble.hpp"

namespace uel {

/// Per-observation tree sums: included_sum[i] adds h_b over the trees whose
/// subsample contains i; excluded_count[i] counts the trees that do not.
/// The leave-one-out numerator for observation i is total - included_sum[i].
struct ExclusionSums {
  std::vector<double> included_sum;
  std::vector<int> excluded_count;
  double total = 0.0;  // sum of all tree values
};

inline ExclusionSums exclusion_sums(const EnsembleFit& fit) {
  ExclusionSums sums;
  sums.included_sum.assign(static_cast<std::size_t>(fit.n), 0.0);
  sums.excluded_count.assign(static_cast<std::size_t>(fit.n), fit.B);
  for (int b = 0; b < fit.B; ++b) {
    const double h = fit.tree_values[static_cast<std::size_t>(b)];
    sums.total += h;
    for (const int i : fit.memberships[static_cast<std::size_t>(b)]) {
      sums.included_sum[static_cast<std::size_t>(i)] += h;
      --sums.excluded_count[static_cast<std::size_t>(i)];
    }
  }
  return sums;
}

/// Jackknife-after-subsampling pseudo-value set. Anchors a_i encode the
/// pseudo-values through V^(i)(theta) = a_i - theta; they satisfy
/// sum_i a_i = n * theta_hat exactly because the leave-one-out scale b1 is
/// the deterministic (n-s) B / n rather than the realized per-observation
/// count (which is kept for diagnostics).
struct PseudoValueSet {
  int n = 0;
  int s = 0;
  int B = 0;
  double theta_hat = 0.0;
  std::vector<double> anchors;       // a_i
  double b1 = 0.0;                   // (n-s) B / n
  std::vector<int> excluded_counts;  // realized |I_1n^(i)|
  int never_excluded = 0;            // observations present in every tree
  double v1 = 0.0;
  double v2 = 0.0;
  double c = 1.0;  // shrinkage factor sqrt(v1 / (v1 + v2)), in (0, 1]
  bool degenerate = false;
};

inline PseudoValueSet pseudo_anchors(const EnsembleFit& fit) {
  if (fit.n <= fit.s) throw std::invalid_argument("pseudo_anchors: needs n > s");
  if (fit.B < 1) throw std::invalid_argument("pseudo_anchors: empty fit");

  PseudoValueSet pvs;
  pvs.n = fit.n;
  pvs.s = fit.s;
  pvs.B = fit.B;
  pvs.theta_hat = fit.theta_hat;

  const ExclusionSums sums = exclusion_sums(fit);
  pvs.excluded_counts = sums.excluded_count;
  for (const int count : pvs.excluded_counts) {
    if (count == 0) ++pvs.never_excluded;
  }

  const double n = static_cast<double>(fit.n);
  pvs.b1 = (n - fit.s) * static_cast<double>(fit.B) / n;
  const double scale = (n - 1.0) / pvs.b1;
  pvs.anchors.resize(static_cast<std::size_t>(fit.n));
  for (int i = 0; i < fit.n; ++i) {
    const double loo = sums.total - sums.included_sum[static_cast<std::size_t>(i)];
    pvs.anchors[static_cast<std::size_t>(i)] = n * fit.theta_hat - scale * loo;
  }
  return pvs;
}

/// Fills V1 = (1/n) sum (a_i - theta_hat)^2, V2 = n (s-1) / B * zeta_hat and
/// the shrinkage factor c = sqrt(V1 / (V1 + V2)). A fit with zero anchor
/// spread, or one whose trees all produced the same kernel value, is marked
/// degenerate with c = 1.
inline void variance_components(PseudoValueSet& pvs, const EnsembleFit& fit) {
  double ss = 0.0;
  for (const double a : pvs.anchors) {
    const double dev = a - pvs.theta_hat;
    ss += dev * dev;
  }
  pvs.v1 = ss / static_cast<double>(pvs.n);
  pvs.v2 = static_cast<double>(pvs.n) * (pvs.s - 1.0) / static_cast<double>(pvs.B) *
           kernel_variance(fit);
  if (pvs.v1 == 0.0 || constant_kernel(fit)) {
    pvs.c = 1.0;
    pvs.degenerate = true;
  } else {
    pvs.c = std::sqrt(pvs.v1 / (pvs.v1 + pvs.v2));
  }
}

inline PseudoValueSet pseudo_values(const EnsembleFit& fit) {
  PseudoValueSet pvs = pseudo_anchors(fit);
  variance_components(pvs, fit);
  return pvs;
}

/// V^(i)(theta) = a_i - theta.
inline std::vector<double> values_at(const PseudoValueSet& pvs, double theta) {
  std::vector<double> values(pvs.anchors.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = pvs.anchors[i] - theta;
  return values;
}

/// Modified pseudo-values: V~^(i)(theta) = (a_i - theta_hat) - c (theta - theta_hat).
inline std::vector<double> modified_values(const PseudoValueSet& pvs, double theta) {
  const double shift = pvs.c * (theta - pvs.theta_hat);
  std::vector<double> values(pvs.anchors.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = (pvs.anchors[i] - pvs.theta_hat) - shift;
  }
  return values;
}

}  // namespace uel
