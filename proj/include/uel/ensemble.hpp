#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "uel/dataset.hpp"
#include "uel/rng.hpp"
#include "uel/tree.hpp"

namespace uel {

/// The incomplete generalized U-statistic record: per-tree kernel values h_b,
/// per-tree subsample index sets, and their average theta_hat.
struct EnsembleFit {
  int n = 0;
  int s = 0;
  int B = 0;
  std::vector<double> x0;
  std::vector<double> tree_values;             // h_b, indexed by tree
  std::vector<std::vector<int>> memberships;   // sorted index sets of size s
  double theta_hat = 0.0;
  int fallback_leaf_trees = 0;  // trees containing at least one oversized leaf
};

/// B independent uniform draws of size-s subsets of [0, n): without
/// replacement within each draw, with replacement across draws.
inline std::vector<std::vector<int>> draw_subsamples(int n, int s, int B, Rng& rng) {
  if (s < 1 || s >= n) throw std::invalid_argument("draw_subsamples: needs 1 <= s < n");
  if (B < 1) throw std::invalid_argument("draw_subsamples: needs B >= 1");
  std::vector<std::vector<int>> sets;
  sets.reserve(static_cast<std::size_t>(B));
  for (int b = 0; b < B; ++b) sets.push_back(rng.sample_sorted(n, s));
  return sets;
}

namespace detail {

inline constexpr std::uint64_t kSubsampleTag = 0x73756273;  // stream tags
inline constexpr std::uint64_t kTreeTag = 0x74726565;

}  // namespace detail

/// Fits the forest: draws B subsamples, fits one honest tree per subsample
/// with an independent generator stream derived from (seed, tree index), and
/// records h_b = predict(tree_b, x0). Deterministic for any thread count
/// (results are collected by tree index, never by completion order).
inline EnsembleFit fit_forest(const Dataset& data, std::span<const double> x0, int s, int B,
                              const TreeParams& params, std::uint64_t seed, int threads = 1) {
  validate(data);
  validate(params, data.d);
  if (static_cast<int>(x0.size()) != data.d) {
    throw std::invalid_argument("fit_forest: x0 dimension must equal d");
  }
  if (s < 2 * params.k) {
    throw std::invalid_argument("fit_forest: subsample too small (needs s >= 2k)");
  }

  EnsembleFit fit;
  fit.n = data.n;
  fit.s = s;
  fit.B = B;
  fit.x0.assign(x0.begin(), x0.end());

  Rng subsample_rng(derive_seed(seed, detail::kSubsampleTag));
  fit.memberships = draw_subsamples(data.n, s, B, subsample_rng);
  fit.tree_values.resize(static_cast<std::size_t>(B));

  std::vector<int> fallback(static_cast<std::size_t>(B), 0);
  const auto fit_one = [&](int b) {
    Rng tree_rng(derive_seed(seed, detail::kTreeTag, static_cast<std::uint64_t>(b)));
    const Tree tree =
        fit_tree(data, fit.memberships[static_cast<std::size_t>(b)], params, tree_rng);
    fit.tree_values[static_cast<std::size_t>(b)] = predict(tree, data, fit.x0);
    fallback[static_cast<std::size_t>(b)] = tree.fallback_leaves > 0 ? 1 : 0;
  };

  if (threads <= 1) {
    for (int b = 0; b < B; ++b) fit_one(b);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int b = next.fetch_add(1); b < B; b = next.fetch_add(1)) fit_one(b);
      });
    }
    for (auto& th : pool) th.join();
  }

  double sum = 0.0;
  for (const double h : fit.tree_values) sum += h;
  fit.theta_hat = sum / static_cast<double>(B);
  for (const int f : fallback) fit.fallback_leaf_trees += f;
  return fit;
}

/// Sample kernel variance (1/B) sum h_b^2 - theta_hat^2, floored at zero.
inline double kernel_variance(const EnsembleFit& fit) {
  if (fit.B < 1) throw std::invalid_argument("kernel_variance: empty fit");
  double sum_sq = 0.0;
  for (const double h : fit.tree_values) sum_sq += h * h;
  const double value = sum_sq / static_cast<double>(fit.B) - fit.theta_hat * fit.theta_hat;
  return value > 0.0 ? value : 0.0;
}

/// True when every tree produced the identical kernel value; such a fit
/// carries no sampling variability and downstream intervals collapse to
/// the point theta_hat.
inline bool constant_kernel(const EnsembleFit& fit) {
  for (const double h : fit.tree_values) {
    if (h != fit.tree_values.front()) return false;
  }
  return true;
}

}  // namespace uel
