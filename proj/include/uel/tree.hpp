#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "uel/dataset.hpp"
#include "uel/rng.hpp"

namespace uel {

struct TreeParams {
  int k = 1;                       // minimum leaf count; leaves hold k..2k-1 I-observations
  double alpha = 0.05;             // regularity fraction, in (0, 0.2]
  int mtry = 0;                    // features tried per split; 0 -> ceil(d/2)
  double random_split_prob = 0.0;  // chance the split feature is drawn uniformly
};

inline void validate(const TreeParams& params, int d) {
  if (params.k < 1) throw std::invalid_argument("tree: k must be >= 1");
  if (!(params.alpha > 0.0 && params.alpha <= 0.2)) {
    throw std::invalid_argument("tree: alpha must lie in (0, 0.2]");
  }
  if (params.mtry < 0 || params.mtry > d) {
    throw std::invalid_argument("tree: mtry must lie in [1, d] (0 selects ceil(d/2))");
  }
  if (!(params.random_split_prob >= 0.0 && params.random_split_prob <= 1.0)) {
    throw std::invalid_argument("tree: random_split_prob must lie in [0, 1]");
  }
}

// Smallest per-side count satisfying the alpha-regularity fraction. The small
// slack absorbs binary rounding in alpha * m (0.05 * 20 must stay 1, not 2).
inline int regularity_min(double alpha, int m) {
  const int c = static_cast<int>(std::ceil(alpha * m - 1e-9));
  return c < 0 ? 0 : c;
}

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf = -1;  // index into Tree::leaf_members when feature == -1

  bool operator==(const TreeNode&) const = default;
};

/// Honest double-sample regression tree fitted on one subsample. Split
/// placement reads only the J-half responses; the held-out I-half populates
/// leaf averages. Positions in i_half, j_half and leaf_members are local to
/// `subsample` (which is kept sorted, making the fit invariant to the order
/// in which the subsample was supplied).
struct Tree {
  std::vector<TreeNode> nodes;                 // nodes[0] is the root
  std::vector<std::vector<int>> leaf_members;  // I-sample positions per leaf
  std::vector<int> subsample;                  // global row indices, sorted
  std::vector<int> i_half;                     // local positions, sorted
  std::vector<int> j_half;                     // local positions, sorted
  int fallback_leaves = 0;  // leaves holding >= 2k I-observations (no admissible split)
};

inline bool same_structure(const Tree& a, const Tree& b) {
  return a.nodes == b.nodes && a.leaf_members == b.leaf_members &&
         a.subsample == b.subsample && a.i_half == b.i_half && a.j_half == b.j_half;
}

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeParams& params, Rng& rng)
      : data_(data), params_(params), rng_(rng) {
    mtry_ = params.mtry == 0 ? (data.d + 1) / 2 : params.mtry;
  }

  Tree build(std::vector<int> subsample) {
    const int s = static_cast<int>(subsample.size());
    if (s < 2 * params_.k) {
      throw std::invalid_argument("fit_tree: subsample too small (needs s >= 2k)");
    }
    std::sort(subsample.begin(), subsample.end());
    if (std::adjacent_find(subsample.begin(), subsample.end()) != subsample.end()) {
      throw std::invalid_argument("fit_tree: subsample indices must be distinct");
    }
    if (subsample.front() < 0 || subsample.back() >= data_.n) {
      throw std::invalid_argument("fit_tree: subsample index out of range");
    }

    tree_ = Tree{};
    tree_.subsample = std::move(subsample);

    // Double-sample halving: I gets ceil(s/2) positions, the J remainder
    // places the splits.
    std::vector<int> pos(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i) pos[static_cast<std::size_t>(i)] = i;
    rng_.shuffle(std::span<int>(pos));
    const int i_size = (s + 1) / 2;
    tree_.i_half.assign(pos.begin(), pos.begin() + i_size);
    tree_.j_half.assign(pos.begin() + i_size, pos.end());
    std::sort(tree_.i_half.begin(), tree_.i_half.end());
    std::sort(tree_.j_half.begin(), tree_.j_half.end());

    iw_ = tree_.i_half;
    jw_ = tree_.j_half;
    tree_.nodes.emplace_back();
    grow(0, 0, static_cast<int>(iw_.size()), 0, static_cast<int>(jw_.size()));
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  double xval(int local_pos, int feature) const {
    return data_.x(tree_.subsample[static_cast<std::size_t>(local_pos)], feature);
  }
  double yval(int local_pos) const {
    return data_.y(tree_.subsample[static_cast<std::size_t>(local_pos)]);
  }

  void grow(int node, int ib, int ie, int jb, int je) {
    const int m_i = ie - ib;
    if (m_i < 2 * params_.k) {
      make_leaf(node, ib, ie);
      return;
    }
    const bool random_branch = rng_.uniform() < params_.random_split_prob;
    Split split = random_branch ? random_split(ib, ie, jb, je)
                                : greedy_split(ib, ie, jb, je);
    if (split.feature < 0) {
      make_leaf(node, ib, ie);
      ++tree_.fallback_leaves;
      return;
    }

    const auto below = [&](int p) { return xval(p, split.feature) <= split.threshold; };
    const auto imid = std::stable_partition(iw_.begin() + ib, iw_.begin() + ie, below);
    const auto jmid = std::stable_partition(jw_.begin() + jb, jw_.begin() + je, below);
    const int isplit = static_cast<int>(imid - iw_.begin());
    const int jsplit = static_cast<int>(jmid - jw_.begin());

    const int left = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const int right = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.nodes[static_cast<std::size_t>(node)].feature = split.feature;
    tree_.nodes[static_cast<std::size_t>(node)].threshold = split.threshold;
    tree_.nodes[static_cast<std::size_t>(node)].left = left;
    tree_.nodes[static_cast<std::size_t>(node)].right = right;

    grow(left, ib, isplit, jb, jsplit);
    grow(right, isplit, ie, jsplit, je);
  }

  void make_leaf(int node, int ib, int ie) {
    tree_.nodes[static_cast<std::size_t>(node)].leaf =
        static_cast<int>(tree_.leaf_members.size());
    std::vector<int> members(iw_.begin() + ib, iw_.begin() + ie);
    std::sort(members.begin(), members.end());
    tree_.leaf_members.push_back(std::move(members));
  }

  // Admissibility at a node: each side keeps the alpha fraction of both
  // halves and at least k I-observations (so every leaf ends in [k, 2k-1]).
  struct Bounds {
    int i_min, j_min, m_i, m_j;
  };
  Bounds bounds(int ib, int ie, int jb, int je) const {
    const int m_i = ie - ib;
    const int m_j = je - jb;
    return {std::max(params_.k, regularity_min(params_.alpha, m_i)),
            regularity_min(params_.alpha, m_j), m_i, m_j};
  }

  void load_feature(int feature, int ib, int ie, int jb, int je) {
    jvals_.clear();
    for (int p = jb; p < je; ++p) {
      const int pos = jw_[static_cast<std::size_t>(p)];
      jvals_.emplace_back(xval(pos, feature), yval(pos));
    }
    std::sort(jvals_.begin(), jvals_.end());
    ivals_.clear();
    for (int p = ib; p < ie; ++p) {
      ivals_.push_back(xval(iw_[static_cast<std::size_t>(p)], feature));
    }
    std::sort(ivals_.begin(), ivals_.end());
  }

  bool admissible(double threshold, const Bounds& b) const {
    const int n_jl = static_cast<int>(
        std::upper_bound(jvals_.begin(), jvals_.end(),
                         std::make_pair(threshold, std::numeric_limits<double>::infinity())) -
        jvals_.begin());
    if (n_jl < b.j_min || b.m_j - n_jl < b.j_min) return false;
    const int n_il = static_cast<int>(
        std::upper_bound(ivals_.begin(), ivals_.end(), threshold) - ivals_.begin());
    return n_il >= b.i_min && b.m_i - n_il >= b.i_min;
  }

  // CART variance reduction of the J-half responses over mtry features drawn
  // without replacement; ties break to the lowest feature index, then the
  // smallest threshold (strict improvement while scanning in that order).
  Split greedy_split(int ib, int ie, int jb, int je) {
    const Bounds b = bounds(ib, ie, jb, je);
    feature_pool_.resize(static_cast<std::size_t>(data_.d));
    for (int f = 0; f < data_.d; ++f) feature_pool_[static_cast<std::size_t>(f)] = f;
    for (int i = 0; i < mtry_; ++i) {
      const int j = i + static_cast<int>(rng_.below(static_cast<std::uint64_t>(data_.d - i)));
      std::swap(feature_pool_[static_cast<std::size_t>(i)],
                feature_pool_[static_cast<std::size_t>(j)]);
    }
    std::sort(feature_pool_.begin(), feature_pool_.begin() + mtry_);

    Split best;
    for (int fi = 0; fi < mtry_; ++fi) {
      const int feature = feature_pool_[static_cast<std::size_t>(fi)];
      load_feature(feature, ib, ie, jb, je);
      double total = 0.0;
      for (const auto& [x, y] : jvals_) total += y;
      double left_sum = 0.0;
      for (std::size_t p = 0; p + 1 < jvals_.size(); ++p) {
        left_sum += jvals_[p].second;
        if (jvals_[p].first == jvals_[p + 1].first) continue;
        const double threshold = 0.5 * (jvals_[p].first + jvals_[p + 1].first);
        if (!admissible(threshold, b)) continue;
        const int n_l = static_cast<int>(
            std::upper_bound(jvals_.begin(), jvals_.end(),
                             std::make_pair(threshold, std::numeric_limits<double>::infinity())) -
            jvals_.begin());
        const double s_l = partial_sum_at(n_l, left_sum, p);
        const double s_r = total - s_l;
        const double gain = s_l * s_l / n_l + s_r * s_r / (b.m_j - n_l);
        if (best.feature < 0 || gain > best.gain) {
          best = {feature, threshold, gain};
        }
      }
    }
    return best;
  }

  // left_sum already covers jvals_[0..p]; n_l can only differ from p + 1 when
  // rounding put the midpoint on top of a duplicate run, so recompute then.
  double partial_sum_at(int n_l, double left_sum, std::size_t p) const {
    if (n_l == static_cast<int>(p) + 1) return left_sum;
    double s = 0.0;
    for (int q = 0; q < n_l; ++q) s += jvals_[static_cast<std::size_t>(q)].second;
    return s;
  }

  // Random-split branch: one feature drawn uniformly from all d; threshold is
  // the admissible midpoint closest to the J-half median (ties to the smaller).
  Split random_split(int ib, int ie, int jb, int je) {
    const Bounds b = bounds(ib, ie, jb, je);
    const int feature = static_cast<int>(rng_.below(static_cast<std::uint64_t>(data_.d)));
    load_feature(feature, ib, ie, jb, je);
    if (jvals_.empty()) return {};
    const std::size_t m = jvals_.size();
    const double median = (m % 2 == 1)
                              ? jvals_[m / 2].first
                              : 0.5 * (jvals_[m / 2 - 1].first + jvals_[m / 2].first);
    Split best;
    double best_dist = 0.0;
    for (std::size_t p = 0; p + 1 < m; ++p) {
      if (jvals_[p].first == jvals_[p + 1].first) continue;
      const double threshold = 0.5 * (jvals_[p].first + jvals_[p + 1].first);
      if (!admissible(threshold, b)) continue;
      const double dist = std::fabs(threshold - median);
      if (best.feature < 0 || dist < best_dist) {
        best = {feature, threshold, 0.0};
        best_dist = dist;
      }
    }
    return best;
  }

  const Dataset& data_;
  const TreeParams& params_;
  Rng& rng_;
  int mtry_ = 0;
  Tree tree_;
  std::vector<int> iw_, jw_;  // workspace partitions, node ranges index into these
  std::vector<std::pair<double, double>> jvals_;
  std::vector<double> ivals_;
  std::vector<int> feature_pool_;
};

}  // namespace detail

inline Tree fit_tree(const Dataset& data, std::vector<int> subsample,
                     const TreeParams& params, Rng& rng) {
  validate(params, data.d);
  detail::TreeBuilder builder(data, params, rng);
  return builder.build(std::move(subsample));
}

inline int find_leaf(const Tree& tree, std::span<const double> x0) {
  int node = 0;
  while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
    node = x0[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return tree.nodes[static_cast<std::size_t>(node)].leaf;
}

/// Kernel weights S_i over the subsample: 1/|leaf(x0) ∩ I| on the I-sample
/// members of the leaf containing x0, zero elsewhere.
inline std::vector<double> leaf_weights(const Tree& tree, std::span<const double> x0) {
  std::vector<double> weights(tree.subsample.size(), 0.0);
  const auto& members = tree.leaf_members[static_cast<std::size_t>(find_leaf(tree, x0))];
  const double w = 1.0 / static_cast<double>(members.size());
  for (const int pos : members) weights[static_cast<std::size_t>(pos)] = w;
  return weights;
}

/// Tree prediction at x0: the mean response of the I-sample members in the
/// leaf containing x0 (equivalently sum_i S_i Y_i).
inline double predict(const Tree& tree, const Dataset& data, std::span<const double> x0) {
  const auto& members = tree.leaf_members[static_cast<std::size_t>(find_leaf(tree, x0))];
  double sum = 0.0;
  for (const int pos : members) {
    sum += data.y(tree.subsample[static_cast<std::size_t>(pos)]);
  }
  return sum / static_cast<double>(members.size());
}

}  // namespace uel
