#pragma once

// Structural audit of a fitted honest tree, used by the unit tests and the
// acceptance suite: re-routes both halves through the stored splits and
// verifies leaf membership, leaf-size bounds and alpha-regularity.

#include <algorithm>
#include <climits>
#include <vector>

#include "uel/dataset.hpp"
#include "uel/tree.hpp"

namespace uel_test {

struct TreeAudit {
  int leaves = 0;
  int oversized_leaves = 0;  // I-count >= 2k (admissible only as logged fallback)
  int min_leaf = INT_MAX;
  int max_leaf = 0;
  bool regularity_ok = true;
  bool membership_ok = true;
  bool min_count_ok = true;  // every leaf keeps at least k I-observations
};

namespace detail {

inline void audit_node(const uel::Tree& tree, const uel::Dataset& data,
                       const uel::TreeParams& params, int node, std::vector<int> ivec,
                       std::vector<int> jvec, TreeAudit& audit) {
  const uel::TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
  if (nd.feature < 0) {
    ++audit.leaves;
    std::sort(ivec.begin(), ivec.end());
    if (ivec != tree.leaf_members[static_cast<std::size_t>(nd.leaf)]) {
      audit.membership_ok = false;
    }
    const int size = static_cast<int>(ivec.size());
    audit.min_leaf = std::min(audit.min_leaf, size);
    audit.max_leaf = std::max(audit.max_leaf, size);
    if (size < params.k) audit.min_count_ok = false;
    if (size >= 2 * params.k) ++audit.oversized_leaves;
    return;
  }

  std::vector<int> il, ir, jl, jr;
  const auto route = [&](const std::vector<int>& src, std::vector<int>& left,
                         std::vector<int>& right) {
    for (const int pos : src) {
      const double x = data.x(tree.subsample[static_cast<std::size_t>(pos)], nd.feature);
      (x <= nd.threshold ? left : right).push_back(pos);
    }
  };
  route(ivec, il, ir);
  route(jvec, jl, jr);

  const int imin = uel::regularity_min(params.alpha, static_cast<int>(ivec.size()));
  const int jmin = uel::regularity_min(params.alpha, static_cast<int>(jvec.size()));
  if (static_cast<int>(il.size()) < imin || static_cast<int>(ir.size()) < imin ||
      static_cast<int>(jl.size()) < jmin || static_cast<int>(jr.size()) < jmin) {
    audit.regularity_ok = false;
  }

  audit_node(tree, data, params, nd.left, std::move(il), std::move(jl), audit);
  audit_node(tree, data, params, nd.right, std::move(ir), std::move(jr), audit);
}

}  // namespace detail

inline TreeAudit audit_tree(const uel::Tree& tree, const uel::Dataset& data,
                            const uel::TreeParams& params) {
  TreeAudit audit;
  detail::audit_node(tree, data, params, 0, tree.i_half, tree.j_half, audit);
  return audit;
}

}  // namespace uel_test
