#pragma once

#include "forestprune/tree.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace forestprune {

struct MergeOptions {
    std::int64_t max_leaves = 1'000'000;  // refuse larger merges (BudgetError)
    bool coalesce_equal_leaves = false;   // optional pass joining equal-valued siblings
};

/// A single tree computing the weighted sum of several source trees exactly:
/// weights are folded into leaf constants at construction, so evaluation is
/// a pure tree walk with no arithmetic.
struct MergedTree {
    RegressionTree tree;
    std::vector<int> source_indices;
    Eigen::VectorXd source_weights;
    std::int64_t leaf_count = 0;
};

// Left-fold pairwise concatenation in ascending fold order: every leaf of
// the accumulator is replaced by the next tree with leaves set to
// (accumulated value + weight * next leaf value). Branches whose split
// condition is implied impossible by ancestor conditions are dropped as the
// product is built. source_indices labels the fold order (defaults 0..k-1).
MergedTree merge_trees(const std::vector<RegressionTree>& trees, const Eigen::VectorXd& weights,
                       const MergeOptions& options = {},
                       const std::vector<int>& source_indices = {});

// Interval propagation along root-to-node paths ([lo, hi) boxes per feature,
// matching the "left iff value < threshold" routing rule); splits that are
// always-true or always-false within their path box collapse to the
// reachable child. Predictions are unchanged everywhere.
RegressionTree infeasible_branch_prune(const RegressionTree& tree);

}  // namespace forestprune
