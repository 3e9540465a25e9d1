#include "forestprune/merge.hpp"

#include "forestprune/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace forestprune {

namespace {

// Emits product trees in preorder while tracking per-feature path boxes
// [lo, hi): going left at (f, t) caps hi[f] at t, going right raises lo[f]
// to t. A split with t <= lo[f] can only route right, t >= hi[f] only left.
class ProductBuilder {
public:
    ProductBuilder(std::size_t width, std::int64_t max_leaves) : max_leaves_(max_leaves) {
        lo_.assign(width, -std::numeric_limits<double>::infinity());
        hi_.assign(width, std::numeric_limits<double>::infinity());
    }

    // Reduced copy of src with leaf values base + weight * value and counts
    // preserved; used for the fold seed and for standalone pruning.
    std::int32_t copy_scaled(const RegressionTree& src, std::int32_t id, double base,
                             double weight) {
        const TreeNode& node = src.nodes()[static_cast<std::size_t>(id)];
        if (node.is_leaf()) {
            return emit_leaf(base + weight * node.value, node.count);
        }
        const auto f = static_cast<std::size_t>(node.feature);
        if (node.threshold <= lo_[f]) return copy_scaled(src, node.right, base, weight);
        if (node.threshold >= hi_[f]) return copy_scaled(src, node.left, base, weight);

        const auto self = emit_split(node.feature, node.threshold, node.count);
        const double saved_hi = hi_[f];
        hi_[f] = node.threshold;
        const std::int32_t left = copy_scaled(src, node.left, base, weight);
        hi_[f] = saved_hi;
        const double saved_lo = lo_[f];
        lo_[f] = node.threshold;
        const std::int32_t right = copy_scaled(src, node.right, base, weight);
        lo_[f] = saved_lo;
        nodes_[static_cast<std::size_t>(self)].left = left;
        nodes_[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    // Walks acc, substituting every reachable leaf by a reduced copy of
    // next; counts are not meaningful for concatenations and emit as 0.
    std::int32_t concat(const RegressionTree& acc, std::int32_t id, const RegressionTree& next,
                        double weight) {
        const TreeNode& node = acc.nodes()[static_cast<std::size_t>(id)];
        if (node.is_leaf()) {
            return copy_reduced_zero_count(next, next.root(), node.value, weight);
        }
        const auto f = static_cast<std::size_t>(node.feature);
        if (node.threshold <= lo_[f]) return concat(acc, node.right, next, weight);
        if (node.threshold >= hi_[f]) return concat(acc, node.left, next, weight);

        const auto self = emit_split(node.feature, node.threshold, 0);
        const double saved_hi = hi_[f];
        hi_[f] = node.threshold;
        const std::int32_t left = concat(acc, node.left, next, weight);
        hi_[f] = saved_hi;
        const double saved_lo = lo_[f];
        lo_[f] = node.threshold;
        const std::int32_t right = concat(acc, node.right, next, weight);
        lo_[f] = saved_lo;
        nodes_[static_cast<std::size_t>(self)].left = left;
        nodes_[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    RegressionTree take() { return RegressionTree(std::move(nodes_)); }

private:
    std::int32_t copy_reduced_zero_count(const RegressionTree& src, std::int32_t id, double base,
                                         double weight) {
        const TreeNode& node = src.nodes()[static_cast<std::size_t>(id)];
        if (node.is_leaf()) {
            return emit_leaf(base + weight * node.value, 0);
        }
        const auto f = static_cast<std::size_t>(node.feature);
        if (node.threshold <= lo_[f]) return copy_reduced_zero_count(src, node.right, base, weight);
        if (node.threshold >= hi_[f]) return copy_reduced_zero_count(src, node.left, base, weight);

        const auto self = emit_split(node.feature, node.threshold, 0);
        const double saved_hi = hi_[f];
        hi_[f] = node.threshold;
        const std::int32_t left = copy_reduced_zero_count(src, node.left, base, weight);
        hi_[f] = saved_hi;
        const double saved_lo = lo_[f];
        lo_[f] = node.threshold;
        const std::int32_t right = copy_reduced_zero_count(src, node.right, base, weight);
        lo_[f] = saved_lo;
        nodes_[static_cast<std::size_t>(self)].left = left;
        nodes_[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    std::int32_t emit_leaf(double value, std::int64_t count) {
        if (++leaves_ > max_leaves_) {
            throw BudgetError("merge would exceed the leaf budget of " +
                              std::to_string(max_leaves_) + " leaves");
        }
        TreeNode node;
        node.value = value;
        node.count = count;
        nodes_.push_back(node);
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    std::int32_t emit_split(std::int32_t feature, double threshold, std::int64_t count) {
        TreeNode node;
        node.feature = feature;
        node.threshold = threshold;
        node.count = count;
        nodes_.push_back(node);
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    std::vector<double> lo_;
    std::vector<double> hi_;
    std::vector<TreeNode> nodes_;
    std::int64_t leaves_ = 0;
    std::int64_t max_leaves_;
};

std::size_t required_width(const std::vector<RegressionTree>& trees) {
    std::int32_t max_feature = -1;
    for (const auto& tree : trees) {
        max_feature = std::max(max_feature, tree.max_feature_index());
    }
    return static_cast<std::size_t>(max_feature + 1);
}

// Bottom-up collapse of equal-valued sibling leaves; returns the new id.
std::int32_t coalesce(const std::vector<TreeNode>& src, std::int32_t id,
                      std::vector<TreeNode>& out) {
    const TreeNode& node = src[static_cast<std::size_t>(id)];
    if (node.is_leaf()) {
        out.push_back(node);
        return static_cast<std::int32_t>(out.size() - 1);
    }
    const auto self = static_cast<std::int32_t>(out.size());
    out.push_back(node);
    const std::int32_t left = coalesce(src, node.left, out);
    const std::int32_t right = coalesce(src, node.right, out);
    const bool both_leaves = out[static_cast<std::size_t>(left)].is_leaf() &&
                             out[static_cast<std::size_t>(right)].is_leaf();
    if (both_leaves && out[static_cast<std::size_t>(left)].value ==
                           out[static_cast<std::size_t>(right)].value) {
        TreeNode merged;
        merged.value = out[static_cast<std::size_t>(left)].value;
        merged.count = out[static_cast<std::size_t>(left)].count +
                       out[static_cast<std::size_t>(right)].count;
        out.resize(static_cast<std::size_t>(self));
        out.push_back(merged);
        return self;
    }
    out[static_cast<std::size_t>(self)].left = left;
    out[static_cast<std::size_t>(self)].right = right;
    return self;
}

}  // namespace

MergedTree merge_trees(const std::vector<RegressionTree>& trees, const Eigen::VectorXd& weights,
                       const MergeOptions& options, const std::vector<int>& source_indices) {
    if (trees.empty()) throw ConfigError("merge_trees requires at least one tree");
    if (weights.size() != static_cast<Eigen::Index>(trees.size())) {
        throw ConfigError("merge weight count " + std::to_string(weights.size()) +
                          " does not match tree count " + std::to_string(trees.size()));
    }
    if (!weights.allFinite()) throw ConfigError("merge weights must be finite");
    if (!source_indices.empty() && source_indices.size() != trees.size()) {
        throw ConfigError("merge source_indices length does not match tree count");
    }
    for (const auto& tree : trees) {
        if (tree.empty()) throw ConfigError("merge_trees received an empty tree");
    }
    const std::size_t width = required_width(trees);

    RegressionTree acc;
    {
        ProductBuilder builder(width, options.max_leaves);
        builder.copy_scaled(trees[0], trees[0].root(), 0.0, weights(0));
        acc = builder.take();
    }
    for (std::size_t k = 1; k < trees.size(); ++k) {
        ProductBuilder builder(width, options.max_leaves);
        builder.concat(acc, acc.root(), trees[k], weights(static_cast<Eigen::Index>(k)));
        acc = builder.take();
    }

    if (options.coalesce_equal_leaves) {
        std::vector<TreeNode> out;
        out.reserve(acc.nodes().size());
        coalesce(acc.nodes(), acc.root(), out);
        acc = RegressionTree(std::move(out));
    }

    MergedTree merged;
    merged.leaf_count = acc.leaf_count();
    merged.tree = std::move(acc);
    merged.source_weights = weights;
    if (source_indices.empty()) {
        merged.source_indices.resize(trees.size());
        std::iota(merged.source_indices.begin(), merged.source_indices.end(), 0);
    } else {
        merged.source_indices = source_indices;
    }
    return merged;
}

RegressionTree infeasible_branch_prune(const RegressionTree& tree) {
    if (tree.empty()) throw ConfigError("infeasible_branch_prune received an empty tree");
    const std::size_t width = static_cast<std::size_t>(tree.max_feature_index() + 1);
    ProductBuilder builder(width, std::numeric_limits<std::int64_t>::max());
    builder.copy_scaled(tree, tree.root(), 0.0, 1.0);
    return builder.take();
}

}  // namespace forestprune
