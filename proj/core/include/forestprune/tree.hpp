#pragma once

#include "forestprune/dataset.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace forestprune {

/// rpart-style early-stopping controls, defaults matching that library.
struct CartParams {
    int min_split = 20;   // smallest node that may be split
    int min_bucket = 7;   // smallest allowed child
    double cp = 0.01;     // split kept iff SSE gain >= cp * root SSE
    int max_depth = 30;   // root has depth 0

    void validate() const;
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;      // leaf prediction (mean of training rows)
    std::int64_t count = 0;  // training rows reaching this node

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary piecewise-constant regression tree. Nodes are stored in preorder
/// with the root at index 0. Routing rule: go left iff x[feature] < threshold.
class RegressionTree {
public:
    RegressionTree() = default;
    explicit RegressionTree(std::vector<TreeNode> nodes);

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    bool empty() const { return nodes_.empty(); }
    std::int32_t root() const { return 0; }

    double predict(const Eigen::MatrixXd& features, Eigen::Index row) const;
    double predict(std::span<const double> x) const;
    Eigen::VectorXd predict_rows(const Eigen::MatrixXd& features,
                                 std::span<const Eigen::Index> rows) const;

    Eigen::Index leaf_count() const;
    int depth() const;
    /// Largest feature index referenced by any split; -1 for a single leaf.
    std::int32_t max_feature_index() const;

    /// Indented one-condition-per-line dump; names fall back to x<j+1>.
    std::string to_text(const std::vector<std::string>& column_names = {}) const;

    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
};

// Greedy exact CART induction minimizing the sum of squared errors. A split
// is accepted only if the node has >= min_split rows, both children have
// >= min_bucket rows, node depth < max_depth, and the SSE reduction is
// >= cp * root SSE (and > 0). Thresholds sit at midpoints between adjacent
// distinct observed values; ties in gain resolve to the lowest feature
// index, then the lowest threshold. row_indices may repeat (bootstrap).
// The seed parameter is unused by the exact deterministic search and is
// kept for interface stability.
RegressionTree fit_tree(const Dataset& dataset, std::span<const Eigen::Index> row_indices,
                        const std::vector<bool>& feature_mask, const CartParams& params,
                        std::uint64_t seed = 0);

}  // namespace forestprune
