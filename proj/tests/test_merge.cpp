#include <doctest.h>

#include "forestprune/dataset.hpp"
#include "forestprune/errors.hpp"
#include "forestprune/merge.hpp"
#include "forestprune/rng.hpp"

#include <numeric>

using namespace forestprune;

namespace {

RegressionTree stump(int feature, double threshold, double left, double right) {
    std::vector<TreeNode> nodes(3);
    nodes[0] = TreeNode{feature, threshold, 1, 2, 0.0, 0};
    nodes[1] = TreeNode{-1, 0.0, -1, -1, left, 0};
    nodes[2] = TreeNode{-1, 0.0, -1, -1, right, 0};
    return RegressionTree(std::move(nodes));
}

RegressionTree random_tree(Rng& rng, Eigen::Index n, int width, std::uint64_t seed) {
    ScenarioConfig config;
    config.n = n;
    config.total_vars = width;
    config.relevant_vars = std::min(2, width);
    config.noise_variance = 0.3;
    config.seed = seed;
    const Dataset data = generate_scenario(config);
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    CartParams params;
    params.min_split = 10;
    params.min_bucket = 3;
    params.cp = 0.001;
    (void)rng;
    return fit_tree(data, rows, std::vector<bool>(static_cast<std::size_t>(width), true), params);
}

std::vector<double> random_point(Rng& rng, int width) {
    std::vector<double> x(static_cast<std::size_t>(width));
    for (auto& v : x) v = 3.0 * rng.next_gaussian();
    return x;
}

}  // namespace

TEST_CASE("the two-stump example collapses the implied branch to value 4") {
    // Tree A splits x >= 5 (right leaf 6), tree B splits x >= 3 (right leaf
    // 2). Under x >= 5 the second split is implied, so the combined root's
    // right child is a leaf worth (6+2)/2 = 4.
    const RegressionTree a = stump(0, 5.0, 0.0, 6.0);
    const RegressionTree b = stump(0, 3.0, 1.0, 2.0);
    Eigen::VectorXd weights(2);
    weights << 0.5, 0.5;
    const MergedTree merged = merge_trees({a, b}, weights);

    const TreeNode& root = merged.tree.nodes()[0];
    REQUIRE(!root.is_leaf());
    const TreeNode& right = merged.tree.nodes()[static_cast<std::size_t>(root.right)];
    CHECK(right.is_leaf());
    CHECK(right.value == 4.0);

    // Left side keeps B's split: x<3 -> (0+1)/2, 3<=x<5 -> (0+2)/2.
    CHECK(merged.tree.predict(std::vector<double>{2.0}) == 0.5);
    CHECK(merged.tree.predict(std::vector<double>{4.0}) == 1.0);
    CHECK(merged.tree.predict(std::vector<double>{7.0}) == 4.0);
    CHECK(merged.leaf_count == 3);
}

TEST_CASE("merging a single tree with weight 1 is the identity") {
    Rng rng(1);
    const RegressionTree tree = random_tree(rng, 200, 4, 11);
    const MergedTree merged = merge_trees({tree}, Eigen::VectorXd::Ones(1));
    CHECK(merged.tree == tree);
    CHECK(merged.source_indices == std::vector<int>{0});
}

TEST_CASE("merging a tree with itself at half weights reproduces it exactly") {
    Rng rng(2);
    const RegressionTree tree = random_tree(rng, 200, 4, 12);
    Eigen::VectorXd weights(2);
    weights << 0.5, 0.5;
    const MergedTree merged = merge_trees({tree, tree}, weights);
    for (int i = 0; i < 1000; ++i) {
        const auto x = random_point(rng, 4);
        CHECK(merged.tree.predict(x) == tree.predict(x));
    }
}

TEST_CASE("merged predictions equal the fold-order weighted sum exactly") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<RegressionTree> trees;
        const int count = 2 + static_cast<int>(rng.next_below(2));
        for (int k = 0; k < count; ++k) {
            trees.push_back(random_tree(rng, 150, 4, 100 + 10 * trial + k));
        }
        Eigen::VectorXd weights(count);
        for (int k = 0; k < count; ++k) weights(k) = rng.next_unit();
        const MergedTree merged = merge_trees(trees, weights);
        for (int i = 0; i < 200; ++i) {
            const auto x = random_point(rng, 4);
            double expected = 0.0;
            for (int k = 0; k < count; ++k) expected += weights(k) * trees[k].predict(x);
            CHECK(merged.tree.predict(x) == expected);
        }
    }
}

TEST_CASE("depth is subadditive and leaf count multiplicative at worst") {
    Rng rng(4);
    std::vector<RegressionTree> trees{random_tree(rng, 150, 4, 21), random_tree(rng, 150, 4, 22),
                                      random_tree(rng, 150, 4, 23)};
    Eigen::VectorXd weights = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    const MergedTree merged = merge_trees(trees, weights);
    int depth_sum = 0;
    Eigen::Index leaf_product = 1;
    for (const auto& tree : trees) {
        depth_sum += tree.depth();
        leaf_product *= tree.leaf_count();
    }
    CHECK(merged.tree.depth() <= depth_sum);
    CHECK(merged.leaf_count <= leaf_product);
    CHECK(merged.tree.leaf_count() == merged.leaf_count);
}

TEST_CASE("infeasible splits collapse to the reachable child") {
    // Outer split x0 < 2; its left subtree re-splits x0 < 3, which is
    // implied true, so pruning keeps only that split's left child.
    std::vector<TreeNode> nodes(5);
    nodes[0] = TreeNode{0, 2.0, 1, 4, 0.0, 0};
    nodes[1] = TreeNode{0, 3.0, 2, 3, 0.0, 0};
    nodes[2] = TreeNode{-1, 0.0, -1, -1, 1.0, 0};
    nodes[3] = TreeNode{-1, 0.0, -1, -1, 99.0, 0};  // unreachable
    nodes[4] = TreeNode{-1, 0.0, -1, -1, 5.0, 0};
    const RegressionTree tree(std::move(nodes));
    const RegressionTree pruned = infeasible_branch_prune(tree);
    CHECK(pruned.leaf_count() == 2);
    CHECK(pruned.nodes().size() == 3);
    CHECK(pruned.predict(std::vector<double>{1.0}) == 1.0);
    CHECK(pruned.predict(std::vector<double>{4.0}) == 5.0);
}

TEST_CASE("pruning a tree without redundant splits is a fixpoint") {
    Rng rng(5);
    const RegressionTree tree = random_tree(rng, 200, 4, 31);
    CHECK(infeasible_branch_prune(tree) == tree);
}

TEST_CASE("pruned and unpruned merges agree everywhere") {
    Rng rng(6);
    std::vector<RegressionTree> trees{random_tree(rng, 150, 3, 41), random_tree(rng, 150, 3, 42)};
    Eigen::VectorXd weights(2);
    weights << 0.7, 0.3;
    const MergedTree merged = merge_trees(trees, weights);
    const RegressionTree repruned = infeasible_branch_prune(merged.tree);
    CHECK(repruned.leaf_count() <= merged.tree.leaf_count());
    for (int i = 0; i < 1000; ++i) {
        const auto x = random_point(rng, 3);
        CHECK(repruned.predict(x) == merged.tree.predict(x));
    }
}

TEST_CASE("the leaf budget refuses oversized merges") {
    Rng rng(7);
    std::vector<RegressionTree> trees;
    for (int k = 0; k < 3; ++k) trees.push_back(random_tree(rng, 300, 4, 50 + k));
    MergeOptions options;
    options.max_leaves = 2;
    CHECK_THROWS_AS(merge_trees(trees, Eigen::VectorXd::Constant(3, 1.0 / 3.0), options),
                    BudgetError);
}

TEST_CASE("weight validation") {
    Rng rng(8);
    const RegressionTree tree = random_tree(rng, 100, 3, 61);
    CHECK_THROWS_AS(merge_trees({tree}, Eigen::VectorXd::Ones(2)), ConfigError);
    CHECK_THROWS_AS(merge_trees({}, Eigen::VectorXd::Ones(0)), ConfigError);
}

TEST_CASE("optional coalescing joins equal-valued sibling leaves") {
    // x0<1 ? 2.0 : 2.0 collapses to a single leaf when enabled.
    const RegressionTree tree = stump(0, 1.0, 2.0, 2.0);
    MergeOptions options;
    options.coalesce_equal_leaves = true;
    const MergedTree merged = merge_trees({tree}, Eigen::VectorXd::Ones(1), options);
    CHECK(merged.leaf_count == 1);
    CHECK(merged.tree.predict(std::vector<double>{0.0}) == 2.0);
}
