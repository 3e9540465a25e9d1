#include "forestprune/tree.hpp"

#include "forestprune/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace forestprune {

void CartParams::validate() const {
    if (min_bucket < 1) throw ConfigError("cart min_bucket must be >= 1");
    if (min_split < 2) throw ConfigError("cart min_split must be >= 2");
    if (cp < 0.0 || !std::isfinite(cp)) throw ConfigError("cart cp must be finite and >= 0");
    if (max_depth < 0) throw ConfigError("cart max_depth must be >= 0");
}

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

double RegressionTree::predict(const Eigen::MatrixXd& features, Eigen::Index row) const {
    const TreeNode* node = &nodes_[0];
    while (!node->is_leaf()) {
        node = features(row, node->feature) < node->threshold ? &nodes_[node->left]
                                                              : &nodes_[node->right];
    }
    return node->value;
}

double RegressionTree::predict(std::span<const double> x) const {
    const TreeNode* node = &nodes_[0];
    while (!node->is_leaf()) {
        node = x[static_cast<std::size_t>(node->feature)] < node->threshold ? &nodes_[node->left]
                                                                            : &nodes_[node->right];
    }
    return node->value;
}

Eigen::VectorXd RegressionTree::predict_rows(const Eigen::MatrixXd& features,
                                             std::span<const Eigen::Index> rows) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = predict(features, rows[i]);
    }
    return out;
}

Eigen::Index RegressionTree::leaf_count() const {
    Eigen::Index leaves = 0;
    for (const auto& node : nodes_) {
        if (node.is_leaf()) ++leaves;
    }
    return leaves;
}

int RegressionTree::depth() const {
    if (nodes_.empty()) return 0;
    // Preorder storage; walk explicitly to stay robust to any node order.
    int max_depth = 0;
    std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        const TreeNode& node = nodes_[static_cast<std::size_t>(id)];
        if (node.is_leaf()) {
            max_depth = std::max(max_depth, d);
        } else {
            stack.emplace_back(node.left, d + 1);
            stack.emplace_back(node.right, d + 1);
        }
    }
    return max_depth;
}

std::int32_t RegressionTree::max_feature_index() const {
    std::int32_t max_index = -1;
    for (const auto& node : nodes_) {
        if (!node.is_leaf()) max_index = std::max(max_index, node.feature);
    }
    return max_index;
}

std::string RegressionTree::to_text(const std::vector<std::string>& column_names) const {
    std::ostringstream out;
    auto feature_name = [&](std::int32_t f) {
        if (f >= 0 && static_cast<std::size_t>(f) < column_names.size()) {
            return column_names[static_cast<std::size_t>(f)];
        }
        return "x" + std::to_string(f + 1);
    };
    std::vector<std::tuple<std::int32_t, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, indent] = stack.back();
        stack.pop_back();
        const TreeNode& node = nodes_[static_cast<std::size_t>(id)];
        for (int i = 0; i < indent; ++i) out << "  ";
        if (node.is_leaf()) {
            out << "leaf " << node.value << "  (n=" << node.count << ")\n";
        } else {
            out << feature_name(node.feature) << " < " << node.threshold << "  (n=" << node.count
                << ")\n";
            stack.emplace_back(node.right, indent + 1);
            stack.emplace_back(node.left, indent + 1);
        }
    }
    return out.str();
}

namespace {

struct FitContext {
    const Eigen::MatrixXd* features;
    std::span<const Eigen::Index> rows;  // bootstrap row list, may repeat
    std::vector<double> y;               // response per bootstrap position
    std::vector<std::int32_t> active_features;
    CartParams params;
    double root_sse = 0.0;

    // Per active feature: bootstrap positions ordered by feature value.
    // Each node owns the same [begin, end) range in every array.
    std::vector<std::vector<std::uint32_t>> sorted;
    std::vector<std::uint32_t> scratch;
    std::vector<char> goes_left;  // indexed by bootstrap position

    std::vector<TreeNode> nodes;

    double value_at(std::int32_t feature, std::uint32_t pos) const {
        return (*features)(rows[pos], feature);
    }
};

struct BestSplit {
    double gain = -std::numeric_limits<double>::infinity();
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::size_t left_count = 0;
};

BestSplit find_best_split(const FitContext& ctx, std::size_t begin, std::size_t end) {
    const std::size_t count = end - begin;
    const std::size_t min_bucket = static_cast<std::size_t>(ctx.params.min_bucket);
    BestSplit best;
    if (count < 2 * min_bucket) return best;

    double total_sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        total_sum += ctx.y[ctx.sorted[0][i]];
    }
    const double total_term = total_sum * total_sum / static_cast<double>(count);

    for (std::size_t a = 0; a < ctx.active_features.size(); ++a) {
        const std::int32_t feature = ctx.active_features[a];
        const auto& order = ctx.sorted[a];
        double left_sum = 0.0;
        for (std::size_t i = begin; i + 1 < end; ++i) {
            left_sum += ctx.y[order[i]];
            const std::size_t left_count = i - begin + 1;
            if (left_count < min_bucket) continue;
            if (count - left_count < min_bucket) break;
            const double v = ctx.value_at(feature, order[i]);
            const double v_next = ctx.value_at(feature, order[i + 1]);
            if (!(v < v_next)) continue;  // no boundary between equal values
            const std::size_t right_count = count - left_count;
            const double right_sum = total_sum - left_sum;
            const double gain = left_sum * left_sum / static_cast<double>(left_count) +
                                right_sum * right_sum / static_cast<double>(right_count) -
                                total_term;
            if (gain > best.gain) {
                best.gain = gain;
                best.feature = feature;
                best.threshold = v + (v_next - v) / 2.0;
                best.left_count = left_count;
            }
        }
    }
    return best;
}

std::int32_t build_node(FitContext& ctx, std::size_t begin, std::size_t end, int depth) {
    const auto id = static_cast<std::int32_t>(ctx.nodes.size());
    ctx.nodes.emplace_back();
    const std::size_t count = end - begin;

    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += ctx.y[ctx.sorted[0][i]];
    const double mean = sum / static_cast<double>(count);

    ctx.nodes[static_cast<std::size_t>(id)].count = static_cast<std::int64_t>(count);

    auto make_leaf = [&] {
        ctx.nodes[static_cast<std::size_t>(id)].value = mean;
        return id;
    };
    if (count < static_cast<std::size_t>(ctx.params.min_split) || depth >= ctx.params.max_depth) {
        return make_leaf();
    }
    const BestSplit best = find_best_split(ctx, begin, end);
    if (best.feature < 0 || !(best.gain > 0.0) || best.gain < ctx.params.cp * ctx.root_sse) {
        return make_leaf();
    }

    // Mark the left side using the split feature's ordering, then stably
    // partition every feature's segment so sorted order survives.
    std::size_t split_axis = 0;
    for (std::size_t a = 0; a < ctx.active_features.size(); ++a) {
        if (ctx.active_features[a] == best.feature) split_axis = a;
    }
    for (std::size_t i = begin; i < end; ++i) {
        ctx.goes_left[ctx.sorted[split_axis][i]] = (i - begin) < best.left_count ? 1 : 0;
    }
    for (auto& order : ctx.sorted) {
        std::size_t out_left = 0;
        std::size_t out_right = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const std::uint32_t pos = order[i];
            if (ctx.goes_left[pos]) {
                order[begin + out_left++] = pos;
            } else {
                ctx.scratch[out_right++] = pos;
            }
        }
        std::copy(ctx.scratch.begin(), ctx.scratch.begin() + static_cast<std::ptrdiff_t>(out_right),
                  order.begin() + static_cast<std::ptrdiff_t>(begin + out_left));
    }

    const std::size_t mid = begin + best.left_count;
    ctx.nodes[static_cast<std::size_t>(id)].feature = best.feature;
    ctx.nodes[static_cast<std::size_t>(id)].threshold = best.threshold;
    const std::int32_t left = build_node(ctx, begin, mid, depth + 1);
    const std::int32_t right = build_node(ctx, mid, end, depth + 1);
    ctx.nodes[static_cast<std::size_t>(id)].left = left;
    ctx.nodes[static_cast<std::size_t>(id)].right = right;
    return id;
}

}  // namespace

RegressionTree fit_tree(const Dataset& dataset, std::span<const Eigen::Index> row_indices,
                        const std::vector<bool>& feature_mask, const CartParams& params,
                        [[maybe_unused]] std::uint64_t seed) {
    params.validate();
    if (row_indices.empty()) throw ConfigError("fit_tree requires at least one row");
    if (static_cast<Eigen::Index>(feature_mask.size()) != dataset.cols()) {
        throw ConfigError("feature mask width " + std::to_string(feature_mask.size()) +
                          " does not match dataset width " + std::to_string(dataset.cols()));
    }
    for (Eigen::Index r : row_indices) {
        if (r < 0 || r >= dataset.rows()) throw ConfigError("fit_tree row index out of range");
    }

    FitContext ctx;
    ctx.features = &dataset.features;
    ctx.rows = row_indices;
    ctx.params = params;
    for (std::int32_t f = 0; f < static_cast<std::int32_t>(feature_mask.size()); ++f) {
        if (feature_mask[static_cast<std::size_t>(f)]) ctx.active_features.push_back(f);
    }
    if (ctx.active_features.empty()) throw ConfigError("feature mask has no active features");

    const std::size_t m = row_indices.size();
    ctx.y.resize(m);
    for (std::size_t i = 0; i < m; ++i) ctx.y[i] = dataset.response(row_indices[i]);

    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += ctx.y[i];
    double sse = 0.0;
    const double mean = sum / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double d = ctx.y[i] - mean;
        sse += d * d;
    }
    ctx.root_sse = sse;

    ctx.sorted.resize(ctx.active_features.size());
    for (std::size_t a = 0; a < ctx.active_features.size(); ++a) {
        auto& order = ctx.sorted[a];
        order.resize(m);
        std::iota(order.begin(), order.end(), std::uint32_t{0});
        const std::int32_t feature = ctx.active_features[a];
        std::sort(order.begin(), order.end(), [&](std::uint32_t lhs, std::uint32_t rhs) {
            const double lv = ctx.value_at(feature, lhs);
            const double rv = ctx.value_at(feature, rhs);
            if (lv != rv) return lv < rv;
            return lhs < rhs;  // strict total order keeps the sort deterministic
        });
    }
    ctx.scratch.resize(m);
    ctx.goes_left.assign(m, 0);
    ctx.nodes.reserve(64);

    build_node(ctx, 0, m, 0);
    return RegressionTree(std::move(ctx.nodes));
}

}  // namespace forestprune
