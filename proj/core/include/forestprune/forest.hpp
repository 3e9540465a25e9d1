#pragma once

#include "forestprune/dataset.hpp"
#include "forestprune/tree.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace forestprune {

/// Bagged forest with per-tree feature subspaces. Tree i was fitted on a
/// bootstrap resample drawn from bootstrap_seeds[i] restricted to
/// feature_masks[i]; both are kept so the forest can be retrained on a new
/// row set without invalidating selected tree indices.
struct Forest {
    std::vector<RegressionTree> trees;
    std::vector<std::vector<bool>> feature_masks;
    std::vector<std::uint64_t> bootstrap_seeds;
    CartParams params;
    Eigen::Index schema_width = 0;

    int size() const { return static_cast<int>(trees.size()); }
};

struct ForestFitOptions {
    double subspace_rate = 0.8;  // P(feature active), empty masks redrawn
    bool bootstrap = true;       // test hook: false fits each tree on train as-is
    int threads = 0;             // 0 = available parallelism
};

/// Validation-set prediction matrix: column i holds tree i's predictions for
/// the listed rows, order preserving.
struct PredictionMatrix {
    Eigen::MatrixXd values;  // |rows| x B
    std::vector<Eigen::Index> row_indices;
};

// Fits B trees. Per-tree seeds derive from the master seed by tree index, so
// the result is independent of the worker count. Each tree draws its
// bootstrap resample (with replacement, same size as train_indices) first
// and its feature mask second from its own stream.
Forest fit_forest(const Dataset& dataset, std::span<const Eigen::Index> train_indices, int B,
                  const CartParams& params, const ForestFitOptions& options, std::uint64_t seed);

// Refits every tree on a new row set, reusing each tree's stored seed (the
// bootstrap stream prefix is unchanged) and stored feature mask, so selected
// tree indices keep their meaning after the post-pruning 80% retrain.
void refit_forest(Forest& forest, const Dataset& dataset,
                  std::span<const Eigen::Index> train_indices, int threads = 0);

// Without weights: the uniform forest mean, computed as sum of (1/B)*t_i in
// tree order (the library-wide convention for means, making weighted and
// unweighted paths bit-identical). With weights: sum of w_i*t_i, used as
// estimated, no renormalization.
Eigen::VectorXd predict_forest(const Forest& forest, const Dataset& dataset,
                               std::span<const Eigen::Index> rows,
                               const std::optional<Eigen::VectorXd>& weights = std::nullopt);

PredictionMatrix prediction_matrix(const Forest& forest, const Dataset& dataset,
                                   std::span<const Eigen::Index> rows, int threads = 0);

/// Mean of selected matrix columns at each row, accumulated in ascending
/// selection order as sum of (1/k)*column. The canonical uniform sub-forest
/// prediction used by every pruner and report.
Eigen::VectorXd uniform_column_mean(const Eigen::MatrixXd& values, std::span<const int> columns);

}  // namespace forestprune
