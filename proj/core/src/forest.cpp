#include "forestprune/forest.hpp"

#include "forestprune/errors.hpp"
#include "forestprune/parallel.hpp"
#include "forestprune/rng.hpp"

#include <cmath>
#include <string>

namespace forestprune {

namespace {

std::vector<Eigen::Index> draw_bootstrap(Rng& rng, std::span<const Eigen::Index> train,
                                         bool enabled) {
    std::vector<Eigen::Index> rows(train.size());
    if (enabled) {
        for (auto& row : rows) {
            row = train[static_cast<std::size_t>(rng.next_below(train.size()))];
        }
    } else {
        std::copy(train.begin(), train.end(), rows.begin());
    }
    return rows;
}

std::vector<bool> draw_mask(Rng& rng, Eigen::Index width, double rate) {
    std::vector<bool> mask(static_cast<std::size_t>(width));
    while (true) {
        bool any = false;
        for (std::size_t f = 0; f < mask.size(); ++f) {
            mask[f] = rng.next_bernoulli(rate);
            any = any || mask[f];
        }
        if (any) return mask;  // empty subspaces are redrawn
    }
}

}  // namespace

Forest fit_forest(const Dataset& dataset, std::span<const Eigen::Index> train_indices, int B,
                  const CartParams& params, const ForestFitOptions& options, std::uint64_t seed) {
    if (B < 1) throw ConfigError("forest size B must be >= 1");
    if (train_indices.empty()) throw ConfigError("fit_forest requires a non-empty train set");
    if (!(options.subspace_rate > 0.0 && options.subspace_rate <= 1.0)) {
        throw ConfigError("subspace_rate must lie in (0, 1]");
    }
    params.validate();

    Forest forest;
    forest.params = params;
    forest.schema_width = dataset.cols();
    forest.trees.resize(static_cast<std::size_t>(B));
    forest.feature_masks.resize(static_cast<std::size_t>(B));
    forest.bootstrap_seeds.resize(static_cast<std::size_t>(B));
    for (int i = 0; i < B; ++i) {
        forest.bootstrap_seeds[static_cast<std::size_t>(i)] =
            derive_seed(seed, static_cast<std::uint64_t>(i));
    }

    parallel_for(static_cast<std::size_t>(B), options.threads, [&](std::size_t i) {
        Rng rng(forest.bootstrap_seeds[i]);
        const auto rows = draw_bootstrap(rng, train_indices, options.bootstrap);
        forest.feature_masks[i] = draw_mask(rng, dataset.cols(), options.subspace_rate);
        forest.trees[i] = fit_tree(dataset, rows, forest.feature_masks[i], params);
    });
    return forest;
}

void refit_forest(Forest& forest, const Dataset& dataset,
                  std::span<const Eigen::Index> train_indices, int threads) {
    if (train_indices.empty()) throw ConfigError("refit_forest requires a non-empty train set");
    if (dataset.cols() != forest.schema_width) {
        throw ConfigError("refit dataset width " + std::to_string(dataset.cols()) +
                          " does not match forest schema width " +
                          std::to_string(forest.schema_width));
    }
    parallel_for(forest.trees.size(), threads, [&](std::size_t i) {
        Rng rng(forest.bootstrap_seeds[i]);
        const auto rows = draw_bootstrap(rng, train_indices, true);
        forest.trees[i] = fit_tree(dataset, rows, forest.feature_masks[i], forest.params);
    });
}

Eigen::VectorXd predict_forest(const Forest& forest, const Dataset& dataset,
                               std::span<const Eigen::Index> rows,
                               const std::optional<Eigen::VectorXd>& weights) {
    if (dataset.cols() < forest.schema_width) {
        throw ConfigError("dataset width " + std::to_string(dataset.cols()) +
                          " is narrower than forest schema width " +
                          std::to_string(forest.schema_width));
    }
    const int B = forest.size();
    Eigen::VectorXd coef;
    if (weights) {
        if (weights->size() != B) {
            throw ConfigError("weight vector length " + std::to_string(weights->size()) +
                              " does not match forest size " + std::to_string(B));
        }
        for (Eigen::Index i = 0; i < weights->size(); ++i) {
            const double w = (*weights)(i);
            if (!std::isfinite(w) || w < 0.0) {
                throw ConfigError("forest weights must be finite and non-negative");
            }
        }
        coef = *weights;
    } else {
        coef = Eigen::VectorXd::Constant(B, 1.0 / static_cast<double>(B));
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size()));
    for (int i = 0; i < B; ++i) {
        const double w = coef(i);
        const auto& tree = forest.trees[static_cast<std::size_t>(i)];
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out(static_cast<Eigen::Index>(r)) += w * tree.predict(dataset.features, rows[r]);
        }
    }
    return out;
}

PredictionMatrix prediction_matrix(const Forest& forest, const Dataset& dataset,
                                   std::span<const Eigen::Index> rows, int threads) {
    if (dataset.cols() < forest.schema_width) {
        throw ConfigError("dataset width " + std::to_string(dataset.cols()) +
                          " is narrower than forest schema width " +
                          std::to_string(forest.schema_width));
    }
    for (Eigen::Index r : rows) {
        if (r < 0 || r >= dataset.rows()) throw ConfigError("prediction row index out of range");
    }
    PredictionMatrix out;
    out.row_indices.assign(rows.begin(), rows.end());
    out.values.resize(static_cast<Eigen::Index>(rows.size()), forest.size());
    parallel_for(forest.trees.size(), threads, [&](std::size_t i) {
        const auto& tree = forest.trees[i];
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) =
                tree.predict(dataset.features, rows[r]);
        }
    });
    return out;
}

Eigen::VectorXd uniform_column_mean(const Eigen::MatrixXd& values, std::span<const int> columns) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(values.rows());
    const double w = 1.0 / static_cast<double>(columns.size());
    for (int column : columns) {
        out += w * values.col(column);
    }
    return out;
}

}  // namespace forestprune
