#pragma once

#include "forestprune/forest.hpp"
#include "forestprune/nnlasso.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace forestprune {

enum class PruneMethod { SFS, SBS_PRIME, BSF, LASSO, LASSO_K };

std::string to_string(PruneMethod method);
PruneMethod prune_method_from_string(const std::string& name);

struct PruneResult {
    PruneMethod method = PruneMethod::SFS;
    std::vector<int> selected;   // ascending, unique, non-empty
    Eigen::VectorXd weights;     // over selected; uniform for combinatorial methods
    double validation_mspe = 0.0;
    std::vector<double> trace;   // per-iteration MSPE; empty for BSF/LASSO
    bool lasso_fallback = false; // all-zero CV solution replaced by best single tree
    double lasso_lambda = 0.0;   // selected penalty, LASSO variants only

    /// Weighted sub-forest prediction on a prediction matrix with the same
    /// column layout the result was computed from.
    Eigen::VectorXd predict(const Eigen::MatrixXd& values) const;
};

struct PruneOptions {
    int bsf_max_size = 4;                 // K
    std::optional<int> lasso_max_trees;   // LASSO_K cardinality cap
    std::uint64_t seed = 0;               // CV fold assignment
    int threads = 0;
    NnLassoOptions lasso;
    int lasso_folds = 10;
    int lasso_grid_count = 100;
    double lasso_min_ratio = 1e-4;  // pruning paths descend further than the
                                    // generic lambda_grid default
};

// Sequential forward selection (greedy additions over all B iterations,
// candidate ties to the lowest tree index); returns the prefix with minimum
// validation MSPE, earliest iteration on trace ties.
PruneResult prune_sfs(const PredictionMatrix& P, const Eigen::VectorXd& y);

// Modified sequential backward selection: iteratively deletes the tree whose
// removal changes the current MSPE least (|MSPE difference|, ties to the
// lowest index), tracing from the full forest (iteration 0) down to one
// tree; returns the survivors at the first trace minimum.
PruneResult prune_sbs_prime(const PredictionMatrix& P, const Eigen::VectorXd& y);

// Exhaustive search over all uniform-weight subsets of size 1..K, requiring
// K <= B/2; ties resolve to the lexicographically smallest index set.
PruneResult prune_bsf(const PredictionMatrix& P, const Eigen::VectorXd& y, int K,
                      int threads = 0);

// Non-negative Lasso pruning: 10-fold CV selects lambda; when the solution
// carries more than max_trees nonzero coefficients, the largest max_trees
// survive, the rest are constrained to zero and CV is re-run once on the
// restricted design. An all-zero solution falls back to the best single
// tree with a non-negative least-squares weight, flagged on the result.
PruneResult prune_lasso(const PredictionMatrix& P, const Eigen::VectorXd& y,
                        const PruneOptions& options = {});

/// Ghost-tree check: replacing column j by the mean of the others yields
/// the same full-forest MSPE as simply excluding tree j.
struct GhostCheck {
    double ghost_mspe = 0.0;
    double sbs_mspe = 0.0;
};
GhostCheck ghost_equivalence_check(const PredictionMatrix& P, const Eigen::VectorXd& y, int j);

}  // namespace forestprune
