#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace forestprune {

struct NnLassoOptions {
    double tol = 1e-7;          // max absolute coefficient change per sweep
    int max_iter = 10000;       // sweeps
    bool standardize = false;   // off by default: tree predictions are already
                                // on the response scale (unit-RMS column scaling
                                // when enabled; lambda then applies to the
                                // scaled problem)
};

/// Solution of min_{b >= 0} ||y - Xb||^2 + lambda * sum(b). The objective is
/// the un-normalized form; divide lambda by n to map from 1/n conventions.
struct NnLassoFit {
    Eigen::VectorXd coefficients;
    double lambda = 0.0;
    double objective = 0.0;  // recomputed from residuals at the returned point
    int iterations = 0;      // completed sweeps
    bool converged = false;
    std::vector<double> sweep_objectives;  // Gram-form objective after each sweep

    int nonzero_count() const {
        int count = 0;
        for (Eigen::Index j = 0; j < coefficients.size(); ++j) {
            if (coefficients(j) > 0.0) ++count;
        }
        return count;
    }
};

struct LambdaPath {
    std::vector<double> lambdas;  // strictly descending
    std::vector<NnLassoFit> fits; // full-data fits, aligned with lambdas
    std::vector<double> cv_mean;  // per-lambda held-out MSE (when cross-validated)
    std::vector<double> cv_se;
};

struct CvSelection {
    double lambda = 0.0;
    int selected_index = -1;  // into path.lambdas
    LambdaPath path;

    const NnLassoFit& selected_fit() const { return path.fits[static_cast<std::size_t>(selected_index)]; }
};

// Cyclic coordinate descent with the non-negative soft-threshold update
// b_j <- max(0, (x_j'r_{-j} - lambda/2) / (x_j'x_j)). Zero-norm columns stay
// fixed at 0. Converged when the largest coefficient change in a sweep drops
// below tol; otherwise returns with converged=false after max_iter sweeps.
NnLassoFit fit_nnlasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                       const Eigen::VectorXd* init = nullptr, const NnLassoOptions& options = {});

// lambda_max = 2 * max_j (x_j'y)^+, the smallest lambda with an all-zero
// solution, log-spaced down to min_ratio * lambda_max. If every x_j'y <= 0
// the grid degenerates to {1} (all-zero solution everywhere) and *degenerate
// is set when provided.
std::vector<double> lambda_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int count = 100,
                                double min_ratio = 1e-3, bool* degenerate = nullptr);

// Deterministic K-fold cross-validation along the lambda_grid path with warm
// starts; selects the lambda-min rule minimizer (ties resolve to the larger
// lambda) or the 1-SE lambda when one_se is set. The returned path holds
// full-data fits plus the CV curve.
CvSelection cv_select_lambda(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int folds = 10,
                             std::uint64_t seed = 0, const NnLassoOptions& options = {},
                             int grid_count = 100, double min_ratio = 1e-3, bool one_se = false);

// Largest KKT violation of the non-negative Lasso optimality conditions at
// beta, normalized by B * max(1, max_j x_j'x_j): for beta_j > 0 the
// stationarity residual |2 x_j'(Xb - y) + lambda|, for beta_j = 0 the
// negative part of 2 x_j'(Xb - y) + lambda. A converged fit satisfies
// violation <= 10 * tol.
double nnlasso_kkt_violation(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& beta, double lambda);

}  // namespace forestprune
