#pragma once

#include "forestprune/forest.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace forestprune {

/// Mean squared prediction error, residual squares summed left to right.
double mspe(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truth);

struct WilcoxonResult {
    double statistic = 0.0;  // W+ = sum of ranks of positive differences
    double p_value = 1.0;    // two-sided
    Eigen::Index n_effective = 0;
    bool exact = false;      // enumeration path (n_effective <= 12)
    bool all_zero = false;   // every paired difference was exactly zero
};

// Two-sided Wilcoxon signed-rank test on paired samples. Exact-zero
// differences are dropped; tied absolute differences receive average ranks.
// The null distribution is enumerated exactly for n_effective <=
// exact_threshold (default 12) and approximated otherwise by a normal with
// continuity and tie corrections; pass 0 to force the approximation.
WilcoxonResult wilcoxon_signed_rank(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                    int exact_threshold = 12);

struct CorrelationDistance {
    Eigen::MatrixXd D;                  // B x B, symmetric, zero diagonal
    std::vector<int> constant_columns;  // columns whose correlation defaulted to 0
};

/// Pairwise Pearson correlations of prediction columns mapped through
/// sqrt((1 - c) / 2). Zero-variance columns take correlation 0 by convention
/// and are flagged.
CorrelationDistance correlation_distance(const PredictionMatrix& P);

struct MdsLayout {
    Eigen::MatrixXd coordinates;  // B x dims, column means 0
    Eigen::VectorXd eigenvalues;  // top-dims, descending
    double stress = 0.0;          // Kruskal stress-1
    bool clamped_negative = false;
};

// Classical (Torgerson) multidimensional scaling: double-center -D^2/2, take
// the top eigenpairs of the symmetric form, scale eigenvectors by
// sqrt(eigenvalue). Negative eigenvalues clamp to zero coordinates.
MdsLayout classical_mds(const Eigen::MatrixXd& D, int dims = 2);

/// Paired comparison of two methods across experiment repetitions.
struct ComparisonReport {
    std::string method_a;
    std::string method_b;
    double mspe_delta_pct = 0.0;      // mean MSPE of a vs b, percent
    double p_value = 1.0;             // Wilcoxon on paired per-rep MSPEs
    double freq_delta_leq_0 = 0.0;    // fraction of reps with MSPE_a <= MSPE_b
    double trees_delta_pct = 0.0;
    double trees_p_value = 1.0;
};

}  // namespace forestprune
