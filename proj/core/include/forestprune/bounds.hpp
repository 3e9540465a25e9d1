#pragma once

#include "forestprune/dataset.hpp"
#include "forestprune/pruning.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace forestprune {

/// Everything the closed-form slack calculators may need. M is the label
/// range sup(Y) - inf(Y); r = sup(|inf(Y)|, sup(Y)); lambda_budget is the
/// l1 coefficient budget of the Lasso class.
struct BoundInputs {
    Eigen::Index n = 0;          // validation sample count
    int B = 0;                   // forest size
    double delta = 0.05;
    double M = 1.0;
    double r = 1.0;
    double lambda_budget = 1.0;  // Lambda
    int K = 4;                   // BSF cap
};

/// Slack of the Lasso-class bound:
/// M^2 sqrt(log(1/delta) / 2n) + 4 r Lambda M sqrt(2 log(2B) / n).
double lasso_generalization_bound(const BoundInputs& inputs);

/// Slack of the size-capped subset bound (requires K <= B/2):
/// M^2 sqrt((K log B + log(1/(delta (K-1)!))) / 2n), factorial in log space.
double bsf_bound(const BoundInputs& inputs);

/// Slack of the sequential-selection bound (requires even B):
/// M^2 sqrt((B/2 log B + log(1/(delta (B/2-1)!)) + log 2) / 2n).
double sfs_bound(const BoundInputs& inputs);

/// Finite-class slack as printed: M sqrt((|H| + log(1/delta)) / 2n).
double finite_class_bound(std::int64_t cardinality, Eigen::Index n, double delta, double M);

/// Expected out-of-sample risk bound of the l1-constrained non-negative
/// least-squares predictor:
/// 2 tau M sigma sqrt(2 log(2B)/n) + 8 tau^2 M^2 sqrt(2 log(2B^2)/n).
double lasso_risk_bound(double tau, double M, double sigma, int B, Eigen::Index n);

struct BoundReport {
    PruneMethod method = PruneMethod::LASSO;
    int rep = 0;
    double bound_value = 0.0;          // slack term
    double empirical_risk = 0.0;       // validation MSPE of the pruned predictor
    double true_risk_estimate = 0.0;   // test MSPE
    bool breach = false;               // true risk exceeds empirical risk + slack
    double utilization = 0.0;          // true risk / (empirical risk + slack)
    double risk_delta = 0.0;           // (test - validation) / validation
    std::string m_provenance = "estimated";  // "user" when M was supplied
};

struct BoundSimulationConfig {
    ScenarioConfig scenario;
    std::vector<PruneMethod> methods{PruneMethod::LASSO, PruneMethod::BSF, PruneMethod::SFS};
    int reps = 30;
    std::array<double, 3> ratios{0.3, 0.35, 0.35};
    int K = 4;
    CartParams cart;
    double subspace_rate = 0.8;
    int threads = 0;
    std::optional<double> M;  // label range override; estimated from the
                              // observed response range when absent
};

// Per rep: train a forest on the train split, prune on validation, measure
// empirical risk there and the true-risk estimate on test, then evaluate the
// matching closed-form bound (Lambda for the Lasso bound is the fitted l1
// norm). Reps run in parallel on rep-derived seeds.
std::vector<BoundReport> simulate_bounds(const BoundSimulationConfig& config);

struct BoundSummaryRow {
    PruneMethod method;
    double breach_pct = 0.0;
    double use_pct_mean = 0.0;
    std::optional<double> use_pct_sd;      // absent for a single rep
    double risk_delta_pct_mean = 0.0;
    std::optional<double> risk_delta_pct_sd;
};

/// Aggregates per-rep reports into the breach / use % / risk-delta % table.
std::vector<BoundSummaryRow> aggregate_bound_reports(const std::vector<BoundReport>& reports);

}  // namespace forestprune
