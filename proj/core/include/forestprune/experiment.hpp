#pragma once

#include "forestprune/analysis.hpp"
#include "forestprune/bounds.hpp"
#include "forestprune/dataset.hpp"
#include "forestprune/pruning.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace forestprune {

struct CsvSource {
    std::string path;
    std::string response_column;
    CsvOptions options;
};

struct ExperimentConfig {
    std::optional<ScenarioConfig> scenario;  // exactly one source must be set
    std::optional<CsvSource> csv;
    int B = 25;
    std::vector<PruneMethod> methods{PruneMethod::SBS_PRIME, PruneMethod::SFS, PruneMethod::BSF,
                                     PruneMethod::LASSO_K, PruneMethod::LASSO};
    int K = 4;          // BSF subset cap
    int max_trees = 4;  // LASSO_K cardinality cap
    int reps = 1;
    std::array<double, 3> ratios{0.6, 0.2, 0.2};
    std::uint64_t master_seed = 123;
    CartParams cart;
    double subspace_rate = 0.8;
    int threads = 0;

    void validate() const;
};

struct MethodRunResult {
    PruneMethod method = PruneMethod::SFS;
    double test_mspe = 0.0;
    int n_trees = 0;
    double wall_seconds = 0.0;    // pruning time; hardware-bound, manifest only
    bool failed = false;          // method threw; rep is kept, result flagged
    std::string error;
    bool support_shrunk = false;  // a Lasso weight refit hit zero after retrain
};

struct RunRecord {
    int rep = 0;
    double full_forest_test_mspe = 0.0;
    int full_forest_trees = 0;  // B
    std::vector<MethodRunResult> methods;
};

// One rep: split 60/20/20 on a rep-derived seed, fit the forest on train,
// prune on the validation prediction matrix, retrain the forest on
// train+validation (same per-tree seeds and masks), then score the full
// forest and each selection on test. Combinatorial selections keep uniform
// weights; Lasso supports are frozen and their weights refit by non-negative
// least squares on the retrained trees' validation predictions.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config);

// Paired per-rep comparisons of each method against the baseline (the full
// forest when baseline is absent): mean-MSPE delta %, Wilcoxon p-value,
// frequency of delta <= 0, and the same for tree counts.
std::vector<ComparisonReport> summarize(const std::vector<RunRecord>& records,
                                        const std::vector<PruneMethod>& methods,
                                        std::optional<PruneMethod> baseline = std::nullopt);

/// Bonferroni-adjusted significance threshold for full-forest comparisons
/// (5% split across the five pruning methods).
inline constexpr double kBonferroniAlpha = 0.05 / 5.0;

}  // namespace forestprune
