#include "forestprune/experiment.hpp"

#include "forestprune/errors.hpp"
#include "forestprune/forest.hpp"
#include "forestprune/nnlasso.hpp"
#include "forestprune/parallel.hpp"
#include "forestprune/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace forestprune {

void ExperimentConfig::validate() const {
    if (scenario.has_value() == csv.has_value()) {
        throw ConfigError("experiment config needs exactly one of 'scenario' or 'csv'");
    }
    if (scenario) scenario->validate();
    if (B < 1) throw ConfigError("experiment B must be >= 1");
    if (reps < 1) throw ConfigError("experiment reps must be >= 1");
    if (methods.empty()) throw ConfigError("experiment methods must be non-empty");
    if (K < 1) throw ConfigError("experiment K must be >= 1");
    if (max_trees < 1) throw ConfigError("experiment max_trees must be >= 1");
    cart.validate();
}

namespace {

Eigen::VectorXd gather(const Eigen::VectorXd& source, const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = source(rows[i]);
    }
    return out;
}

PruneResult run_method(PruneMethod method, const PredictionMatrix& P, const Eigen::VectorXd& y,
                       const ExperimentConfig& config, std::uint64_t seed) {
    switch (method) {
        case PruneMethod::SFS: return prune_sfs(P, y);
        case PruneMethod::SBS_PRIME: return prune_sbs_prime(P, y);
        case PruneMethod::BSF: {
            const int K = std::max(1, std::min(config.K, P.values.cols() > 1
                                                             ? static_cast<int>(P.values.cols()) / 2
                                                             : 1));
            return prune_bsf(P, y, K, 1);
        }
        case PruneMethod::LASSO: {
            PruneOptions options;
            options.seed = seed;
            options.threads = 1;
            return prune_lasso(P, y, options);
        }
        case PruneMethod::LASSO_K: {
            PruneOptions options;
            options.lasso_max_trees = config.max_trees;
            options.seed = seed;
            options.threads = 1;
            return prune_lasso(P, y, options);
        }
    }
    throw ConfigError("unknown pruning method");
}

RunRecord run_single_rep(const ExperimentConfig& config, const Dataset& data, int rep) {
    const std::uint64_t rep_seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(rep));
    const SplitIndices parts = split(data, config.ratios, derive_seed(rep_seed, 0));

    const Eigen::VectorXd y_val = gather(data.response, parts.validation);
    const Eigen::VectorXd y_test = gather(data.response, parts.test);

    ForestFitOptions fit_options;
    fit_options.subspace_rate = config.subspace_rate;
    fit_options.threads = 1;  // reps already run in parallel
    Forest forest =
        fit_forest(data, parts.train, config.B, config.cart, fit_options, derive_seed(rep_seed, 1));
    const PredictionMatrix P_val = prediction_matrix(forest, data, parts.validation, 1);

    struct PrunedSelection {
        MethodRunResult result;
        PruneResult pruned;
    };
    std::vector<PrunedSelection> selections;
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
        PrunedSelection sel;
        sel.result.method = config.methods[m];
        const auto start = std::chrono::steady_clock::now();
        try {
            sel.pruned = run_method(config.methods[m], P_val, y_val, config,
                                    derive_seed(rep_seed, 100 + m));
            sel.result.n_trees = static_cast<int>(sel.pruned.selected.size());
        } catch (const std::exception& e) {
            sel.result.failed = true;
            sel.result.error = e.what();
            sel.result.test_mspe = std::numeric_limits<double>::quiet_NaN();
        }
        sel.result.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        selections.push_back(std::move(sel));
    }

    // Re-train on the full 80% (train + validation), same seeds and masks.
    std::vector<Eigen::Index> train_plus_val = parts.train;
    train_plus_val.insert(train_plus_val.end(), parts.validation.begin(), parts.validation.end());
    std::sort(train_plus_val.begin(), train_plus_val.end());
    refit_forest(forest, data, train_plus_val, 1);

    const PredictionMatrix P_test = prediction_matrix(forest, data, parts.test, 1);
    const PredictionMatrix P_val_retrained = prediction_matrix(forest, data, parts.validation, 1);

    RunRecord record;
    record.rep = rep;
    record.full_forest_trees = config.B;
    {
        std::vector<int> all(static_cast<std::size_t>(config.B));
        for (int i = 0; i < config.B; ++i) all[static_cast<std::size_t>(i)] = i;
        record.full_forest_test_mspe = mspe(uniform_column_mean(P_test.values, all), y_test);
    }

    for (auto& sel : selections) {
        if (sel.result.failed) {
            record.methods.push_back(std::move(sel.result));
            continue;
        }
        PruneResult scored = sel.pruned;
        const bool lasso_like =
            scored.method == PruneMethod::LASSO || scored.method == PruneMethod::LASSO_K;
        if (lasso_like) {
            // Frozen support, weights refit on the retrained trees'
            // validation predictions (non-negative least squares).
            Eigen::MatrixXd design(P_val_retrained.values.rows(),
                                   static_cast<Eigen::Index>(scored.selected.size()));
            for (std::size_t k = 0; k < scored.selected.size(); ++k) {
                design.col(static_cast<Eigen::Index>(k)) =
                    P_val_retrained.values.col(scored.selected[k]);
            }
            NnLassoOptions nnls;
            nnls.tol = 1e-9;
            const NnLassoFit refit = fit_nnlasso(design, y_val, 0.0, &scored.weights, nnls);
            scored.weights = refit.coefficients;
            for (Eigen::Index k = 0; k < scored.weights.size(); ++k) {
                if (scored.weights(k) == 0.0) sel.result.support_shrunk = true;
            }
        }
        sel.result.test_mspe = mspe(scored.predict(P_test.values), y_test);
        record.methods.push_back(std::move(sel.result));
    }
    return record;
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& config) {
    config.validate();

    Dataset data;
    if (config.csv) {
        data = load_csv(config.csv->path, config.csv->response_column, config.csv->options);
    }

    std::vector<RunRecord> records(static_cast<std::size_t>(config.reps));
    parallel_for(static_cast<std::size_t>(config.reps), config.threads, [&](std::size_t rep) {
        if (config.scenario) {
            // Fresh draw per rep, like the repeated random partitioning: the
            // rep seed drives both the data and the split.
            ScenarioConfig scenario = *config.scenario;
            scenario.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(rep) + 7919);
            const Dataset rep_data = generate_scenario(scenario);
            records[rep] = run_single_rep(config, rep_data, static_cast<int>(rep));
        } else {
            records[rep] = run_single_rep(config, data, static_cast<int>(rep));
        }
    });
    return records;
}

namespace {

std::vector<double> method_mspe_series(const std::vector<RunRecord>& records, PruneMethod method) {
    std::vector<double> out;
    for (const auto& record : records) {
        for (const auto& m : record.methods) {
            if (m.method == method && !m.failed) out.push_back(m.test_mspe);
        }
    }
    return out;
}

std::vector<double> method_tree_series(const std::vector<RunRecord>& records, PruneMethod method) {
    std::vector<double> out;
    for (const auto& record : records) {
        for (const auto& m : record.methods) {
            if (m.method == method && !m.failed) out.push_back(static_cast<double>(m.n_trees));
        }
    }
    return out;
}

}  // namespace

std::vector<ComparisonReport> summarize(const std::vector<RunRecord>& records,
                                        const std::vector<PruneMethod>& methods,
                                        std::optional<PruneMethod> baseline) {
    if (records.empty()) throw ConfigError("summarize requires at least one record");

    std::vector<double> base_mspe;
    std::vector<double> base_trees;
    std::string base_name;
    if (baseline) {
        base_mspe = method_mspe_series(records, *baseline);
        base_trees = method_tree_series(records, *baseline);
        base_name = to_string(*baseline);
    } else {
        for (const auto& record : records) {
            base_mspe.push_back(record.full_forest_test_mspe);
            base_trees.push_back(static_cast<double>(record.full_forest_trees));
        }
        base_name = "FULL";
    }

    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };

    std::vector<ComparisonReport> reports;
    for (PruneMethod method : methods) {
        if (baseline && method == *baseline) continue;
        const std::vector<double> m_mspe = method_mspe_series(records, method);
        const std::vector<double> m_trees = method_tree_series(records, method);
        if (m_mspe.size() != base_mspe.size()) {
            throw ConfigError("summarize: method " + to_string(method) +
                              " has a different number of successful reps than the baseline");
        }
        const auto n = static_cast<Eigen::Index>(m_mspe.size());

        ComparisonReport report;
        report.method_a = to_string(method);
        report.method_b = base_name;
        report.mspe_delta_pct = 100.0 * (mean(m_mspe) / mean(base_mspe) - 1.0);

        const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(m_mspe.data(), n);
        const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(base_mspe.data(), n);
        report.p_value = wilcoxon_signed_rank(a, b).p_value;
        int wins = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (a(i) <= b(i)) ++wins;
        }
        report.freq_delta_leq_0 = static_cast<double>(wins) / static_cast<double>(n);

        report.trees_delta_pct = 100.0 * (mean(m_trees) / mean(base_trees) - 1.0);
        const Eigen::VectorXd ta = Eigen::Map<const Eigen::VectorXd>(m_trees.data(), n);
        const Eigen::VectorXd tb = Eigen::Map<const Eigen::VectorXd>(base_trees.data(), n);
        report.trees_p_value = wilcoxon_signed_rank(ta, tb).p_value;
        reports.push_back(report);
    }
    return reports;
}

}  // namespace forestprune
