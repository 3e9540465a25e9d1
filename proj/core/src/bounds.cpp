#include "forestprune/bounds.hpp"

#include "forestprune/analysis.hpp"
#include "forestprune/errors.hpp"
#include "forestprune/parallel.hpp"
#include "forestprune/rng.hpp"

#include <algorithm>
#include <cmath>

namespace forestprune {

namespace {

void check_common(Eigen::Index n, double delta, double M) {
    if (n < 1) throw ConfigError("bound requires n >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("bound requires delta in (0, 1)");
    if (!(M > 0.0)) throw ConfigError("bound requires M > 0");
}

}  // namespace

double lasso_generalization_bound(const BoundInputs& inputs) {
    check_common(inputs.n, inputs.delta, inputs.M);
    if (inputs.B < 1) throw ConfigError("bound requires B >= 1");
    if (!(inputs.r > 0.0)) throw ConfigError("bound requires r > 0");
    if (!(inputs.lambda_budget > 0.0)) throw ConfigError("bound requires Lambda > 0");
    const double n = static_cast<double>(inputs.n);
    const double first = inputs.M * inputs.M * std::sqrt(std::log(1.0 / inputs.delta) / (2.0 * n));
    const double second = 4.0 * inputs.r * inputs.lambda_budget * inputs.M *
                          std::sqrt(2.0 * std::log(2.0 * static_cast<double>(inputs.B)) / n);
    return first + second;
}

double bsf_bound(const BoundInputs& inputs) {
    check_common(inputs.n, inputs.delta, inputs.M);
    if (inputs.K < 1 || 2 * inputs.K > inputs.B) {
        throw ConfigError("bsf bound requires 1 <= K <= B/2");
    }
    const double n = static_cast<double>(inputs.n);
    const double B = static_cast<double>(inputs.B);
    const double K = static_cast<double>(inputs.K);
    // log(1/(delta (K-1)!)) = -log(delta) - lgamma(K)
    const double numerator = K * std::log(B) - std::log(inputs.delta) - std::lgamma(K);
    return inputs.M * inputs.M * std::sqrt(numerator / (2.0 * n));
}

double sfs_bound(const BoundInputs& inputs) {
    check_common(inputs.n, inputs.delta, inputs.M);
    if (inputs.B < 2 || inputs.B % 2 != 0) {
        throw ConfigError("sfs bound requires even B >= 2; round B up to the next even "
                          "forest size to apply it");
    }
    const double n = static_cast<double>(inputs.n);
    const double B = static_cast<double>(inputs.B);
    const double half = B / 2.0;
    const double numerator =
        half * std::log(B) - std::log(inputs.delta) - std::lgamma(half) + std::log(2.0);
    return inputs.M * inputs.M * std::sqrt(numerator / (2.0 * n));
}

double finite_class_bound(std::int64_t cardinality, Eigen::Index n, double delta, double M) {
    check_common(n, delta, M);
    if (cardinality < 1) throw ConfigError("finite class bound requires |H| >= 1");
    const double numerator = static_cast<double>(cardinality) + std::log(1.0 / delta);
    return M * std::sqrt(numerator / (2.0 * static_cast<double>(n)));
}

double lasso_risk_bound(double tau, double M, double sigma, int B, Eigen::Index n) {
    if (!(tau > 0.0) || !(M > 0.0) || sigma < 0.0 || B < 1 || n < 1) {
        throw ConfigError("lasso risk bound requires tau, M > 0, sigma >= 0, B >= 1, n >= 1");
    }
    const double nd = static_cast<double>(n);
    const double Bd = static_cast<double>(B);
    const double first = 2.0 * tau * M * sigma * std::sqrt(2.0 * std::log(2.0 * Bd) / nd);
    const double second =
        8.0 * tau * tau * M * M * std::sqrt(2.0 * std::log(2.0 * Bd * Bd) / nd);
    return first + second;
}

std::vector<BoundReport> simulate_bounds(const BoundSimulationConfig& config) {
    if (config.reps < 1) throw ConfigError("simulate_bounds requires reps >= 1");
    if (config.methods.empty()) throw ConfigError("simulate_bounds requires at least one method");
    for (PruneMethod method : config.methods) {
        if (method != PruneMethod::LASSO && method != PruneMethod::BSF &&
            method != PruneMethod::SFS) {
            throw ConfigError("simulate_bounds supports LASSO, BSF and SFS (got " +
                              to_string(method) + ")");
        }
    }
    config.scenario.validate();

    const std::size_t reps = static_cast<std::size_t>(config.reps);
    std::vector<std::vector<BoundReport>> per_rep(reps);

    parallel_for(reps, config.threads, [&](std::size_t rep) {
        const std::uint64_t rep_seed = derive_seed(config.scenario.seed, rep);
        ScenarioConfig scenario = config.scenario;
        scenario.seed = rep_seed;
        const Dataset data = generate_scenario(scenario);
        const SplitIndices parts = split(data, config.ratios, derive_seed(rep_seed, 1));

        Eigen::VectorXd y_val(static_cast<Eigen::Index>(parts.validation.size()));
        for (std::size_t i = 0; i < parts.validation.size(); ++i) {
            y_val(static_cast<Eigen::Index>(i)) = data.response(parts.validation[i]);
        }
        Eigen::VectorXd y_test(static_cast<Eigen::Index>(parts.test.size()));
        for (std::size_t i = 0; i < parts.test.size(); ++i) {
            y_test(static_cast<Eigen::Index>(i)) = data.response(parts.test[i]);
        }

        ForestFitOptions fit_options;
        fit_options.subspace_rate = config.subspace_rate;
        fit_options.threads = 1;  // reps already run in parallel
        const Forest forest = fit_forest(data, parts.train, config.scenario.forest_size,
                                         config.cart, fit_options, derive_seed(rep_seed, 2));
        const PredictionMatrix P_val = prediction_matrix(forest, data, parts.validation, 1);
        const PredictionMatrix P_test = prediction_matrix(forest, data, parts.test, 1);

        double M = data.response.maxCoeff() - data.response.minCoeff();
        std::string provenance = "estimated";
        if (config.M) {
            M = *config.M;
            provenance = "user";
        }
        const double r = std::max(std::abs(data.response.minCoeff()),
                                  std::abs(data.response.maxCoeff()));

        BoundInputs inputs;
        inputs.n = y_val.size();
        inputs.B = forest.size();
        inputs.delta = 0.05;
        inputs.M = M;
        inputs.r = r;
        inputs.K = config.K;

        for (PruneMethod method : config.methods) {
            PruneResult pruned;
            double slack = 0.0;
            switch (method) {
                case PruneMethod::LASSO: {
                    PruneOptions options;
                    options.seed = derive_seed(rep_seed, 3);
                    options.threads = 1;
                    pruned = prune_lasso(P_val, y_val, options);
                    inputs.lambda_budget = std::max(pruned.weights.sum(), 1e-12);
                    slack = lasso_generalization_bound(inputs);
                    break;
                }
                case PruneMethod::BSF: {
                    pruned = prune_bsf(P_val, y_val, config.K, 1);
                    slack = bsf_bound(inputs);
                    break;
                }
                default: {
                    pruned = prune_sfs(P_val, y_val);
                    slack = sfs_bound(inputs);
                    break;
                }
            }

            BoundReport report;
            report.method = method;
            report.rep = static_cast<int>(rep);
            report.bound_value = slack;
            report.empirical_risk = pruned.validation_mspe;
            report.true_risk_estimate = mspe(pruned.predict(P_test.values), y_test);
            // Share of the certified risk budget the true risk consumes;
            // utilization > 1 is exactly a bound breach.
            report.utilization =
                report.true_risk_estimate / (report.empirical_risk + slack);
            report.breach = report.utilization > 1.0;
            report.risk_delta =
                (report.true_risk_estimate - report.empirical_risk) / report.empirical_risk;
            report.m_provenance = provenance;
            per_rep[rep].push_back(report);
        }
    });

    std::vector<BoundReport> out;
    for (const auto& reports : per_rep) {
        out.insert(out.end(), reports.begin(), reports.end());
    }
    return out;
}

std::vector<BoundSummaryRow> aggregate_bound_reports(const std::vector<BoundReport>& reports) {
    std::vector<PruneMethod> methods;
    for (const auto& report : reports) {
        if (std::find(methods.begin(), methods.end(), report.method) == methods.end()) {
            methods.push_back(report.method);
        }
    }

    std::vector<BoundSummaryRow> rows;
    for (PruneMethod method : methods) {
        std::vector<double> use;
        std::vector<double> risk_delta;
        int breaches = 0;
        for (const auto& report : reports) {
            if (report.method != method) continue;
            use.push_back(100.0 * report.utilization);
            risk_delta.push_back(100.0 * report.risk_delta);
            if (report.breach) ++breaches;
        }
        const auto count = static_cast<double>(use.size());
        auto mean = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        auto sd = [&](const std::vector<double>& v, double m) -> std::optional<double> {
            if (v.size() < 2) return std::nullopt;
            double s = 0.0;
            for (double x : v) s += (x - m) * (x - m);
            return std::sqrt(s / static_cast<double>(v.size() - 1));
        };

        BoundSummaryRow row;
        row.method = method;
        row.breach_pct = 100.0 * static_cast<double>(breaches) / count;
        row.use_pct_mean = mean(use);
        row.use_pct_sd = sd(use, row.use_pct_mean);
        row.risk_delta_pct_mean = mean(risk_delta);
        row.risk_delta_pct_sd = sd(risk_delta, row.risk_delta_pct_mean);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace forestprune
