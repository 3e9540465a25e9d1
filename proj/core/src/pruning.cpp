#include "forestprune/pruning.hpp"

#include "forestprune/analysis.hpp"
#include "forestprune/errors.hpp"
#include "forestprune/parallel.hpp"
#include "forestprune/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace forestprune {

std::string to_string(PruneMethod method) {
    switch (method) {
        case PruneMethod::SFS: return "SFS";
        case PruneMethod::SBS_PRIME: return "SBS_PRIME";
        case PruneMethod::BSF: return "BSF";
        case PruneMethod::LASSO: return "LASSO";
        case PruneMethod::LASSO_K: return "LASSO_K";
    }
    return "UNKNOWN";
}

PruneMethod prune_method_from_string(const std::string& name) {
    std::string upper;
    for (char c : name) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (upper == "SFS") return PruneMethod::SFS;
    if (upper == "SBS_PRIME" || upper == "SBS'" || upper == "SBSP") return PruneMethod::SBS_PRIME;
    if (upper == "BSF") return PruneMethod::BSF;
    if (upper == "LASSO") return PruneMethod::LASSO;
    if (upper == "LASSO_K" || upper == "LASSO4") return PruneMethod::LASSO_K;
    throw ConfigError("unknown pruning method '" + name +
                      "' (valid: SFS, SBS_PRIME, BSF, LASSO, LASSO_K)");
}

Eigen::VectorXd PruneResult::predict(const Eigen::MatrixXd& values) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(values.rows());
    for (std::size_t k = 0; k < selected.size(); ++k) {
        out += weights(static_cast<Eigen::Index>(k)) * values.col(selected[k]);
    }
    return out;
}

namespace {

void check_inputs(const PredictionMatrix& P, const Eigen::VectorXd& y) {
    if (P.values.cols() < 1) throw ConfigError("prediction matrix has no columns");
    if (P.values.rows() != y.size()) {
        throw ConfigError("prediction matrix rows " + std::to_string(P.values.rows()) +
                          " do not match response length " + std::to_string(y.size()));
    }
    if (!P.values.allFinite()) throw ConfigError("prediction matrix has non-finite entries");
}

double canonical_subset_mspe(const Eigen::MatrixXd& values, std::vector<int> subset,
                             const Eigen::VectorXd& y) {
    std::sort(subset.begin(), subset.end());
    return mspe(uniform_column_mean(values, subset), y);
}

PruneResult uniform_result(PruneMethod method, std::vector<int> selected, double validation_mspe,
                           std::vector<double> trace) {
    std::sort(selected.begin(), selected.end());
    PruneResult result;
    result.method = method;
    result.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(selected.size()),
                                               1.0 / static_cast<double>(selected.size()));
    result.selected = std::move(selected);
    result.validation_mspe = validation_mspe;
    result.trace = std::move(trace);
    return result;
}

}  // namespace

PruneResult prune_sfs(const PredictionMatrix& P, const Eigen::VectorXd& y) {
    check_inputs(P, y);
    const Eigen::Index n = P.values.rows();
    const int B = static_cast<int>(P.values.cols());

    std::vector<char> in_subset(static_cast<std::size_t>(B), 0);
    std::vector<int> added_order;
    added_order.reserve(static_cast<std::size_t>(B));
    Eigen::VectorXd running_sum = Eigen::VectorXd::Zero(n);
    std::vector<double> trace(static_cast<std::size_t>(B));

    for (int iter = 0; iter < B; ++iter) {
        const double inv = 1.0 / static_cast<double>(iter + 1);
        int best_j = -1;
        double best_mspe = std::numeric_limits<double>::infinity();
        for (int j = 0; j < B; ++j) {
            if (in_subset[static_cast<std::size_t>(j)]) continue;
            double sse = 0.0;
            for (Eigen::Index r = 0; r < n; ++r) {
                const double d = y(r) - (running_sum(r) + P.values(r, j)) * inv;
                sse += d * d;
            }
            const double candidate = sse / static_cast<double>(n);
            if (candidate < best_mspe) {  // ascending scan: ties keep the lowest index
                best_mspe = candidate;
                best_j = j;
            }
        }
        in_subset[static_cast<std::size_t>(best_j)] = 1;
        added_order.push_back(best_j);
        running_sum += P.values.col(best_j);
        trace[static_cast<std::size_t>(iter)] =
            canonical_subset_mspe(P.values, added_order, y);
    }

    std::size_t best_iter = 0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i] < trace[best_iter]) best_iter = i;  // earliest minimum
    }
    std::vector<int> selected(added_order.begin(),
                              added_order.begin() + static_cast<std::ptrdiff_t>(best_iter + 1));
    return uniform_result(PruneMethod::SFS, std::move(selected), trace[best_iter], trace);
}

PruneResult prune_sbs_prime(const PredictionMatrix& P, const Eigen::VectorXd& y) {
    check_inputs(P, y);
    const Eigen::Index n = P.values.rows();
    const int B = static_cast<int>(P.values.cols());

    std::vector<int> current(static_cast<std::size_t>(B));
    std::iota(current.begin(), current.end(), 0);
    Eigen::VectorXd running_sum = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < B; ++j) running_sum += P.values.col(j);

    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(B));
    double current_mspe = canonical_subset_mspe(P.values, current, y);
    trace.push_back(current_mspe);  // iteration 0: the full forest

    std::vector<int> removed_order;
    removed_order.reserve(static_cast<std::size_t>(B - 1));

    while (current.size() > 1) {
        const double inv = 1.0 / static_cast<double>(current.size() - 1);
        int best_pos = -1;
        double best_diff = std::numeric_limits<double>::infinity();
        for (std::size_t pos = 0; pos < current.size(); ++pos) {
            const int j = current[pos];
            double sse = 0.0;
            for (Eigen::Index r = 0; r < n; ++r) {
                const double d = y(r) - (running_sum(r) - P.values(r, j)) * inv;
                sse += d * d;
            }
            const double diff = std::abs(current_mspe - sse / static_cast<double>(n));
            if (diff < best_diff) {  // ascending scan: ties remove the lowest index
                best_diff = diff;
                best_pos = static_cast<int>(pos);
            }
        }
        const int removed = current[static_cast<std::size_t>(best_pos)];
        removed_order.push_back(removed);
        running_sum -= P.values.col(removed);
        current.erase(current.begin() + best_pos);
        current_mspe = canonical_subset_mspe(P.values, current, y);
        trace.push_back(current_mspe);
    }

    std::size_t best_iter = 0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i] < trace[best_iter]) best_iter = i;  // earliest minimum
    }
    std::vector<int> selected(static_cast<std::size_t>(B));
    std::iota(selected.begin(), selected.end(), 0);
    for (std::size_t i = 0; i < best_iter; ++i) {
        selected.erase(std::find(selected.begin(), selected.end(), removed_order[i]));
    }
    return uniform_result(PruneMethod::SBS_PRIME, std::move(selected), trace[best_iter],
                          trace);
}

namespace {

struct BsfCandidate {
    double mspe = std::numeric_limits<double>::infinity();
    std::vector<int> subset;

    bool better_than(const BsfCandidate& other) const {
        if (subset.empty()) return false;
        if (other.subset.empty()) return true;
        if (mspe != other.mspe) return mspe < other.mspe;
        return std::lexicographical_compare(subset.begin(), subset.end(), other.subset.begin(),
                                            other.subset.end());
    }
};

// Enumerates completions of `chosen` (all starting at index `start`) up to
// size k, tracking sum_c = sum of c over chosen and sum_g = sum of G over
// chosen x chosen.
void bsf_enumerate(const Eigen::MatrixXd& G, const Eigen::VectorXd& c, double yty, Eigen::Index n,
                   int k, int start, std::vector<int>& chosen, double sum_c, double sum_g,
                   BsfCandidate& best) {
    const int B = static_cast<int>(c.size());
    if (static_cast<int>(chosen.size()) == k) {
        const double kd = static_cast<double>(k);
        const double sse = yty - 2.0 * sum_c / kd + sum_g / (kd * kd);
        const double value = sse / static_cast<double>(n);
        if (value < best.mspe ||
            (value == best.mspe &&
             (best.subset.empty() || std::lexicographical_compare(chosen.begin(), chosen.end(),
                                                                  best.subset.begin(),
                                                                  best.subset.end())))) {
            best.mspe = value;
            best.subset = chosen;
        }
        return;
    }
    const int remaining = k - static_cast<int>(chosen.size());
    for (int i = start; i <= B - remaining; ++i) {
        double cross = 0.0;
        for (int j : chosen) cross += G(j, i);
        chosen.push_back(i);
        bsf_enumerate(G, c, yty, n, k, i + 1, chosen, sum_c + c(i), sum_g + G(i, i) + 2.0 * cross,
                      best);
        chosen.pop_back();
    }
}

}  // namespace

PruneResult prune_bsf(const PredictionMatrix& P, const Eigen::VectorXd& y, int K, int threads) {
    check_inputs(P, y);
    const int B = static_cast<int>(P.values.cols());
    // K = 1 is always a legitimate search; beyond that the complexity bound
    // behind the method requires K <= B/2.
    if (K < 1 || (K > 1 && 2 * K > B)) {
        throw ConfigError("BSF requires 1 <= K <= B/2 (got K=" + std::to_string(K) +
                          ", B=" + std::to_string(B) + ")");
    }

    const Eigen::MatrixXd G = P.values.transpose() * P.values;
    const Eigen::VectorXd c = P.values.transpose() * y;
    const double yty = y.squaredNorm();
    const Eigen::Index n = P.values.rows();

    // Chunked over (size, first index); merged in task order so the result
    // never depends on the worker count.
    std::vector<std::pair<int, int>> tasks;
    for (int k = 1; k <= K; ++k) {
        for (int first = 0; first + k <= B; ++first) tasks.emplace_back(k, first);
    }
    std::vector<BsfCandidate> bests(tasks.size());
    parallel_for(tasks.size(), threads, [&](std::size_t t) {
        const auto [k, first] = tasks[t];
        std::vector<int> chosen{first};
        bsf_enumerate(G, c, yty, n, k, first + 1, chosen, c(first), G(first, first), bests[t]);
    });

    BsfCandidate best;
    for (const auto& candidate : bests) {
        if (candidate.better_than(best)) best = candidate;
    }

    const double validation_mspe = canonical_subset_mspe(P.values, best.subset, y);
    return uniform_result(PruneMethod::BSF, std::move(best.subset), validation_mspe, {});
}

namespace {

PruneResult lasso_single_tree_fallback(const PredictionMatrix& P, const Eigen::VectorXd& y,
                                       PruneMethod method) {
    const int B = static_cast<int>(P.values.cols());
    int best_j = 0;
    double best_mspe = std::numeric_limits<double>::infinity();
    for (int j = 0; j < B; ++j) {
        const double value = mspe(P.values.col(j), y);
        if (value < best_mspe) {
            best_mspe = value;
            best_j = j;
        }
    }
    const double norm2 = P.values.col(best_j).squaredNorm();
    const double w = norm2 > 0.0 ? std::max(0.0, P.values.col(best_j).dot(y) / norm2) : 0.0;

    PruneResult result;
    result.method = method;
    result.selected = {best_j};
    result.weights = Eigen::VectorXd::Constant(1, w);
    result.validation_mspe = mspe(result.predict(P.values), y);
    result.lasso_fallback = true;
    return result;
}

}  // namespace

PruneResult prune_lasso(const PredictionMatrix& P, const Eigen::VectorXd& y,
                        const PruneOptions& options) {
    check_inputs(P, y);
    const PruneMethod method =
        options.lasso_max_trees.has_value() ? PruneMethod::LASSO_K : PruneMethod::LASSO;
    if (options.lasso_max_trees && *options.lasso_max_trees < 1) {
        throw ConfigError("lasso max_trees must be >= 1");
    }

    CvSelection cv = cv_select_lambda(P.values, y, options.lasso_folds, options.seed, options.lasso,
                                      options.lasso_grid_count, options.lasso_min_ratio);
    const NnLassoFit* fit = &cv.selected_fit();
    if (fit->nonzero_count() == 0) return lasso_single_tree_fallback(P, y, method);

    std::vector<int> support;
    for (Eigen::Index j = 0; j < fit->coefficients.size(); ++j) {
        if (fit->coefficients(j) > 0.0) support.push_back(static_cast<int>(j));
    }

    double selected_lambda = cv.lambda;
    Eigen::VectorXd weights(static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) {
        weights(static_cast<Eigen::Index>(k)) = fit->coefficients(support[k]);
    }

    CvSelection cv_restricted;  // keeps restricted-fit storage alive
    if (options.lasso_max_trees && static_cast<int>(support.size()) > *options.lasso_max_trees) {
        // Keep the largest coefficients, zero the rest, redo CV once on the
        // restricted design.
        std::vector<int> by_size(support.size());
        std::iota(by_size.begin(), by_size.end(), 0);
        std::stable_sort(by_size.begin(), by_size.end(), [&](int a, int b) {
            return weights(a) > weights(b);
        });
        std::vector<int> kept;
        for (int i = 0; i < *options.lasso_max_trees; ++i) {
            kept.push_back(support[static_cast<std::size_t>(by_size[static_cast<std::size_t>(i)])]);
        }
        std::sort(kept.begin(), kept.end());

        Eigen::MatrixXd restricted(P.values.rows(), static_cast<Eigen::Index>(kept.size()));
        for (std::size_t k = 0; k < kept.size(); ++k) {
            restricted.col(static_cast<Eigen::Index>(k)) = P.values.col(kept[k]);
        }
        cv_restricted = cv_select_lambda(restricted, y, options.lasso_folds,
                                         derive_seed(options.seed, 1), options.lasso,
                                         options.lasso_grid_count, options.lasso_min_ratio);
        const NnLassoFit& refit = cv_restricted.selected_fit();
        if (refit.nonzero_count() == 0) return lasso_single_tree_fallback(P, y, method);

        support.clear();
        std::vector<double> kept_weights;
        for (Eigen::Index j = 0; j < refit.coefficients.size(); ++j) {
            if (refit.coefficients(j) > 0.0) {
                support.push_back(kept[static_cast<std::size_t>(j)]);
                kept_weights.push_back(refit.coefficients(j));
            }
        }
        weights = Eigen::Map<Eigen::VectorXd>(kept_weights.data(),
                                              static_cast<Eigen::Index>(kept_weights.size()));
        selected_lambda = cv_restricted.lambda;
    }

    PruneResult result;
    result.method = method;
    result.selected = std::move(support);
    result.weights = std::move(weights);
    result.validation_mspe = mspe(result.predict(P.values), y);
    result.lasso_lambda = selected_lambda;
    return result;
}

GhostCheck ghost_equivalence_check(const PredictionMatrix& P, const Eigen::VectorXd& y, int j) {
    check_inputs(P, y);
    const int B = static_cast<int>(P.values.cols());
    if (B < 2) throw ConfigError("ghost check needs at least two trees");
    if (j < 0 || j >= B) throw ConfigError("ghost check tree index out of range");

    std::vector<int> others;
    for (int i = 0; i < B; ++i) {
        if (i != j) others.push_back(i);
    }
    const Eigen::VectorXd ghost_column = uniform_column_mean(P.values, others);

    Eigen::VectorXd ghost_pred = Eigen::VectorXd::Zero(P.values.rows());
    const double inv_b = 1.0 / static_cast<double>(B);
    for (int i = 0; i < B; ++i) {
        if (i == j) {
            ghost_pred += inv_b * ghost_column;
        } else {
            ghost_pred += inv_b * P.values.col(i);
        }
    }

    GhostCheck check;
    check.ghost_mspe = mspe(ghost_pred, y);
    check.sbs_mspe = mspe(uniform_column_mean(P.values, others), y);
    return check;
}

}  // namespace forestprune
