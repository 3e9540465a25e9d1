#include "forestprune/nnlasso.hpp"

#include "forestprune/errors.hpp"
#include "forestprune/parallel.hpp"
#include "forestprune/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace forestprune {

namespace {

// Coordinate descent state over the Gram form: G = X'X, c = X'y, yty = y'y.
// All sweep work is O(B^2) regardless of n, which keeps cross-validated
// paths cheap on large validation sets.
struct GramProblem {
    Eigen::MatrixXd G;
    Eigen::VectorXd c;
    double yty = 0.0;
    Eigen::Index n = 0;

    static GramProblem from_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
        GramProblem p;
        p.G.noalias() = X.transpose() * X;
        p.c.noalias() = X.transpose() * y;
        p.yty = y.squaredNorm();
        p.n = X.rows();
        return p;
    }

    double objective(const Eigen::VectorXd& beta, const Eigen::VectorXd& q, double lambda) const {
        return yty - 2.0 * c.dot(beta) + beta.dot(q) + lambda * beta.sum();
    }
};

struct GramFitResult {
    Eigen::VectorXd beta;
    int sweeps = 0;
    bool converged = false;
    std::vector<double> sweep_objectives;
};

GramFitResult fit_gram(const GramProblem& p, double lambda, Eigen::VectorXd beta,
                       const NnLassoOptions& options, bool track_objective) {
    const Eigen::Index B = p.G.rows();
    if (beta.size() != B) beta = Eigen::VectorXd::Zero(B);
    for (Eigen::Index j = 0; j < B; ++j) {
        if (!(p.G(j, j) > 0.0)) beta(j) = 0.0;  // zero-norm columns stay at 0
    }
    Eigen::VectorXd q;
    q.noalias() = p.G * beta;
    const double half_lambda = lambda / 2.0;

    GramFitResult result;
    for (int sweep = 0; sweep < options.max_iter; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < B; ++j) {
            const double gjj = p.G(j, j);
            if (!(gjj > 0.0)) continue;
            // x_j'r_{-j} = c_j - q_j + G_jj * beta_j with r = y - X*beta
            const double numerator = p.c(j) - q(j) + gjj * beta(j) - half_lambda;
            const double updated = std::max(0.0, numerator / gjj);
            const double change = updated - beta(j);
            if (change != 0.0) {
                q.noalias() += change * p.G.col(j);
                beta(j) = updated;
                max_change = std::max(max_change, std::abs(change));
            }
        }
        ++result.sweeps;
        q.noalias() = p.G * beta;  // refresh: incremental updates drift
        if (track_objective) {
            result.sweep_objectives.push_back(p.objective(beta, q, lambda));
        }
        if (max_change < options.tol) {
            result.converged = true;
            break;
        }
    }
    result.beta = std::move(beta);
    return result;
}

struct ColumnScaling {
    Eigen::VectorXd scale;  // unit-RMS divisors, 1 for degenerate columns

    static ColumnScaling identity(Eigen::Index B) {
        return {Eigen::VectorXd::Ones(B)};
    }

    static ColumnScaling from_gram(const GramProblem& p) {
        ColumnScaling s;
        s.scale.resize(p.G.rows());
        for (Eigen::Index j = 0; j < p.G.rows(); ++j) {
            const double rms = std::sqrt(p.G(j, j) / static_cast<double>(p.n));
            s.scale(j) = rms > 0.0 ? rms : 1.0;
        }
        return s;
    }

    GramProblem apply(const GramProblem& p) const {
        GramProblem out = p;
        for (Eigen::Index j = 0; j < out.G.rows(); ++j) {
            out.c(j) /= scale(j);
            for (Eigen::Index k = 0; k < out.G.cols(); ++k) {
                out.G(j, k) /= scale(j) * scale(k);
            }
        }
        return out;
    }
};

}  // namespace

NnLassoFit fit_nnlasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                       const Eigen::VectorXd* init, const NnLassoOptions& options) {
    if (X.rows() != y.size()) throw ConfigError("nnlasso design and response row counts differ");
    if (X.rows() < 1) throw ConfigError("nnlasso requires at least one row");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("nnlasso lambda must be >= 0");
    if (!X.allFinite()) throw ConfigError("nnlasso design contains non-finite values");

    GramProblem problem = GramProblem::from_data(X, y);
    ColumnScaling scaling =
        options.standardize ? ColumnScaling::from_gram(problem) : ColumnScaling::identity(X.cols());
    if (options.standardize) problem = scaling.apply(problem);

    Eigen::VectorXd start;
    if (init) {
        start = init->cwiseProduct(scaling.scale);
    }
    GramFitResult raw = fit_gram(problem, lambda, start, options, /*track_objective=*/true);

    NnLassoFit fit;
    fit.coefficients = raw.beta.cwiseQuotient(scaling.scale);
    fit.lambda = lambda;
    fit.iterations = raw.sweeps;
    fit.converged = raw.converged;
    fit.sweep_objectives = std::move(raw.sweep_objectives);
    fit.objective = (y - X * fit.coefficients).squaredNorm() + lambda * fit.coefficients.sum();
    return fit;
}

std::vector<double> lambda_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int count,
                                double min_ratio, bool* degenerate) {
    if (count < 1) throw ConfigError("lambda_grid count must be >= 1");
    if (!(min_ratio > 0.0 && min_ratio <= 1.0)) throw ConfigError("lambda_grid min_ratio must lie in (0, 1]");
    if (degenerate) *degenerate = false;

    double max_corr = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        max_corr = std::max(max_corr, X.col(j).dot(y));
    }
    double lambda_max = 2.0 * max_corr;
    if (!(lambda_max > 0.0)) {
        lambda_max = 1.0;  // all-zero solution everywhere
        if (degenerate) *degenerate = true;
    }

    if (count == 1 || min_ratio == 1.0) return {lambda_max};
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double log_max = std::log(lambda_max);
    const double log_min = std::log(min_ratio * lambda_max);
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        grid[static_cast<std::size_t>(i)] = std::exp(log_max + t * (log_min - log_max));
    }
    grid.front() = lambda_max;
    return grid;
}

CvSelection cv_select_lambda(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int folds,
                             std::uint64_t seed, const NnLassoOptions& options, int grid_count,
                             double min_ratio, bool one_se) {
    const Eigen::Index n = X.rows();
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (n < folds) throw ConfigError("cross-validation fold would have zero rows: n=" +
                                     std::to_string(n) + ", folds=" + std::to_string(folds));

    const std::vector<double> lambdas = lambda_grid(X, y, grid_count, min_ratio);
    const std::size_t L = lambdas.size();

    // Deterministic fold assignment: shuffled row order dealt into contiguous
    // blocks, the first n % folds blocks one row larger.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<std::vector<Eigen::Index>> fold_rows(static_cast<std::size_t>(folds));
    {
        const Eigen::Index base = n / folds;
        const Eigen::Index extra = n % folds;
        Eigen::Index offset = 0;
        for (int f = 0; f < folds; ++f) {
            const Eigen::Index size = base + (f < extra ? 1 : 0);
            fold_rows[static_cast<std::size_t>(f)]
                .assign(order.begin() + offset, order.begin() + offset + size);
            offset += size;
        }
    }

    const GramProblem full = GramProblem::from_data(X, y);

    std::vector<std::vector<double>> fold_mse(static_cast<std::size_t>(folds),
                                              std::vector<double>(L, 0.0));
    parallel_for(static_cast<std::size_t>(folds), 0, [&](std::size_t f) {
        const auto& held_out = fold_rows[f];
        Eigen::MatrixXd X_ho(static_cast<Eigen::Index>(held_out.size()), X.cols());
        Eigen::VectorXd y_ho(static_cast<Eigen::Index>(held_out.size()));
        for (std::size_t i = 0; i < held_out.size(); ++i) {
            X_ho.row(static_cast<Eigen::Index>(i)) = X.row(held_out[i]);
            y_ho(static_cast<Eigen::Index>(i)) = y(held_out[i]);
        }
        const GramProblem ho = GramProblem::from_data(X_ho, y_ho);
        GramProblem train;
        train.G = full.G - ho.G;
        train.c = full.c - ho.c;
        train.yty = full.yty - ho.yty;
        train.n = full.n - ho.n;

        Eigen::VectorXd warm = Eigen::VectorXd::Zero(X.cols());
        for (std::size_t l = 0; l < L; ++l) {
            GramFitResult r = fit_gram(train, lambdas[l], warm, options, false);
            warm = r.beta;
            Eigen::VectorXd q_ho;
            q_ho.noalias() = ho.G * r.beta;
            const double sse = std::max(0.0, ho.objective(r.beta, q_ho, 0.0));
            fold_mse[f][l] = sse / static_cast<double>(ho.n);
        }
    });

    CvSelection out;
    out.path.lambdas = lambdas;
    out.path.cv_mean.resize(L);
    out.path.cv_se.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        double mean = 0.0;
        for (int f = 0; f < folds; ++f) mean += fold_mse[static_cast<std::size_t>(f)][l];
        mean /= static_cast<double>(folds);
        double var = 0.0;
        for (int f = 0; f < folds; ++f) {
            const double d = fold_mse[static_cast<std::size_t>(f)][l] - mean;
            var += d * d;
        }
        var /= static_cast<double>(folds - 1);
        out.path.cv_mean[l] = mean;
        out.path.cv_se[l] = std::sqrt(var / static_cast<double>(folds));
    }

    std::size_t best = 0;
    for (std::size_t l = 1; l < L; ++l) {
        if (out.path.cv_mean[l] < out.path.cv_mean[best]) best = l;
    }
    if (one_se) {
        const double limit = out.path.cv_mean[best] + out.path.cv_se[best];
        for (std::size_t l = 0; l < L; ++l) {
            if (out.path.cv_mean[l] <= limit) {
                best = l;  // first (largest) lambda within one SE
                break;
            }
        }
    }

    // Full-data path with warm starts; these are the fits callers consume.
    out.path.fits.reserve(L);
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(X.cols());
    for (std::size_t l = 0; l < L; ++l) {
        NnLassoFit fit = fit_nnlasso(X, y, lambdas[l], &warm, options);
        warm = fit.coefficients;
        out.path.fits.push_back(std::move(fit));
    }

    out.selected_index = static_cast<int>(best);
    out.lambda = lambdas[best];
    return out;
}

double nnlasso_kkt_violation(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& beta, double lambda) {
    const Eigen::VectorXd residual = X * beta - y;
    double max_gjj = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        max_gjj = std::max(max_gjj, X.col(j).squaredNorm());
    }
    const double scale = static_cast<double>(X.cols()) * std::max(1.0, max_gjj);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (!(X.col(j).squaredNorm() > 0.0)) continue;
        const double gradient = 2.0 * X.col(j).dot(residual) + lambda;
        const double violation = beta(j) > 0.0 ? std::abs(gradient) : std::max(0.0, -gradient);
        worst = std::max(worst, violation);
    }
    return worst / scale;
}

}  // namespace forestprune
