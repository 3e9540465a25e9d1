#include "forestprune/analysis.hpp"

#include "forestprune/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace forestprune {

double mspe(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truth) {
    if (predictions.size() != truth.size()) {
        throw ConfigError("mspe length mismatch: " + std::to_string(predictions.size()) + " vs " +
                          std::to_string(truth.size()));
    }
    if (predictions.size() < 1) throw ConfigError("mspe needs at least one observation");
    double sse = 0.0;
    for (Eigen::Index i = 0; i < predictions.size(); ++i) {
        const double d = predictions(i) - truth(i);
        sse += d * d;
    }
    return sse / static_cast<double>(predictions.size());
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                    int exact_threshold) {
    if (a.size() != b.size()) throw ConfigError("wilcoxon requires equal-length samples");
    if (a.size() < 1) throw ConfigError("wilcoxon requires at least one pair");

    std::vector<double> diffs;
    diffs.reserve(static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double d = a(i) - b(i);
        if (d != 0.0) diffs.push_back(d);
    }

    WilcoxonResult result;
    result.n_effective = static_cast<Eigen::Index>(diffs.size());
    if (diffs.empty()) {
        result.all_zero = true;
        result.p_value = 1.0;
        return result;
    }

    const std::size_t n = diffs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        return std::abs(diffs[lhs]) < std::abs(diffs[rhs]);
    });

    // Average ranks over tied |d| groups, doubled so they stay integers.
    std::vector<long long> rank2(n, 0);
    std::vector<long long> tie_sizes;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        const long long first = static_cast<long long>(i) + 1;
        const long long last = static_cast<long long>(j);
        const long long doubled_avg = first + last;  // 2 * (first + last) / 2
        for (std::size_t k = i; k < j; ++k) rank2[order[k]] = doubled_avg;
        tie_sizes.push_back(last - first + 1);
        i = j;
    }

    long long w2 = 0;
    long long total2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total2 += rank2[i];
        if (diffs[i] > 0.0) w2 += rank2[i];
    }
    result.statistic = static_cast<double>(w2) / 2.0;

    if (n <= static_cast<std::size_t>(std::max(exact_threshold, 0)) && n <= 20) {
        result.exact = true;
        const long long mean2 = total2 / 2;  // total2 = 2 * n(n+1)/2 is even
        const long long dev = std::llabs(w2 - mean2);
        const std::size_t patterns = std::size_t{1} << n;
        std::size_t tail = 0;
        for (std::size_t mask = 0; mask < patterns; ++mask) {
            long long w = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (std::size_t{1} << i)) w += rank2[i];
            }
            if (w <= mean2 - dev || w >= mean2 + dev) ++tail;
        }
        result.p_value = std::min(1.0, static_cast<double>(tail) / static_cast<double>(patterns));
        return result;
    }

    const double nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    double tie_term = 0.0;
    for (long long t : tie_sizes) {
        const double td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    const double variance = (nd * (nd + 1.0) * (2.0 * nd + 1.0) - tie_term / 2.0) / 24.0;
    const double w = static_cast<double>(w2) / 2.0;
    double deviation = std::abs(w - mean);
    deviation = std::max(0.0, deviation - 0.5);  // continuity correction
    const double z = variance > 0.0 ? deviation / std::sqrt(variance) : 0.0;
    result.p_value = std::min(1.0, 2.0 * normal_cdf(-z));
    return result;
}

CorrelationDistance correlation_distance(const PredictionMatrix& P) {
    const Eigen::Index B = P.values.cols();
    if (B < 1) throw ConfigError("correlation_distance needs at least one column");

    Eigen::MatrixXd centered = P.values;
    for (Eigen::Index j = 0; j < B; ++j) {
        centered.col(j).array() -= centered.col(j).mean();
    }
    const Eigen::MatrixXd S = centered.transpose() * centered;

    CorrelationDistance out;
    out.D = Eigen::MatrixXd::Zero(B, B);
    std::vector<bool> constant(static_cast<std::size_t>(B), false);
    for (Eigen::Index j = 0; j < B; ++j) {
        if (!(S(j, j) > 0.0)) {
            constant[static_cast<std::size_t>(j)] = true;
            out.constant_columns.push_back(static_cast<int>(j));
        }
    }
    for (Eigen::Index i = 0; i < B; ++i) {
        for (Eigen::Index j = i + 1; j < B; ++j) {
            double corr = 0.0;  // convention for degenerate columns
            if (!constant[static_cast<std::size_t>(i)] && !constant[static_cast<std::size_t>(j)]) {
                corr = S(i, j) / std::sqrt(S(i, i) * S(j, j));
                corr = std::clamp(corr, -1.0, 1.0);
            }
            const double d = std::sqrt((1.0 - corr) / 2.0);
            out.D(i, j) = d;
            out.D(j, i) = d;
        }
    }
    return out;
}

MdsLayout classical_mds(const Eigen::MatrixXd& D, int dims) {
    const Eigen::Index B = D.rows();
    if (D.cols() != B) throw ConfigError("mds distance matrix must be square");
    if (dims < 1 || dims > B) throw ConfigError("mds dims must lie in [1, B]");
    const double scale = std::max(1.0, D.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < B; ++i) {
        if (std::abs(D(i, i)) > 1e-12 * scale) {
            throw ConfigError("mds distance matrix must have a zero diagonal");
        }
        for (Eigen::Index j = 0; j < B; ++j) {
            if (D(i, j) < 0.0) throw ConfigError("mds distances must be non-negative");
            if (std::abs(D(i, j) - D(j, i)) > 1e-12 * scale) {
                throw ConfigError("mds distance matrix must be symmetric");
            }
        }
    }

    // Torgerson double-centering of the squared distances.
    const Eigen::MatrixXd squared = D.cwiseProduct(D);
    const Eigen::VectorXd row_mean = squared.rowwise().mean();
    const double grand_mean = squared.mean();
    Eigen::MatrixXd gram(B, B);
    for (Eigen::Index i = 0; i < B; ++i) {
        for (Eigen::Index j = 0; j < B; ++j) {
            gram(i, j) = -0.5 * (squared(i, j) - row_mean(i) - row_mean(j) + grand_mean);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw ConfigError("mds eigendecomposition failed");

    MdsLayout layout;
    layout.coordinates = Eigen::MatrixXd::Zero(B, dims);
    layout.eigenvalues.resize(dims);
    for (int k = 0; k < dims; ++k) {
        const Eigen::Index idx = B - 1 - k;  // solver sorts ascending
        const double eigenvalue = solver.eigenvalues()(idx);
        layout.eigenvalues(k) = eigenvalue;
        if (eigenvalue > 0.0) {
            layout.coordinates.col(k) = solver.eigenvectors().col(idx) * std::sqrt(eigenvalue);
        } else if (eigenvalue < 0.0) {
            layout.clamped_negative = true;  // coordinates stay zero
        }
    }

    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < B; ++i) {
        for (Eigen::Index j = i + 1; j < B; ++j) {
            const double fitted = (layout.coordinates.row(i) - layout.coordinates.row(j)).norm();
            const double diff = D(i, j) - fitted;
            num += diff * diff;
            den += D(i, j) * D(i, j);
        }
    }
    layout.stress = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return layout;
}

}  // namespace forestprune
