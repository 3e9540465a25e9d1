#include <doctest.h>

#include "forestprune/analysis.hpp"
#include "forestprune/errors.hpp"
#include "forestprune/nnlasso.hpp"
#include "forestprune/pruning.hpp"
#include "forestprune/rng.hpp"

#include "oracles.hpp"

#include <numeric>

using namespace forestprune;

namespace {

PredictionMatrix make_matrix(const Eigen::MatrixXd& values) {
    PredictionMatrix P;
    P.values = values;
    P.row_indices.resize(static_cast<std::size_t>(values.rows()));
    std::iota(P.row_indices.begin(), P.row_indices.end(), Eigen::Index{0});
    return P;
}

PredictionMatrix random_instance(Rng& rng, Eigen::Index n, int B, Eigen::VectorXd& y) {
    Eigen::MatrixXd values(n, B);
    y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double signal = rng.next_gaussian();
        y(i) = signal + 0.3 * rng.next_gaussian();
        for (int j = 0; j < B; ++j) {
            values(i, j) = signal + 0.5 * rng.next_gaussian();
        }
    }
    return make_matrix(values);
}

}  // namespace

TEST_CASE("SFS forced and dominated cases") {
    Rng rng(1);
    Eigen::VectorXd y;
    const PredictionMatrix single = random_instance(rng, 20, 1, y);
    const PruneResult forced = prune_sfs(single, y);
    CHECK(forced.selected == std::vector<int>{0});
    CHECK(forced.weights(0) == 1.0);
    CHECK(forced.trace.size() == 1);

    // Column 0 is the response itself, column 1 noise: step-1 MSPE is zero
    // and the final selection is {0}.
    Eigen::MatrixXd values(30, 2);
    y.resize(30);
    for (Eigen::Index i = 0; i < 30; ++i) {
        y(i) = rng.next_gaussian();
        values(i, 0) = y(i);
        values(i, 1) = rng.next_gaussian();
    }
    const PruneResult perfect = prune_sfs(make_matrix(values), y);
    CHECK(perfect.selected == std::vector<int>{0});
    CHECK(perfect.trace[0] == 0.0);
    CHECK(perfect.validation_mspe == 0.0);
}

TEST_CASE("SFS trace ends exactly at the full-forest MSPE") {
    Rng rng(2);
    Eigen::VectorXd y;
    const PredictionMatrix P = random_instance(rng, 40, 7, y);
    const PruneResult result = prune_sfs(P, y);
    std::vector<int> all(7);
    std::iota(all.begin(), all.end(), 0);
    const double full = mspe(uniform_column_mean(P.values, all), y);
    CHECK(result.trace.back() == full);  // same summation order, exact
    CHECK(result.validation_mspe <= full);
}

TEST_CASE("SBS' forced, duplicate-column tie and full-forest first-minimum") {
    Rng rng(3);
    Eigen::VectorXd y;
    const PredictionMatrix single = random_instance(rng, 20, 1, y);
    CHECK(prune_sbs_prime(single, y).selected == std::vector<int>{0});

    Eigen::MatrixXd values(25, 2);
    y.resize(25);
    for (Eigen::Index i = 0; i < 25; ++i) {
        y(i) = rng.next_gaussian();
        values(i, 0) = rng.next_gaussian();
        values(i, 1) = values(i, 0);
    }
    const PruneResult result = prune_sbs_prime(make_matrix(values), y);
    // Identical columns: every trace point ties, the full forest wins by the
    // first-minimum rule.
    CHECK(result.selected == std::vector<int>{0, 1});
    REQUIRE(result.trace.size() == 2);
    CHECK(result.trace[0] == result.trace[1]);
}

TEST_CASE("SBS' validation MSPE never exceeds the full forest") {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd y;
        const PredictionMatrix P = random_instance(rng, 30, 6, y);
        const PruneResult result = prune_sbs_prime(P, y);
        CHECK(result.validation_mspe <= result.trace.front());  // trace[0] is the full forest
    }
}

TEST_CASE("BSF trivial reductions and the K guard") {
    Rng rng(5);
    Eigen::VectorXd y;
    const PredictionMatrix P = random_instance(rng, 30, 6, y);

    // K=1 reduces to the single most accurate tree.
    const PruneResult k1 = prune_bsf(P, y, 1);
    int best = 0;
    double best_mspe = mspe(P.values.col(0), y);
    for (int j = 1; j < 6; ++j) {
        const double m = mspe(P.values.col(j), y);
        if (m < best_mspe) {
            best_mspe = m;
            best = j;
        }
    }
    CHECK(k1.selected == std::vector<int>{best});

    CHECK_THROWS_AS(prune_bsf(P, y, 4), ConfigError);  // 2K > B
    CHECK_THROWS_AS(prune_bsf(P, y, 0), ConfigError);

    // Exact two-tree representation: y is the mean of columns 2 and 5.
    Eigen::MatrixXd values(20, 6);
    for (Eigen::Index i = 0; i < 20; ++i) {
        for (int j = 0; j < 6; ++j) values(i, j) = rng.next_gaussian();
    }
    const Eigen::VectorXd target = 0.5 * values.col(2) + 0.5 * values.col(5);
    const PruneResult exact = prune_bsf(make_matrix(values), target, 2);
    CHECK(exact.selected == std::vector<int>{2, 5});
    CHECK(exact.validation_mspe <= 1e-20);
}

TEST_CASE("BSF equals the exhaustive oracle on random instances") {
    Rng rng(6);
    for (int trial = 0; trial < 25; ++trial) {
        const int B = 4 + static_cast<int>(rng.next_below(5));  // 4..8
        const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.next_below(31));
        Eigen::VectorXd y;
        const PredictionMatrix P = random_instance(rng, n, B, y);
        const int K = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(B / 2)));
        const PruneResult mine = prune_bsf(P, y, K);
        CHECK(mine.selected == oracle::bsf_enumerate(P.values, y, K));
    }
}

TEST_CASE("BSF MSPE is non-increasing in K") {
    Rng rng(7);
    Eigen::VectorXd y;
    const PredictionMatrix P = random_instance(rng, 40, 8, y);
    double previous = std::numeric_limits<double>::infinity();
    for (int K = 1; K <= 4; ++K) {
        const double value = prune_bsf(P, y, K).validation_mspe;
        CHECK(value <= previous);
        previous = value;
    }
}

TEST_CASE("BSF result is independent of the worker count") {
    Rng rng(8);
    Eigen::VectorXd y;
    const PredictionMatrix P = random_instance(rng, 35, 8, y);
    const PruneResult a = prune_bsf(P, y, 3, 1);
    const PruneResult b = prune_bsf(P, y, 3, 4);
    CHECK(a.selected == b.selected);
    CHECK(a.validation_mspe == b.validation_mspe);
}

TEST_CASE("SFS and SBS' match their oracle replays on random instances") {
    Rng rng(9);
    for (int trial = 0; trial < 25; ++trial) {
        const int B = 3 + static_cast<int>(rng.next_below(4));  // 3..6
        Eigen::VectorXd y;
        const PredictionMatrix P = random_instance(rng, 25, B, y);
        CHECK(prune_sfs(P, y).selected == oracle::sfs_replay(P.values, y));
        CHECK(prune_sbs_prime(P, y).selected == oracle::sbs_prime_replay(P.values, y));
    }
}

TEST_CASE("Lasso pruning finds an exactly representable response") {
    Rng rng(10);
    Eigen::MatrixXd values(60, 8);
    for (Eigen::Index i = 0; i < 60; ++i) {
        for (int j = 0; j < 8; ++j) values(i, j) = rng.next_gaussian();
    }
    const Eigen::VectorXd y = 3.0 * values.col(4);
    PruneOptions options;
    options.seed = 3;
    const PruneResult result = prune_lasso(make_matrix(values), y, options);
    CHECK(std::find(result.selected.begin(), result.selected.end(), 4) != result.selected.end());
    const double var_y = (y.array() - y.mean()).square().sum() / 60.0;
    CHECK(result.validation_mspe < 1e-6 * var_y);
    CHECK(result.method == PruneMethod::LASSO);
    CHECK(result.trace.empty());
}

TEST_CASE("max_trees at B never triggers the refit branch") {
    Rng rng(11);
    Eigen::VectorXd y;
    const PredictionMatrix P = random_instance(rng, 50, 6, y);
    PruneOptions plain;
    plain.seed = 5;
    const PruneResult base = prune_lasso(P, y, plain);
    PruneOptions capped = plain;
    capped.lasso_max_trees = 6;
    const PruneResult with_cap = prune_lasso(P, y, capped);
    CHECK(with_cap.selected == base.selected);
    CHECK(with_cap.weights == base.weights);
    CHECK(with_cap.method == PruneMethod::LASSO_K);
}

TEST_CASE("max_trees caps the selection cardinality") {
    Rng rng(12);
    Eigen::VectorXd y;
    const PredictionMatrix P = random_instance(rng, 120, 25, y);
    PruneOptions options;
    options.lasso_max_trees = 4;
    options.seed = 7;
    const PruneResult result = prune_lasso(P, y, options);
    CHECK(result.selected.size() <= 4);
    CHECK(result.selected.size() >= 1);
    for (Eigen::Index k = 0; k < result.weights.size(); ++k) CHECK(result.weights(k) > 0.0);
}

TEST_CASE("Lasso weights satisfy KKT on the selected design") {
    Rng rng(13);
    Eigen::VectorXd y;
    const PredictionMatrix P = random_instance(rng, 80, 10, y);
    PruneOptions options;
    options.seed = 11;
    const PruneResult result = prune_lasso(P, y, options);
    REQUIRE(!result.lasso_fallback);
    Eigen::MatrixXd design(P.values.rows(), static_cast<Eigen::Index>(result.selected.size()));
    for (std::size_t k = 0; k < result.selected.size(); ++k) {
        design.col(static_cast<Eigen::Index>(k)) = P.values.col(result.selected[k]);
    }
    CHECK(nnlasso_kkt_violation(design, y, result.weights, result.lasso_lambda) <= 10.0 * 1e-7);
}

TEST_CASE("all-zero Lasso solution falls back to the best single tree") {
    Rng rng(14);
    // Columns anti-correlated with y: every x_j'y < 0, so every lambda on
    // the grid zeroes the solution.
    Eigen::MatrixXd values(40, 5);
    Eigen::VectorXd y(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
        const double base = rng.next_gaussian();
        y(i) = base;
        for (int j = 0; j < 5; ++j) values(i, j) = -base + 0.1 * rng.next_gaussian();
    }
    const PruneResult result = prune_lasso(make_matrix(values), y, {});
    CHECK(result.lasso_fallback);
    CHECK(result.selected.size() == 1);
    CHECK(result.weights(0) >= 0.0);
}

TEST_CASE("prune results recompute to their stated validation MSPE") {
    Rng rng(15);
    Eigen::VectorXd y;
    const PredictionMatrix P = random_instance(rng, 50, 8, y);
    for (const PruneResult& result :
         {prune_sfs(P, y), prune_sbs_prime(P, y), prune_bsf(P, y, 3), prune_lasso(P, y, {})}) {
        const double recomputed = mspe(result.predict(P.values), y);
        CHECK(std::abs(recomputed - result.validation_mspe) <= 1e-10);
        CHECK(!result.selected.empty());
        for (std::size_t k = 1; k < result.selected.size(); ++k) {
            CHECK(result.selected[k] > result.selected[k - 1]);
        }
    }
}

TEST_CASE("ghost substitution coincides with leave-one-tree-out") {
    Rng rng(16);
    Eigen::VectorXd y;
    const PredictionMatrix P = random_instance(rng, 30, 6, y);
    for (int j = 0; j < 6; ++j) {
        const GhostCheck check = ghost_equivalence_check(P, y, j);
        const double scale = std::max(1.0, std::abs(check.sbs_mspe));
        CHECK(std::abs(check.ghost_mspe - check.sbs_mspe) <= 1e-12 * scale);
    }

    // Two trees: both reduce to the other tree's MSPE.
    Eigen::VectorXd y2;
    const PredictionMatrix P2 = random_instance(rng, 20, 2, y2);
    const GhostCheck two = ghost_equivalence_check(P2, y2, 0);
    CHECK(two.sbs_mspe == doctest::Approx(mspe(P2.values.col(1), y2)).epsilon(1e-12));

    // Identical columns: ghosting changes nothing.
    Eigen::MatrixXd same(20, 3);
    same.col(0) = P2.values.col(0);
    same.col(1) = P2.values.col(0);
    same.col(2) = P2.values.col(0);
    const GhostCheck identical = ghost_equivalence_check(make_matrix(same), y2, 1);
    std::vector<int> all{0, 1, 2};
    CHECK(identical.ghost_mspe ==
          doctest::Approx(mspe(uniform_column_mean(same, all), y2)).epsilon(1e-12));
}
