#include <benchmark/benchmark.h>

#include "forestprune/nnlasso.hpp"
#include "forestprune/rng.hpp"

using namespace forestprune;

namespace {

void make_problem(Eigen::Index n, int B, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
    Rng rng(11);
    X.resize(n, B);
    y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double shared = rng.next_gaussian();
        y(i) = shared + 0.3 * rng.next_gaussian();
        for (int j = 0; j < B; ++j) X(i, j) = shared + 0.5 * rng.next_gaussian();
    }
}

void BM_fit_nnlasso(benchmark::State& state) {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    make_problem(state.range(0), 25, X, y);
    const double lambda = lambda_grid(X, y).at(50);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_nnlasso(X, y, lambda));
    }
}
BENCHMARK(BM_fit_nnlasso)->Arg(500)->Arg(4000);

void BM_cv_select_lambda(benchmark::State& state) {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    make_problem(state.range(0), 25, X, y);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cv_select_lambda(X, y, 10, 7));
    }
}
BENCHMARK(BM_cv_select_lambda)->Arg(500)->Arg(4000);

}  // namespace
