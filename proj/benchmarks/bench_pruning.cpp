#include <benchmark/benchmark.h>

#include "forestprune/merge.hpp"
#include "forestprune/pruning.hpp"
#include "forestprune/rng.hpp"

#include <numeric>

using namespace forestprune;

namespace {

PredictionMatrix make_instance(Eigen::Index n, int B, Eigen::VectorXd& y) {
    Rng rng(21);
    PredictionMatrix P;
    P.values.resize(n, B);
    P.row_indices.resize(static_cast<std::size_t>(n));
    std::iota(P.row_indices.begin(), P.row_indices.end(), Eigen::Index{0});
    y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double shared = rng.next_gaussian();
        y(i) = shared + 0.3 * rng.next_gaussian();
        for (int j = 0; j < B; ++j) P.values(i, j) = shared + 0.5 * rng.next_gaussian();
    }
    return P;
}

void BM_prune_sfs(benchmark::State& state) {
    Eigen::VectorXd y;
    const PredictionMatrix P = make_instance(2000, static_cast<int>(state.range(0)), y);
    for (auto _ : state) {
        benchmark::DoNotOptimize(prune_sfs(P, y));
    }
}
BENCHMARK(BM_prune_sfs)->Arg(25)->Arg(100);

void BM_prune_bsf_k4(benchmark::State& state) {
    Eigen::VectorXd y;
    const PredictionMatrix P = make_instance(2000, static_cast<int>(state.range(0)), y);
    for (auto _ : state) {
        benchmark::DoNotOptimize(prune_bsf(P, y, 4, 1));
    }
}
BENCHMARK(BM_prune_bsf_k4)->Arg(25)->Arg(100);

void BM_prune_lasso(benchmark::State& state) {
    Eigen::VectorXd y;
    const PredictionMatrix P = make_instance(2000, static_cast<int>(state.range(0)), y);
    PruneOptions options;
    options.seed = 5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(prune_lasso(P, y, options));
    }
}
BENCHMARK(BM_prune_lasso)->Arg(25)->Arg(100);

}  // namespace
