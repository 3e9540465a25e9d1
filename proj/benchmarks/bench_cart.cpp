#include <benchmark/benchmark.h>

#include "forestprune/dataset.hpp"
#include "forestprune/forest.hpp"
#include "forestprune/tree.hpp"

#include <numeric>

using namespace forestprune;

namespace {

Dataset scenario(Eigen::Index n, std::uint64_t seed) {
    ScenarioConfig config;
    config.n = n;
    config.relevant_vars = 2;
    config.noise_variance = 0.04;
    config.seed = seed;
    return generate_scenario(config);
}

std::vector<Eigen::Index> iota_rows(Eigen::Index n) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    return rows;
}

void BM_fit_tree(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const Dataset data = scenario(n, 1);
    const auto rows = iota_rows(n);
    const std::vector<bool> mask(10, true);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_tree(data, rows, mask, CartParams{}));
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_fit_tree)->Arg(1000)->Arg(10000)->Complexity();

void BM_fit_forest(benchmark::State& state) {
    const Dataset data = scenario(2000, 2);
    const auto rows = iota_rows(2000);
    ForestFitOptions options;
    options.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            fit_forest(data, rows, static_cast<int>(state.range(0)), CartParams{}, options, 3));
    }
}
BENCHMARK(BM_fit_forest)->Arg(10)->Arg(25);

void BM_prediction_matrix(benchmark::State& state) {
    const Dataset data = scenario(5000, 4);
    const auto rows = iota_rows(5000);
    const Forest forest = fit_forest(data, rows, 25, CartParams{}, {}, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(prediction_matrix(forest, data, rows, 1));
    }
}
BENCHMARK(BM_prediction_matrix);

}  // namespace

BENCHMARK_MAIN();
