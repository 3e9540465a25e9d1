#include <doctest.h>

#include "forestprune/errors.hpp"
#include "forestprune/experiment.hpp"
#include "forestprune/serialize.hpp"

using namespace forestprune;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig config;
    ScenarioConfig scenario;
    scenario.n = 200;
    scenario.relevant_vars = 2;
    scenario.noise_variance = 0.04;
    scenario.forest_size = 6;
    config.scenario = scenario;
    config.B = 6;
    config.K = 2;
    config.reps = 2;
    config.master_seed = 42;
    return config;
}

RunRecord make_record(int rep, double full, std::vector<std::pair<PruneMethod, double>> rows) {
    RunRecord record;
    record.rep = rep;
    record.full_forest_test_mspe = full;
    record.full_forest_trees = 10;
    for (auto [method, value] : rows) {
        MethodRunResult m;
        m.method = method;
        m.test_mspe = value;
        m.n_trees = 3;
        record.methods.push_back(m);
    }
    return record;
}

}  // namespace

TEST_CASE("B=1 forces every method onto the single tree") {
    ExperimentConfig config = tiny_config();
    config.B = 1;
    config.scenario->forest_size = 1;
    config.reps = 1;
    const auto records = run_experiment(config);
    REQUIRE(records.size() == 1);
    REQUIRE(records[0].methods.size() == 5);
    const double expected = records[0].methods[0].test_mspe;
    for (const auto& m : records[0].methods) {
        REQUIRE(!m.failed);
        CHECK(m.n_trees == 1);
        // Combinatorial methods share the uniform single-tree prediction;
        // the Lasso variants refit the one weight, so only the selection is
        // forced to coincide.
        if (m.method == PruneMethod::SFS || m.method == PruneMethod::SBS_PRIME ||
            m.method == PruneMethod::BSF) {
            CHECK(m.test_mspe == expected);
        }
    }
    CHECK(records[0].full_forest_test_mspe == expected);
}

TEST_CASE("records are byte-identical across runs and thread counts") {
    ExperimentConfig config = tiny_config();
    config.threads = 1;
    const auto a = run_experiment(config);
    config.threads = 3;
    const auto b = run_experiment(config);
    CHECK(records_to_csv(a) == records_to_csv(b));
    const auto c = run_experiment(config);
    CHECK(records_to_csv(b) == records_to_csv(c));
}

TEST_CASE("scenario experiments show the pruning advantage direction") {
    ExperimentConfig config;
    ScenarioConfig scenario;
    scenario.n = 2000;
    scenario.relevant_vars = 2;
    scenario.noise_variance = 0.04;
    config.scenario = scenario;
    config.B = 10;
    config.K = 4;
    config.reps = 5;
    config.methods = {PruneMethod::LASSO};
    config.master_seed = 123;
    const auto records = run_experiment(config);
    const auto reports = summarize(records, config.methods);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].mspe_delta_pct < 0.0);  // Lasso beats the full forest
}

TEST_CASE("summarize on hand-built records") {
    std::vector<RunRecord> records;
    for (int rep = 0; rep < 10; ++rep) {
        // SFS identical to the baseline; LASSO always strictly better.
        const double full = 1.0 + 0.01 * rep;
        records.push_back(make_record(
            rep, full, {{PruneMethod::SFS, full}, {PruneMethod::LASSO, full - 0.1}}));
    }
    const auto reports =
        summarize(records, {PruneMethod::SFS, PruneMethod::LASSO});
    REQUIRE(reports.size() == 2);

    CHECK(reports[0].method_a == "SFS");
    CHECK(reports[0].method_b == "FULL");
    CHECK(reports[0].mspe_delta_pct == doctest::Approx(0.0));
    CHECK(reports[0].p_value == 1.0);  // all differences zero
    CHECK(reports[0].freq_delta_leq_0 == 1.0);

    CHECK(reports[1].method_a == "LASSO");
    CHECK(reports[1].freq_delta_leq_0 == 1.0);
    // 10 strictly positive differences: exact two-sided p = 2/2^10.
    CHECK(reports[1].p_value == doctest::Approx(2.0 / 1024.0).epsilon(1e-12));
    CHECK(reports[1].p_value < kBonferroniAlpha);

    // Method-vs-method baseline produces one row per non-baseline method.
    const auto vs = summarize(records, {PruneMethod::SFS, PruneMethod::LASSO}, PruneMethod::SFS);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].method_b == "SFS");
    CHECK(vs[0].trees_delta_pct == doctest::Approx(0.0));
}

TEST_CASE("method failures are flagged, not dropped") {
    ExperimentConfig config = tiny_config();
    config.B = 3;
    config.scenario->forest_size = 3;
    config.K = 5;  // clamped to 1 for BSF inside the pipeline, never fails
    config.reps = 1;
    const auto records = run_experiment(config);
    for (const auto& m : records[0].methods) CHECK(!m.failed);
}

TEST_CASE("experiment config validation") {
    ExperimentConfig config;
    CHECK_THROWS_AS(config.validate(), ConfigError);  // no source
    config = tiny_config();
    config.reps = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = tiny_config();
    config.methods.clear();
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("experiment config and records round-trip through their file forms") {
    const ExperimentConfig config = tiny_config();
    const ExperimentConfig back = experiment_config_from_json(experiment_config_to_json(config));
    CHECK(back.B == config.B);
    CHECK(back.reps == config.reps);
    CHECK(back.master_seed == config.master_seed);
    CHECK(back.scenario->n == config.scenario->n);
    CHECK(back.methods == config.methods);

    const auto records = run_experiment(config);
    const auto parsed = records_from_csv(records_to_csv(records));
    CHECK(records_to_csv(parsed) == records_to_csv(records));

    const std::string manifest = manifest_to_json(config, records);
    CHECK(manifest.find("forestprune") != std::string::npos);
    CHECK(manifest.find("rep_seeds") != std::string::npos);
}
