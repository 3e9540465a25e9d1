#include <doctest.h>

#include "forestprune/bounds.hpp"
#include "forestprune/errors.hpp"

#include <cmath>

using namespace forestprune;

namespace {

BoundInputs unit_inputs(Eigen::Index n, int B) {
    BoundInputs inputs;
    inputs.n = n;
    inputs.B = B;
    inputs.delta = 0.05;
    inputs.M = 1.0;
    inputs.r = 1.0;
    inputs.lambda_budget = 1.0;
    inputs.K = 4;
    return inputs;
}

}  // namespace

TEST_CASE("lasso generalization bound against the high-precision oracle") {
    // mpmath, 50 digits: M^2 sqrt(log(1/d)/2n) + 4 r L M sqrt(2 log(2B)/n)
    const double expected = 0.12870345809393380839;
    CHECK(lasso_generalization_bound(unit_inputs(12250, 100)) ==
          doctest::Approx(expected).epsilon(1e-12));

    // Slack vanishes in n.
    CHECK(lasso_generalization_bound(unit_inputs(1000000000000LL, 100)) < 1e-3);

    // Doubling M with r = M/2 scales both terms by M^2.
    BoundInputs a = unit_inputs(1000, 50);
    a.M = 2.0;
    a.r = 1.0;
    BoundInputs b = a;
    b.M = 4.0;
    b.r = 2.0;
    CHECK(lasso_generalization_bound(b) ==
          doctest::Approx(4.0 * lasso_generalization_bound(a)).epsilon(1e-12));

    BoundInputs bad = unit_inputs(100, 10);
    bad.delta = 1.0;
    CHECK_THROWS_AS(lasso_generalization_bound(bad), ConfigError);
}

TEST_CASE("bsf bound value, K=1 reduction and the K guard") {
    const double expected = 0.0990571894116684028;  // mpmath oracle
    CHECK(bsf_bound(unit_inputs(1000, 100)) == doctest::Approx(expected).epsilon(1e-12));

    BoundInputs k1 = unit_inputs(1000, 100);
    k1.K = 1;
    const double reduced = std::sqrt((std::log(100.0) + std::log(1.0 / 0.05)) / 2000.0);
    CHECK(bsf_bound(k1) == doctest::Approx(reduced).epsilon(1e-12));

    BoundInputs bad = unit_inputs(1000, 6);
    bad.K = 4;
    CHECK_THROWS_AS(bsf_bound(bad), ConfigError);
}

TEST_CASE("bsf bound grows with K across the admissible grid") {
    BoundInputs inputs = unit_inputs(1000, 100);
    double previous = 0.0;
    for (int K = 1; K <= 50; ++K) {
        inputs.K = K;
        const double value = bsf_bound(inputs);
        CHECK(value > previous);
        previous = value;
    }
}

TEST_CASE("sfs bound value, B=2 closed form and the even guard") {
    const double expected = 0.060400582781069263149;  // mpmath oracle
    CHECK(sfs_bound(unit_inputs(12250, 100)) == doctest::Approx(expected).epsilon(1e-12));

    const double b2 = std::sqrt((std::log(2.0) + std::log(1.0 / 0.05) + std::log(2.0)) / 200.0);
    CHECK(sfs_bound(unit_inputs(100, 2)) == doctest::Approx(b2).epsilon(1e-12));

    CHECK_THROWS_AS(sfs_bound(unit_inputs(100, 25)), ConfigError);

    // SFS searches a larger class than BSF at K=4: its slack dominates.
    CHECK(sfs_bound(unit_inputs(12250, 100)) > bsf_bound(unit_inputs(12250, 100)));
}

TEST_CASE("finite class bound") {
    const double expected = 0.25490912374367841557;  // mpmath oracle
    CHECK(finite_class_bound(10, 100, 0.05, 1.0) == doctest::Approx(expected).epsilon(1e-12));

    // Singleton class at delta -> 1 approaches M sqrt(1/2n).
    CHECK(finite_class_bound(1, 50, 0.999999, 1.0) ==
          doctest::Approx(std::sqrt(1.0 / 100.0)).epsilon(1e-4));

    double previous = 0.0;
    for (std::int64_t cardinality : {1, 2, 5, 10, 100}) {
        const double value = finite_class_bound(cardinality, 100, 0.05, 1.0);
        CHECK(value > previous);
        previous = value;
    }
}

TEST_CASE("lasso risk bound value, noiseless case and n-homogeneity") {
    const double expected = 0.42114516861995877495;  // mpmath oracle
    CHECK(lasso_risk_bound(1.0, 1.0, 1.0, 100, 10000) ==
          doctest::Approx(expected).epsilon(1e-12));

    const double noiseless = lasso_risk_bound(2.0, 1.5, 0.0, 50, 1000);
    const double second_term =
        8.0 * 4.0 * 2.25 * std::sqrt(2.0 * std::log(2.0 * 2500.0) / 1000.0);
    CHECK(noiseless == doctest::Approx(second_term).epsilon(1e-12));

    // Quadrupling n exactly halves the bound (power-of-two scaling).
    CHECK(lasso_risk_bound(1.0, 1.0, 1.0, 100, 40000) ==
          lasso_risk_bound(1.0, 1.0, 1.0, 100, 10000) / 2.0);
}

TEST_CASE("every bound decreases in n") {
    double prev_lasso = 1e300;
    double prev_bsf = 1e300;
    double prev_sfs = 1e300;
    for (Eigen::Index n : {100, 400, 1600, 6400, 25600}) {
        const BoundInputs inputs = unit_inputs(n, 100);
        CHECK(lasso_generalization_bound(inputs) < prev_lasso);
        CHECK(bsf_bound(inputs) < prev_bsf);
        CHECK(sfs_bound(inputs) < prev_sfs);
        prev_lasso = lasso_generalization_bound(inputs);
        prev_bsf = bsf_bound(inputs);
        prev_sfs = sfs_bound(inputs);
    }
}

TEST_CASE("log-gamma matches exact factorials to 1e-12 relative") {
    // Exact integers up to 20!, then a summed-log reference to 170.
    long double factorial = 1.0L;
    for (int k = 1; k <= 20; ++k) {
        factorial *= static_cast<long double>(k);
        const double exact = std::log(static_cast<double>(factorial));
        const double via_lgamma = std::lgamma(static_cast<double>(k) + 1.0);
        CHECK(std::abs(via_lgamma - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
    }
    long double log_sum = 0.0L;
    for (int k = 2; k <= 170; ++k) {
        log_sum += std::log(static_cast<long double>(k));
        const double via_lgamma = std::lgamma(static_cast<double>(k) + 1.0);
        const double reference = static_cast<double>(log_sum);
        CHECK(std::abs(via_lgamma - reference) <= 1e-12 * std::abs(reference));
    }
}

TEST_CASE("simulate_bounds smoke: conservative bounds, sane aggregates") {
    BoundSimulationConfig config;
    config.scenario.n = 400;
    config.scenario.relevant_vars = 8;
    config.scenario.total_vars = 10;
    config.scenario.forest_size = 12;
    config.scenario.noise_variance = 2.0;
    config.scenario.seed = 123;
    config.reps = 3;
    config.K = 2;

    const auto reports = simulate_bounds(config);
    REQUIRE(reports.size() == 9);  // 3 methods x 3 reps
    for (const auto& report : reports) {
        CHECK(!report.breach);
        CHECK(report.utilization >= 0.0);
        CHECK(report.utilization <= 1.0);
        CHECK(report.bound_value > 0.0);
        CHECK(report.m_provenance == "estimated");
    }

    const auto rows = aggregate_bound_reports(reports);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
        CHECK(row.breach_pct == 0.0);
        CHECK(row.use_pct_sd.has_value());
    }

    // Single rep: sd fields are absent.
    config.reps = 1;
    const auto single = aggregate_bound_reports(simulate_bounds(config));
    for (const auto& row : single) {
        CHECK(!row.use_pct_sd.has_value());
        CHECK(!row.risk_delta_pct_sd.has_value());
    }
}

TEST_CASE("simulate_bounds rejects unsupported methods") {
    BoundSimulationConfig config;
    config.scenario.n = 100;
    config.methods = {PruneMethod::SBS_PRIME};
    CHECK_THROWS_AS(simulate_bounds(config), ConfigError);
}

TEST_CASE("simulate_bounds honors a user-supplied M") {
    BoundSimulationConfig config;
    config.scenario.n = 300;
    config.scenario.relevant_vars = 2;
    config.scenario.forest_size = 8;
    config.scenario.noise_variance = 0.04;
    config.reps = 1;
    config.K = 2;
    config.methods = {PruneMethod::BSF};
    config.M = 50.0;
    const auto reports = simulate_bounds(config);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].m_provenance == "user");
    // validation size = floor(0.35 * 300) = 105
    const BoundInputs check{.n = 105, .B = 8, .delta = 0.05, .M = 50.0, .r = 1.0,
                            .lambda_budget = 1.0, .K = 2};
    CHECK(reports[0].bound_value == doctest::Approx(bsf_bound(check)).epsilon(1e-12));
}
