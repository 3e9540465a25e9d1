#include <doctest.h>

#include "forestprune/dataset.hpp"
#include "forestprune/errors.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

using namespace forestprune;

namespace {

struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& content) {
        static std::atomic<int> counter{0};
        path = (std::filesystem::temp_directory_path() /
                ("fp_test_" + std::to_string(counter++) + ".csv"))
                   .string();
        std::ofstream out(path, std::ios::binary);
        out << content;
    }
    ~TempCsv() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("generate_scenario matches the declared moments") {
    ScenarioConfig config;
    config.n = 600;
    config.relevant_vars = 2;
    config.noise_variance = 0.04;
    config.seed = 123;
    const Dataset data = generate_scenario(config);
    REQUIRE(data.rows() == 600);
    REQUIRE(data.cols() == 10);

    // Var(Y) = relevant + sigma^2 = 2.04 by construction.
    const double mean = data.response.mean();
    const double var = (data.response.array() - mean).square().sum() / 600.0;
    CHECK(var == doctest::Approx(2.04).epsilon(0.15));
}

TEST_CASE("generate_scenario zero signal zero noise") {
    ScenarioConfig config;
    config.n = 50;
    config.relevant_vars = 0;
    config.noise_variance = 0.0;
    const Dataset data = generate_scenario(config);
    CHECK(data.response.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noise overpowers signal half the time at sigma^2 = 2") {
    ScenarioConfig config;
    config.n = 20000;
    config.relevant_vars = 2;
    config.noise_variance = 2.0;
    config.seed = 7;
    const Dataset data = generate_scenario(config);
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const double signal = data.features(i, 0) + data.features(i, 1);
        const double noise = data.response(i) - signal;
        if (std::abs(signal) <= std::abs(noise)) ++hits;
    }
    const double p = static_cast<double>(hits) / 20000.0;
    CHECK(p == doctest::Approx(0.5).epsilon(0.04));  // 0.5 +/- 0.02
}

TEST_CASE("generate_scenario is bit-identical per seed") {
    ScenarioConfig config;
    config.n = 100;
    config.seed = 99;
    const Dataset a = generate_scenario(config);
    const Dataset b = generate_scenario(config);
    CHECK(a.features == b.features);
    CHECK(a.response == b.response);
}

TEST_CASE("irrelevant columns decorrelate from the response") {
    ScenarioConfig config;
    config.n = 20000;
    config.relevant_vars = 2;
    config.noise_variance = 2.0;
    config.seed = 11;
    const Dataset data = generate_scenario(config);
    const double y_mean = data.response.mean();
    const Eigen::ArrayXd yc = data.response.array() - y_mean;
    const double y_sd = std::sqrt(yc.square().sum());
    for (int j = 2; j < 10; ++j) {
        const Eigen::ArrayXd xc = data.features.col(j).array() - data.features.col(j).mean();
        const double r = (xc * yc).sum() / (std::sqrt(xc.square().sum()) * y_sd);
        CHECK(std::abs(r) < 0.05);
    }
}

TEST_CASE("generate_scenario rejects invalid configs") {
    ScenarioConfig config;
    config.relevant_vars = 11;
    CHECK_THROWS_AS(generate_scenario(config), ConfigError);
}

TEST_CASE("load_csv parses a plain numeric file") {
    TempCsv file("a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
    const Dataset data = load_csv(file.path, "y");
    REQUIRE(data.rows() == 3);
    REQUIRE(data.cols() == 2);
    CHECK(data.column_names == std::vector<std::string>{"a", "b"});
    CHECK(data.features(1, 0) == 4.0);
    CHECK(data.response(2) == 9.0);
}

TEST_CASE("load_csv one-hot encodes categorical columns") {
    TempCsv file("color,x,y\nred,1,0.5\nblue,2,0.7\ngreen,3,0.9\nred,4,1.1\n");
    const Dataset data = load_csv(file.path, "y");
    // numeric column first, then indicators with lexicographic level order
    REQUIRE(data.cols() == 4);
    CHECK(data.column_names ==
          std::vector<std::string>{"x", "color=blue", "color=green", "color=red"});
    CHECK(data.features(0, 3) == 1.0);  // first row is red
    CHECK(data.features(1, 1) == 1.0);  // second row is blue
    CHECK(data.features(1, 3) == 0.0);
}

TEST_CASE("load_csv ordinal declaration encodes integer codes in place") {
    TempCsv file("cut,x,y\nGood,1,2\nFair,2,3\nIdeal,3,4\n");
    CsvOptions options;
    options.ordinal_levels["cut"] = {"Fair", "Good", "Ideal"};
    const Dataset data = load_csv(file.path, "y", options);
    REQUIRE(data.cols() == 2);
    CHECK(data.column_names == std::vector<std::string>{"cut", "x"});
    CHECK(data.features(0, 0) == 1.0);
    CHECK(data.features(1, 0) == 0.0);
    CHECK(data.features(2, 0) == 2.0);
}

TEST_CASE("load_csv names the offending cell") {
    TempCsv file("a,b,y\n1,,3\n");
    CHECK_THROWS_WITH_AS(load_csv(file.path, "y"), doctest::Contains("row 1"), IngestError);
    TempCsv missing("a,b,y\n1,2,3\n");
    CHECK_THROWS_AS(load_csv(missing.path, "z"), IngestError);
}

TEST_CASE("load_csv handles quoted RFC-4180 fields") {
    TempCsv file("name,y\n\"hello, world\",1\n\"with \"\"quotes\"\"\",2\n");
    const Dataset data = load_csv(file.path, "y");
    // the categorical name column one-hot expands to two indicator columns
    REQUIRE(data.cols() == 2);
    CHECK(data.column_names[0] == "name=hello, world");
}

TEST_CASE("split honors exact ratios and the remainder policy") {
    const SplitIndices a = split_rows(10, {0.6, 0.2, 0.2}, 1);
    CHECK(a.train.size() == 6);
    CHECK(a.validation.size() == 2);
    CHECK(a.test.size() == 2);

    const SplitIndices b = split_rows(5, {0.6, 0.2, 0.2}, 1);
    CHECK(b.train.size() == 3);
    CHECK(b.validation.size() == 1);
    CHECK(b.test.size() == 1);

    const SplitIndices c = split_rows(7, {0.6, 0.2, 0.2}, 1);
    CHECK(c.train.size() == 5);  // floor 4 + remainder to train
    CHECK(c.validation.size() == 1);
    CHECK(c.test.size() == 1);
}

TEST_CASE("split is deterministic and partitions exhaustively") {
    for (Eigen::Index n : {3, 10, 37, 101}) {
        const SplitIndices a = split_rows(n, {0.6, 0.2, 0.2}, 42);
        const SplitIndices b = split_rows(n, {0.6, 0.2, 0.2}, 42);
        CHECK(a.train == b.train);
        CHECK(a.validation == b.validation);
        CHECK(a.test == b.test);

        std::set<Eigen::Index> seen;
        for (auto i : a.train) seen.insert(i);
        for (auto i : a.validation) seen.insert(i);
        for (auto i : a.test) seen.insert(i);
        CHECK(seen.size() == static_cast<std::size_t>(n));
        CHECK(*seen.begin() == 0);
        CHECK(*seen.rbegin() == n - 1);
    }
}

TEST_CASE("split rejects degenerate ratios") {
    CHECK_THROWS_AS(split_rows(10, {0.5, 0.5, 0.0}, 1), ConfigError);
    CHECK_THROWS_AS(split_rows(10, {0.5, 0.3, 0.3}, 1), ConfigError);
}
