#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace forestprune {

/// Dense numeric design matrix plus response. Immutable after construction
/// by convention; every downstream stage shares it across threads.
struct Dataset {
    Eigen::MatrixXd features;               // n rows x d columns
    Eigen::VectorXd response;               // length n
    std::vector<std::string> column_names;  // length d

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index cols() const { return features.cols(); }

    /// Throws ConfigError on shape mismatch or non-finite entries.
    void validate() const;
};

struct SplitIndices {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> validation;
    std::vector<Eigen::Index> test;
};

struct ScenarioConfig {
    Eigen::Index n = 600;
    int relevant_vars = 2;
    int total_vars = 10;
    int forest_size = 25;  // B
    double noise_variance = 0.04;
    std::uint64_t seed = 123;

    void validate() const;
};

/// Features are i.i.d. standard normal (drawn row-major), the response is
/// the sum of the first relevant_vars columns plus N(0, noise_variance)
/// noise. Bit-identical for a given config across runs and platforms.
Dataset generate_scenario(const ScenarioConfig& config);

struct CsvOptions {
    /// Columns to encode as integer ordinals, with the declared level order
    /// (code 0 for the first listed level). Unlisted categorical columns are
    /// one-hot encoded with lexicographically ordered level names.
    std::map<std::string, std::vector<std::string>> ordinal_levels;
};

// RFC-4180 CSV with a header row, UTF-8, '.' decimal separator. Numeric and
// ordinal-declared columns keep their original relative order; one-hot
// indicator columns ("col=level") are appended after them.
Dataset load_csv(const std::string& path, const std::string& response_column,
                 const CsvOptions& options = {});

/// Uniformly random partition of 0..n-1, deterministic per seed. Sizes are
/// floor(ratio * n) with remainder rows going to train, then validation.
/// Each index list is sorted ascending.
SplitIndices split_rows(Eigen::Index n, const std::array<double, 3>& ratios, std::uint64_t seed);

SplitIndices split(const Dataset& dataset, const std::array<double, 3>& ratios, std::uint64_t seed);

}  // namespace forestprune
