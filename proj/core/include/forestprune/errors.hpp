#pragma once

#include <stdexcept>
#include <string>

namespace forestprune {

/// Invalid configuration or parameters (CLI maps these to exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or unusable input data; message names the offending row/column.
struct IngestError : std::runtime_error {
    explicit IngestError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An operation refused to materialize a result beyond its configured budget.
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace forestprune
