#include "forestprune/dataset.hpp"

#include "forestprune/errors.hpp"
#include "forestprune/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace forestprune {

void Dataset::validate() const {
    if (features.rows() != response.size()) {
        throw ConfigError("dataset row count " + std::to_string(features.rows()) +
                          " does not match response length " + std::to_string(response.size()));
    }
    if (static_cast<Eigen::Index>(column_names.size()) != features.cols()) {
        throw ConfigError("dataset has " + std::to_string(features.cols()) + " columns but " +
                          std::to_string(column_names.size()) + " column names");
    }
    if (!features.allFinite()) throw ConfigError("dataset features contain non-finite values");
    if (!response.allFinite()) throw ConfigError("dataset response contains non-finite values");
}

void ScenarioConfig::validate() const {
    if (n < 1) throw ConfigError("scenario n must be >= 1");
    if (total_vars < 1) throw ConfigError("scenario total_vars must be >= 1");
    if (relevant_vars < 0 || relevant_vars > total_vars) {
        throw ConfigError("scenario relevant_vars must lie in [0, total_vars]");
    }
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
        throw ConfigError("scenario noise_variance must be finite and >= 0");
    }
    if (forest_size < 1) throw ConfigError("scenario forest_size must be >= 1");
}

Dataset generate_scenario(const ScenarioConfig& config) {
    config.validate();
    Dataset out;
    out.features.resize(config.n, config.total_vars);
    out.response.resize(config.n);
    Rng rng(config.seed);
    for (Eigen::Index i = 0; i < config.n; ++i) {
        for (int j = 0; j < config.total_vars; ++j) {
            out.features(i, j) = rng.next_gaussian();
        }
    }
    const double noise_sd = std::sqrt(config.noise_variance);
    for (Eigen::Index i = 0; i < config.n; ++i) {
        double y = 0.0;
        for (int j = 0; j < config.relevant_vars; ++j) y += out.features(i, j);
        out.response(i) = y + noise_sd * rng.next_gaussian();
    }
    out.column_names.reserve(static_cast<std::size_t>(config.total_vars));
    for (int j = 0; j < config.total_vars; ++j) {
        out.column_names.push_back("x" + std::to_string(j + 1));
    }
    out.validate();
    return out;
}

namespace {

// One RFC-4180 record; handles quoted fields, embedded commas/quotes and
// CRLF line ends. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        const char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get();
            fields.push_back(std::move(field));
            return true;
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(c);
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

bool parse_double(const std::string& text, double& value) {
    if (text.empty()) return false;
    const char* begin = text.c_str();
    char* end = nullptr;
    value = std::strtod(begin, &end);
    if (end != begin + text.size()) return false;
    return true;
}

std::string cell_name(std::size_t row, const std::string& column) {
    // row is 1-based over data rows (header excluded)
    return "row " + std::to_string(row) + ", column '" + column + "'";
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& response_column,
                 const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open CSV file: " + path);

    std::vector<std::string> header;
    if (!read_record(in, header) || header.empty()) {
        throw IngestError("CSV file has no header row: " + path);
    }

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> record;
    while (read_record(in, record)) {
        if (record.size() == 1 && record[0].empty()) continue;  // trailing blank line
        if (record.size() != header.size()) {
            throw IngestError("row " + std::to_string(rows.size() + 1) + " has " +
                              std::to_string(record.size()) + " fields, header has " +
                              std::to_string(header.size()));
        }
        rows.push_back(record);
    }
    if (rows.empty()) throw IngestError("CSV file has no data rows: " + path);

    std::size_t response_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == response_column) response_idx = j;
    }
    if (response_idx == header.size()) {
        throw IngestError("response column '" + response_column + "' not found in " + path);
    }

    const std::size_t n = rows.size();
    const std::size_t width = header.size();

    // Classify columns: numeric (every cell parses), ordinal-declared, or
    // categorical. Empty cells are rejected outright.
    enum class Kind { Numeric, Ordinal, Categorical };
    std::vector<Kind> kind(width, Kind::Numeric);
    for (std::size_t j = 0; j < width; ++j) {
        const bool declared_ordinal = options.ordinal_levels.count(header[j]) > 0;
        bool all_numeric = true;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string& cell = rows[i][j];
            if (cell.empty()) {
                throw IngestError("empty cell at " + cell_name(i + 1, header[j]));
            }
            double v;
            if (!parse_double(cell, v)) {
                all_numeric = false;
            } else if (!std::isfinite(v)) {
                throw IngestError("non-finite value at " + cell_name(i + 1, header[j]));
            }
        }
        if (j == response_idx) {
            if (!all_numeric) {
                throw IngestError("response column '" + response_column + "' is not numeric");
            }
            continue;
        }
        if (declared_ordinal) {
            kind[j] = Kind::Ordinal;
        } else {
            kind[j] = all_numeric ? Kind::Numeric : Kind::Categorical;
        }
    }

    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    // Numeric and ordinal columns first, original order preserved.
    for (std::size_t j = 0; j < width; ++j) {
        if (j == response_idx || kind[j] == Kind::Categorical) continue;
        std::vector<double> col(n);
        if (kind[j] == Kind::Numeric) {
            for (std::size_t i = 0; i < n; ++i) parse_double(rows[i][j], col[i]);
        } else {
            const auto& levels = options.ordinal_levels.at(header[j]);
            std::map<std::string, double> code;
            for (std::size_t l = 0; l < levels.size(); ++l) {
                code[levels[l]] = static_cast<double>(l);
            }
            for (std::size_t i = 0; i < n; ++i) {
                auto it = code.find(rows[i][j]);
                if (it == code.end()) {
                    throw IngestError("undeclared ordinal level '" + rows[i][j] + "' at " +
                                      cell_name(i + 1, header[j]));
                }
                col[i] = it->second;
            }
        }
        names.push_back(header[j]);
        columns.push_back(std::move(col));
    }

    // One-hot blocks appended, column order preserved, level names sorted.
    for (std::size_t j = 0; j < width; ++j) {
        if (j == response_idx || kind[j] != Kind::Categorical) continue;
        std::set<std::string> levels;
        for (std::size_t i = 0; i < n; ++i) levels.insert(rows[i][j]);
        for (const auto& level : levels) {
            std::vector<double> col(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (rows[i][j] == level) col[i] = 1.0;
            }
            names.push_back(header[j] + "=" + level);
            columns.push_back(std::move(col));
        }
    }

    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns[j][i];
        }
    }
    out.response.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double v;
        parse_double(rows[i][response_idx], v);
        out.response(static_cast<Eigen::Index>(i)) = v;
    }
    out.column_names = std::move(names);
    out.validate();
    return out;
}

SplitIndices split_rows(Eigen::Index n, const std::array<double, 3>& ratios, std::uint64_t seed) {
    if (n < 3) throw ConfigError("split needs at least 3 rows");
    double sum = 0.0;
    for (double r : ratios) {
        if (!(r > 0.0 && r < 1.0)) throw ConfigError("split ratios must lie in (0, 1)");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

    std::array<Eigen::Index, 3> sizes;
    Eigen::Index assigned = 0;
    for (int k = 0; k < 3; ++k) {
        sizes[static_cast<std::size_t>(k)] =
            static_cast<Eigen::Index>(std::floor(ratios[static_cast<std::size_t>(k)] * static_cast<double>(n)));
        assigned += sizes[static_cast<std::size_t>(k)];
    }
    // Remainder goes to train, then validation.
    for (int k = 0; assigned < n; k = (k + 1) % 2) {
        ++sizes[static_cast<std::size_t>(k)];
        ++assigned;
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(seed);
    rng.shuffle(order);

    SplitIndices out;
    auto take = [&](std::vector<Eigen::Index>& dst, Eigen::Index offset, Eigen::Index count) {
        dst.assign(order.begin() + offset, order.begin() + offset + count);
        std::sort(dst.begin(), dst.end());
    };
    take(out.train, 0, sizes[0]);
    take(out.validation, sizes[0], sizes[1]);
    take(out.test, sizes[0] + sizes[1], sizes[2]);
    return out;
}

SplitIndices split(const Dataset& dataset, const std::array<double, 3>& ratios, std::uint64_t seed) {
    return split_rows(dataset.rows(), ratios, seed);
}

}  // namespace forestprune
