#include "forestprune/serialize.hpp"

#include "forestprune/errors.hpp"
#include "forestprune/rng.hpp"
#include "forestprune/version.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace forestprune {

using nlohmann::json;

namespace {

/// Shortest round-trip decimal form, deterministic across runs.
std::string fmt(double value) {
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

json node_to_json(const TreeNode& node) {
    json j;
    j["count"] = node.count;
    if (node.is_leaf()) {
        j["value"] = node.value;
    } else {
        j["feature"] = node.feature;
        j["threshold"] = node.threshold;
        j["left"] = node.left;
        j["right"] = node.right;
    }
    return j;
}

TreeNode node_from_json(const json& j) {
    TreeNode node;
    node.count = j.value("count", std::int64_t{0});
    if (j.contains("feature")) {
        node.feature = j.at("feature").get<std::int32_t>();
        node.threshold = j.at("threshold").get<double>();
        node.left = j.at("left").get<std::int32_t>();
        node.right = j.at("right").get<std::int32_t>();
    } else {
        node.value = j.at("value").get<double>();
    }
    return node;
}

json tree_to_json_obj(const RegressionTree& tree) {
    json j;
    j["root"] = tree.root();
    json nodes = json::array();
    for (const auto& node : tree.nodes()) nodes.push_back(node_to_json(node));
    j["nodes"] = std::move(nodes);
    return j;
}

RegressionTree tree_from_json_obj(const json& j) {
    std::vector<TreeNode> nodes;
    for (const auto& item : j.at("nodes")) nodes.push_back(node_from_json(item));
    if (j.value("root", 0) != 0) {
        throw IngestError("tree JSON must store nodes in preorder with root id 0");
    }
    return RegressionTree(std::move(nodes));
}

json cart_to_json(const CartParams& params) {
    return json{{"min_split", params.min_split},
                {"min_bucket", params.min_bucket},
                {"cp", params.cp},
                {"max_depth", params.max_depth}};
}

CartParams cart_from_json(const json& j) {
    CartParams params;
    params.min_split = j.value("min_split", params.min_split);
    params.min_bucket = j.value("min_bucket", params.min_bucket);
    params.cp = j.value("cp", params.cp);
    params.max_depth = j.value("max_depth", params.max_depth);
    return params;
}

ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig config;
    config.n = j.value("n", config.n);
    config.relevant_vars = j.value("relevant_vars", config.relevant_vars);
    config.total_vars = j.value("total_vars", config.total_vars);
    config.forest_size = j.value("forest_size", config.forest_size);
    config.noise_variance = j.value("noise_variance", config.noise_variance);
    config.seed = j.value("seed", config.seed);
    return config;
}

json scenario_to_json(const ScenarioConfig& config) {
    return json{{"n", config.n},
                {"relevant_vars", config.relevant_vars},
                {"total_vars", config.total_vars},
                {"forest_size", config.forest_size},
                {"noise_variance", config.noise_variance},
                {"seed", config.seed}};
}

std::vector<PruneMethod> methods_from_json(const json& j) {
    std::vector<PruneMethod> methods;
    for (const auto& item : j) methods.push_back(prune_method_from_string(item.get<std::string>()));
    return methods;
}

}  // namespace

std::string tree_to_json(const RegressionTree& tree) { return tree_to_json_obj(tree).dump(2); }

RegressionTree tree_from_json(const std::string& text) {
    return tree_from_json_obj(json::parse(text));
}

std::string forest_to_json(const Forest& forest) {
    json j;
    j["schema_width"] = forest.schema_width;
    j["params"] = cart_to_json(forest.params);
    j["bootstrap_seeds"] = forest.bootstrap_seeds;
    json masks = json::array();
    for (const auto& mask : forest.feature_masks) {
        json m = json::array();
        for (bool bit : mask) m.push_back(bit);
        masks.push_back(std::move(m));
    }
    j["feature_masks"] = std::move(masks);
    json trees = json::array();
    for (const auto& tree : forest.trees) trees.push_back(tree_to_json_obj(tree));
    j["trees"] = std::move(trees);
    return j.dump(2);
}

Forest forest_from_json(const std::string& text) {
    const json j = json::parse(text);
    Forest forest;
    forest.schema_width = j.at("schema_width").get<Eigen::Index>();
    forest.params = cart_from_json(j.at("params"));
    forest.bootstrap_seeds = j.at("bootstrap_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& mask : j.at("feature_masks")) {
        forest.feature_masks.push_back(mask.get<std::vector<bool>>());
    }
    for (const auto& tree : j.at("trees")) {
        forest.trees.push_back(tree_from_json_obj(tree));
    }
    if (forest.trees.size() != forest.feature_masks.size() ||
        forest.trees.size() != forest.bootstrap_seeds.size()) {
        throw IngestError("forest JSON arrays have inconsistent lengths");
    }
    return forest;
}

std::string prune_result_to_json(const PruneResult& result) {
    json j;
    j["method"] = to_string(result.method);
    j["selected"] = result.selected;
    json weights = json::array();
    for (Eigen::Index i = 0; i < result.weights.size(); ++i) weights.push_back(result.weights(i));
    j["weights"] = std::move(weights);
    j["validation_mspe"] = result.validation_mspe;
    j["trace"] = result.trace;
    j["lasso_fallback"] = result.lasso_fallback;
    j["lasso_lambda"] = result.lasso_lambda;
    return j.dump(2);
}

PruneResult prune_result_from_json(const std::string& text) {
    const json j = json::parse(text);
    PruneResult result;
    result.method = prune_method_from_string(j.at("method").get<std::string>());
    result.selected = j.at("selected").get<std::vector<int>>();
    const auto weights = j.at("weights").get<std::vector<double>>();
    result.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                                       static_cast<Eigen::Index>(weights.size()));
    result.validation_mspe = j.value("validation_mspe", 0.0);
    result.trace = j.value("trace", std::vector<double>{});
    result.lasso_fallback = j.value("lasso_fallback", false);
    result.lasso_lambda = j.value("lasso_lambda", 0.0);
    return result;
}

std::string merged_tree_to_json(const MergedTree& merged) {
    json j;
    j["source_indices"] = merged.source_indices;
    json weights = json::array();
    for (Eigen::Index i = 0; i < merged.source_weights.size(); ++i) {
        weights.push_back(merged.source_weights(i));
    }
    j["source_weights"] = std::move(weights);
    j["leaf_count"] = merged.leaf_count;
    j["tree"] = tree_to_json_obj(merged.tree);
    return j.dump(2);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig config;
    if (j.contains("scenario")) {
        config.scenario = scenario_from_json(j.at("scenario"));
        config.B = config.scenario->forest_size;
    }
    if (j.contains("csv")) {
        CsvSource source;
        const json& c = j.at("csv");
        source.path = c.at("path").get<std::string>();
        source.response_column = c.at("response_column").get<std::string>();
        if (c.contains("ordinal_levels")) {
            source.options.ordinal_levels =
                c.at("ordinal_levels").get<std::map<std::string, std::vector<std::string>>>();
        }
        config.csv = std::move(source);
    }
    config.B = j.value("B", config.B);
    if (config.scenario) config.scenario->forest_size = config.B;
    if (j.contains("methods")) config.methods = methods_from_json(j.at("methods"));
    config.K = j.value("K", config.K);
    config.max_trees = j.value("max_trees", config.max_trees);
    config.reps = j.value("reps", config.reps);
    if (j.contains("ratios")) {
        const auto ratios = j.at("ratios").get<std::vector<double>>();
        if (ratios.size() != 3) throw ConfigError("ratios must have exactly 3 entries");
        config.ratios = {ratios[0], ratios[1], ratios[2]};
    }
    config.master_seed = j.value("master_seed", config.master_seed);
    if (j.contains("cart")) config.cart = cart_from_json(j.at("cart"));
    config.subspace_rate = j.value("subspace_rate", config.subspace_rate);
    config.threads = j.value("threads", config.threads);
    return config;
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
    json j;
    if (config.scenario) j["scenario"] = scenario_to_json(*config.scenario);
    if (config.csv) {
        json c;
        c["path"] = config.csv->path;
        c["response_column"] = config.csv->response_column;
        if (!config.csv->options.ordinal_levels.empty()) {
            c["ordinal_levels"] = config.csv->options.ordinal_levels;
        }
        j["csv"] = std::move(c);
    }
    j["B"] = config.B;
    json methods = json::array();
    for (PruneMethod method : config.methods) methods.push_back(to_string(method));
    j["methods"] = std::move(methods);
    j["K"] = config.K;
    j["max_trees"] = config.max_trees;
    j["reps"] = config.reps;
    j["ratios"] = config.ratios;
    j["master_seed"] = config.master_seed;
    j["cart"] = cart_to_json(config.cart);
    j["subspace_rate"] = config.subspace_rate;
    j["threads"] = config.threads;
    return j.dump(2);
}

BoundSimulationConfig bound_simulation_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    BoundSimulationConfig config;
    if (!j.contains("scenario")) throw ConfigError("bound simulation config requires 'scenario'");
    config.scenario = scenario_from_json(j.at("scenario"));
    if (j.contains("methods")) config.methods = methods_from_json(j.at("methods"));
    config.reps = j.value("reps", config.reps);
    if (j.contains("ratios")) {
        const auto ratios = j.at("ratios").get<std::vector<double>>();
        if (ratios.size() != 3) throw ConfigError("ratios must have exactly 3 entries");
        config.ratios = {ratios[0], ratios[1], ratios[2]};
    }
    config.K = j.value("K", config.K);
    if (j.contains("cart")) config.cart = cart_from_json(j.at("cart"));
    config.subspace_rate = j.value("subspace_rate", config.subspace_rate);
    config.threads = j.value("threads", config.threads);
    if (j.contains("M")) config.M = j.at("M").get<double>();
    return config;
}

std::string prediction_matrix_to_csv(const PredictionMatrix& P) {
    std::ostringstream out;
    out << "row_index";
    for (Eigen::Index j = 0; j < P.values.cols(); ++j) out << ",tree_" << j;
    out << "\n";
    for (Eigen::Index i = 0; i < P.values.rows(); ++i) {
        out << P.row_indices[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < P.values.cols(); ++j) out << "," << fmt(P.values(i, j));
        out << "\n";
    }
    return out.str();
}

std::string records_to_csv(const std::vector<RunRecord>& records) {
    std::ostringstream out;
    out << "rep,method,test_mspe,n_trees,failed,support_shrunk\n";
    for (const auto& record : records) {
        out << record.rep << ",FULL," << fmt(record.full_forest_test_mspe) << ","
            << record.full_forest_trees << ",0,0\n";
        for (const auto& m : record.methods) {
            out << record.rep << "," << to_string(m.method) << ","
                << (m.failed ? std::string("nan") : fmt(m.test_mspe)) << "," << m.n_trees << ","
                << (m.failed ? 1 : 0) << "," << (m.support_shrunk ? 1 : 0) << "\n";
        }
    }
    return out.str();
}

std::vector<RunRecord> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IngestError("records CSV is empty");
    if (line != "rep,method,test_mspe,n_trees,failed,support_shrunk") {
        throw IngestError("records CSV header not recognized");
    }
    std::map<int, RunRecord> by_rep;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() != 6) throw IngestError("records CSV row has wrong field count: " + line);
        const int rep = std::stoi(fields[0]);
        RunRecord& record = by_rep[rep];
        record.rep = rep;
        if (fields[1] == "FULL") {
            record.full_forest_test_mspe = std::stod(fields[2]);
            record.full_forest_trees = std::stoi(fields[3]);
        } else {
            MethodRunResult m;
            m.method = prune_method_from_string(fields[1]);
            m.test_mspe = std::stod(fields[2]);
            m.n_trees = std::stoi(fields[3]);
            m.failed = fields[4] == "1";
            m.support_shrunk = fields[5] == "1";
            record.methods.push_back(std::move(m));
        }
    }
    std::vector<RunRecord> records;
    for (auto& [rep, record] : by_rep) records.push_back(std::move(record));
    return records;
}

std::string summary_to_csv(const std::vector<RunRecord>& records,
                           const std::vector<ComparisonReport>& reports) {
    // Average MSPE / tree counts per method plus the comparison columns.
    auto avg_for = [&](const std::string& name, double& avg_mspe, double& avg_trees) {
        double mspe_sum = 0.0;
        double tree_sum = 0.0;
        int count = 0;
        for (const auto& record : records) {
            if (name == "FULL") {
                mspe_sum += record.full_forest_test_mspe;
                tree_sum += static_cast<double>(record.full_forest_trees);
                ++count;
            } else {
                for (const auto& m : record.methods) {
                    if (to_string(m.method) == name && !m.failed) {
                        mspe_sum += m.test_mspe;
                        tree_sum += static_cast<double>(m.n_trees);
                        ++count;
                    }
                }
            }
        }
        avg_mspe = count > 0 ? mspe_sum / count : 0.0;
        avg_trees = count > 0 ? tree_sum / count : 0.0;
    };

    std::ostringstream out;
    out << "method,avg_mspe,avg_trees,mspe_delta_pct_vs_full,p_value,freq_mspe_delta_leq_0_pct,"
           "trees_delta_pct_vs_full,trees_p_value,significant_1pct\n";
    double avg_mspe = 0.0;
    double avg_trees = 0.0;
    avg_for("FULL", avg_mspe, avg_trees);
    out << "FULL," << fmt(avg_mspe) << "," << fmt(avg_trees) << ",,,,,,\n";
    for (const auto& report : reports) {
        avg_for(report.method_a, avg_mspe, avg_trees);
        out << report.method_a << "," << fmt(avg_mspe) << "," << fmt(avg_trees) << ","
            << fmt(report.mspe_delta_pct) << "," << fmt(report.p_value) << ","
            << fmt(100.0 * report.freq_delta_leq_0) << "," << fmt(report.trees_delta_pct) << ","
            << fmt(report.trees_p_value) << "," << (report.p_value < kBonferroniAlpha ? 1 : 0)
            << "\n";
    }
    return out.str();
}

std::string comparisons_to_csv(const std::vector<ComparisonReport>& reports) {
    std::ostringstream out;
    out << "method_a,method_b,mspe_delta_pct,p_value,freq_mspe_delta_leq_0_pct,trees_delta_pct,"
           "trees_p_value\n";
    for (const auto& report : reports) {
        out << report.method_a << "," << report.method_b << "," << fmt(report.mspe_delta_pct)
            << "," << fmt(report.p_value) << "," << fmt(100.0 * report.freq_delta_leq_0) << ","
            << fmt(report.trees_delta_pct) << "," << fmt(report.trees_p_value) << "\n";
    }
    return out.str();
}

std::string bound_reports_to_csv(const std::vector<BoundSummaryRow>& rows) {
    std::ostringstream out;
    out << "method,breach_pct,use_pct_mean,use_pct_sd,risk_delta_pct_mean,risk_delta_pct_sd\n";
    for (const auto& row : rows) {
        out << to_string(row.method) << "," << fmt(row.breach_pct) << "," << fmt(row.use_pct_mean)
            << "," << (row.use_pct_sd ? fmt(*row.use_pct_sd) : std::string()) << ","
            << fmt(row.risk_delta_pct_mean) << ","
            << (row.risk_delta_pct_sd ? fmt(*row.risk_delta_pct_sd) : std::string()) << "\n";
    }
    return out.str();
}

std::string lambda_path_to_csv(const LambdaPath& path) {
    std::ostringstream out;
    out << "lambda,cv_mean,cv_se,nonzero_count\n";
    for (std::size_t l = 0; l < path.lambdas.size(); ++l) {
        out << fmt(path.lambdas[l]) << ",";
        if (l < path.cv_mean.size()) out << fmt(path.cv_mean[l]);
        out << ",";
        if (l < path.cv_se.size()) out << fmt(path.cv_se[l]);
        out << ",";
        if (l < path.fits.size()) out << path.fits[l].nonzero_count();
        out << "\n";
    }
    return out.str();
}

std::string mds_layout_to_csv(const MdsLayout& layout, const std::vector<double>& individual_mspe,
                              const std::vector<int>& selected) {
    std::ostringstream out;
    out << "tree_index,x,y,selected_flag,individual_mspe\n";
    for (Eigen::Index i = 0; i < layout.coordinates.rows(); ++i) {
        const bool flagged =
            std::find(selected.begin(), selected.end(), static_cast<int>(i)) != selected.end();
        out << i << "," << fmt(layout.coordinates(i, 0)) << ","
            << fmt(layout.coordinates.cols() > 1 ? layout.coordinates(i, 1) : 0.0) << ","
            << (flagged ? 1 : 0) << ","
            << fmt(i < static_cast<Eigen::Index>(individual_mspe.size())
                       ? individual_mspe[static_cast<std::size_t>(i)]
                       : 0.0)
            << "\n";
    }
    return out.str();
}

std::string manifest_to_json(const ExperimentConfig& config,
                             const std::vector<RunRecord>& records) {
    json j;
    j["software"] = std::string("forestprune ") + kVersion;
    j["config"] = json::parse(experiment_config_to_json(config));
    json seeds = json::array();
    for (const auto& record : records) {
        seeds.push_back(derive_seed(config.master_seed, static_cast<std::uint64_t>(record.rep)));
    }
    j["rep_seeds"] = std::move(seeds);
    json timings;
    for (PruneMethod method : config.methods) {
        double total = 0.0;
        int count = 0;
        for (const auto& record : records) {
            for (const auto& m : record.methods) {
                if (m.method == method) {
                    total += m.wall_seconds;
                    ++count;
                }
            }
        }
        timings[to_string(method)] = count > 0 ? total / count : 0.0;
    }
    j["mean_prune_seconds"] = std::move(timings);
    return j.dump(2);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestError("cannot write file: " + path);
    out << content;
}

}  // namespace forestprune
