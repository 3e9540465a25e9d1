// forestprune command-line interface.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

#include <CLI11.hpp>

#include "forestprune/analysis.hpp"
#include "forestprune/bounds.hpp"
#include "forestprune/errors.hpp"
#include "forestprune/experiment.hpp"
#include "forestprune/merge.hpp"
#include "forestprune/serialize.hpp"
#include "forestprune/version.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fp = forestprune;
namespace fs = std::filesystem;

namespace {

std::string default_output_dir() {
    if (const char* env = std::getenv("FORESTPRUNE_OUTPUT_DIR")) return env;
    return ".";
}

fs::path prepare_output_dir(const std::string& dir) {
    fs::path path(dir);
    fs::create_directories(path);
    return path;
}

fp::Dataset load_dataset_arg(const std::string& path, const std::string& response,
                             const std::vector<std::string>& ordinal_specs) {
    fp::CsvOptions options;
    for (const auto& spec : ordinal_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw fp::ConfigError("--ordinal expects col=level1|level2|..., got '" + spec + "'");
        }
        std::vector<std::string> levels;
        std::string column = spec.substr(0, eq);
        std::string rest = spec.substr(eq + 1);
        std::size_t start = 0;
        while (true) {
            const auto bar = rest.find('|', start);
            levels.push_back(rest.substr(start, bar - start));
            if (bar == std::string::npos) break;
            start = bar + 1;
        }
        options.ordinal_levels[column] = std::move(levels);
    }
    return fp::load_csv(path, response, options);
}

void check_schema(const fp::Forest& forest, const fp::Dataset& data) {
    if (data.cols() != forest.schema_width) {
        throw std::runtime_error("dataset width " + std::to_string(data.cols()) +
                                 " does not match forest schema width " +
                                 std::to_string(forest.schema_width));
    }
}

std::vector<Eigen::Index> all_rows(const fp::Dataset& data) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index i = 0; i < data.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
    return rows;
}

int cmd_simulate(const std::string& config_path, const std::string& output_dir,
                 std::optional<std::uint64_t> seed_override, std::optional<int> threads_override) {
    if (!fs::exists(config_path)) {
        std::cerr << "config file not found: " << config_path << "\n";
        return 2;
    }
    fp::ExperimentConfig config;
    try {
        config = fp::experiment_config_from_json(fp::read_file(config_path));
        if (seed_override) config.master_seed = *seed_override;
        if (threads_override) config.threads = *threads_override;
        config.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    const auto records = fp::run_experiment(config);
    const auto reports = fp::summarize(records, config.methods);

    const fs::path out = prepare_output_dir(output_dir);
    fp::write_file((out / "records.csv").string(), fp::records_to_csv(records));
    fp::write_file((out / "summary.csv").string(), fp::summary_to_csv(records, reports));
    fp::write_file((out / "manifest.json").string(), fp::manifest_to_json(config, records));

    std::cout << fp::summary_to_csv(records, reports);
    std::cout << "wrote " << (out / "records.csv").string() << ", summary.csv, manifest.json\n";
    return 0;
}

int cmd_prune(const std::string& forest_path, const std::string& data_path,
              const std::string& response, const std::string& method_name, int K, int max_trees,
              std::uint64_t seed, const std::string& output,
              const std::vector<std::string>& ordinals, const std::string& path_csv,
              const std::string& predictions_csv) {
    const fp::Forest forest = fp::forest_from_json(fp::read_file(forest_path));
    const fp::Dataset data = load_dataset_arg(data_path, response, ordinals);
    check_schema(forest, data);

    const auto rows = all_rows(data);
    const fp::PredictionMatrix P = fp::prediction_matrix(forest, data, rows);
    if (!predictions_csv.empty()) {
        fp::write_file(predictions_csv, fp::prediction_matrix_to_csv(P));
    }
    const fp::PruneMethod method = fp::prune_method_from_string(method_name);

    fp::PruneResult result;
    switch (method) {
        case fp::PruneMethod::SFS: result = fp::prune_sfs(P, data.response); break;
        case fp::PruneMethod::SBS_PRIME: result = fp::prune_sbs_prime(P, data.response); break;
        case fp::PruneMethod::BSF: result = fp::prune_bsf(P, data.response, K); break;
        case fp::PruneMethod::LASSO: {
            fp::PruneOptions options;
            options.seed = seed;
            result = fp::prune_lasso(P, data.response, options);
            break;
        }
        case fp::PruneMethod::LASSO_K: {
            fp::PruneOptions options;
            options.lasso_max_trees = max_trees;
            options.seed = seed;
            result = fp::prune_lasso(P, data.response, options);
            break;
        }
    }

    if (!path_csv.empty() &&
        (method == fp::PruneMethod::LASSO || method == fp::PruneMethod::LASSO_K)) {
        // Same folds and grid as the pruning run: the full-design curve the
        // initial selection came from.
        fp::PruneOptions options;
        options.seed = seed;
        const fp::CvSelection cv =
            fp::cv_select_lambda(P.values, data.response, options.lasso_folds, seed,
                                 options.lasso, options.lasso_grid_count, options.lasso_min_ratio);
        fp::write_file(path_csv, fp::lambda_path_to_csv(cv.path));
    }

    fp::write_file(output, fp::prune_result_to_json(result));
    std::cout << "method " << fp::to_string(result.method) << " selected";
    for (int index : result.selected) std::cout << " " << index;
    std::cout << "\nvalidation MSPE " << result.validation_mspe << "\n";
    std::cout << "wrote " << output << "\n";
    return 0;
}

int cmd_merge(const std::string& forest_path, const std::string& result_path,
              const std::string& output, std::int64_t max_leaves, bool coalesce) {
    const fp::Forest forest = fp::forest_from_json(fp::read_file(forest_path));
    const fp::PruneResult result = fp::prune_result_from_json(fp::read_file(result_path));
    for (int index : result.selected) {
        if (index < 0 || index >= forest.size()) {
            throw std::runtime_error("prune result selects tree " + std::to_string(index) +
                                     " but the forest has " + std::to_string(forest.size()) +
                                     " trees");
        }
    }

    std::vector<fp::RegressionTree> trees;
    for (int index : result.selected) {
        trees.push_back(forest.trees[static_cast<std::size_t>(index)]);
    }
    fp::MergeOptions options;
    options.max_leaves = max_leaves;
    options.coalesce_equal_leaves = coalesce;
    const fp::MergedTree merged = fp::merge_trees(trees, result.weights, options, result.selected);

    fp::write_file(output, fp::merged_tree_to_json(merged));
    std::cout << merged.tree.to_text();
    std::cout << "leaves " << merged.leaf_count << ", depth " << merged.tree.depth() << "\n";
    std::cout << "wrote " << output << "\n";
    return 0;
}

int cmd_bounds_calc(const std::string& which, const fp::BoundInputs& inputs,
                    std::int64_t cardinality, double tau, double sigma) {
    auto print = [](const std::string& name, double value) {
        std::cout << name << "," << value << "\n";
    };
    std::cout << "bound,value\n";
    if (which == "lasso_gen" || which == "all") {
        print("lasso_gen", fp::lasso_generalization_bound(inputs));
    }
    if (which == "bsf" || which == "all") print("bsf", fp::bsf_bound(inputs));
    if (which == "sfs" || which == "all") print("sfs", fp::sfs_bound(inputs));
    if (which == "finite" || which == "all") {
        print("finite", fp::finite_class_bound(cardinality, inputs.n, inputs.delta, inputs.M));
    }
    if (which == "lasso_risk" || which == "all") {
        print("lasso_risk", fp::lasso_risk_bound(tau, inputs.M, sigma, inputs.B, inputs.n));
    }
    return 0;
}

int cmd_bounds_simulate(const std::string& config_path, const std::string& output_dir) {
    if (!fs::exists(config_path)) {
        std::cerr << "config file not found: " << config_path << "\n";
        return 2;
    }
    fp::BoundSimulationConfig config;
    try {
        config = fp::bound_simulation_config_from_json(fp::read_file(config_path));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    const auto reports = fp::simulate_bounds(config);
    const auto rows = fp::aggregate_bound_reports(reports);
    const std::string csv = fp::bound_reports_to_csv(rows);
    const fs::path out = prepare_output_dir(output_dir);
    fp::write_file((out / "bound_reports.csv").string(), csv);
    std::cout << csv;
    std::cout << "wrote " << (out / "bound_reports.csv").string() << "\n";
    return 0;
}

int cmd_viz(const std::string& forest_path, const std::string& data_path,
            const std::string& response, const std::string& result_path, const std::string& output,
            const std::vector<std::string>& ordinals) {
    const fp::Forest forest = fp::forest_from_json(fp::read_file(forest_path));
    const fp::Dataset data = load_dataset_arg(data_path, response, ordinals);
    check_schema(forest, data);

    const auto rows = all_rows(data);
    const fp::PredictionMatrix P = fp::prediction_matrix(forest, data, rows);
    const fp::CorrelationDistance distance = fp::correlation_distance(P);
    const fp::MdsLayout layout = fp::classical_mds(distance.D, 2);

    std::vector<double> individual(static_cast<std::size_t>(forest.size()));
    for (int i = 0; i < forest.size(); ++i) {
        individual[static_cast<std::size_t>(i)] = fp::mspe(P.values.col(i), data.response);
    }
    std::vector<int> selected;
    if (!result_path.empty()) {
        selected = fp::prune_result_from_json(fp::read_file(result_path)).selected;
    }

    fp::write_file(output, fp::mds_layout_to_csv(layout, individual, selected));
    std::cout << "wrote " << output << " (" << forest.size() << " trees, stress " << layout.stress
              << ")\n";
    return 0;
}

int cmd_report(const std::string& records_path, const std::string& output,
               const std::string& baseline) {
    const auto records = fp::records_from_csv(fp::read_file(records_path));
    std::vector<fp::PruneMethod> methods;
    for (const auto& record : records) {
        for (const auto& m : record.methods) {
            if (std::find(methods.begin(), methods.end(), m.method) == methods.end()) {
                methods.push_back(m.method);
            }
        }
    }
    std::optional<fp::PruneMethod> base;
    if (!baseline.empty() && baseline != "FULL") {
        base = fp::prune_method_from_string(baseline);
    }
    const auto reports = fp::summarize(records, methods, base);
    const std::string csv =
        base ? fp::comparisons_to_csv(reports) : fp::summary_to_csv(records, reports);
    fp::write_file(output, csv);
    std::cout << csv;
    std::cout << "wrote " << output << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forestprune: train, prune, merge and analyze regression forests"};
    app.set_version_flag("--version", std::string("forestprune ") + fp::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir = default_output_dir();
    std::string forest_path;
    std::string data_path;
    std::string response;
    std::string method = "LASSO";
    std::string output;
    std::string result_path;
    std::string baseline = "FULL";
    std::string which = "all";
    std::vector<std::string> ordinals;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> threads_override;
    std::uint64_t seed = 0;
    int K = 4;
    int max_trees = 4;
    std::int64_t max_leaves = 1'000'000;
    bool coalesce = false;
    bool simulate_bounds_mode = false;
    std::int64_t cardinality = 1;
    double tau = 1.0;
    double sigma = 1.0;
    fp::BoundInputs inputs;

    auto* simulate = app.add_subcommand("simulate", "Run a scenario or CSV experiment end to end");
    simulate->add_option("--config", config_path, "Experiment JSON config")->required();
    simulate->add_option("--output-dir", output_dir, "Directory for records/summary/manifest");
    simulate->add_option("--seed", seed_override, "Override the config master seed");
    simulate->add_option("--threads", threads_override, "Worker cap (0 = hardware)");

    auto* prune = app.add_subcommand("prune", "Prune a serialized forest on a validation CSV");
    prune->add_option("--forest", forest_path, "Forest JSON file")->required();
    prune->add_option("--data", data_path, "Validation CSV (entire file is the validation set)")
        ->required();
    prune->add_option("--response", response, "Response column name")->required();
    prune->add_option("--method", method, "SFS, SBS_PRIME, BSF, LASSO or LASSO_K");
    prune->add_option("--K", K, "BSF subset cap");
    prune->add_option("--max-trees", max_trees, "LASSO_K cardinality cap");
    prune->add_option("--seed", seed, "CV fold seed");
    prune->add_option("--output", output, "Output JSON path")->default_val("prune_result.json");
    prune->add_option("--ordinal", ordinals, "Ordinal encoding, col=level1|level2|...");
    std::string path_csv;
    std::string predictions_csv;
    prune->add_option("--path-csv", path_csv,
                      "Export the cross-validated lambda path (LASSO methods)");
    prune->add_option("--predictions-csv", predictions_csv,
                      "Export the validation prediction matrix");

    auto* merge = app.add_subcommand("merge", "Merge a pruned selection into a single tree");
    merge->add_option("--forest", forest_path, "Forest JSON file")->required();
    merge->add_option("--prune-result", result_path, "PruneResult JSON file")->required();
    merge->add_option("--output", output, "Output JSON path")->default_val("merged_tree.json");
    merge->add_option("--max-leaves", max_leaves, "Refuse merges beyond this leaf budget");
    merge->add_flag("--coalesce", coalesce, "Join equal-valued sibling leaves");

    auto* bounds = app.add_subcommand("bounds", "Evaluate generalization bounds");
    bounds->add_option("--which", which, "lasso_gen, bsf, sfs, finite, lasso_risk or all");
    bounds->add_option("--n", inputs.n, "Validation sample count");
    bounds->add_option("--B", inputs.B, "Forest size");
    bounds->add_option("--delta", inputs.delta, "Confidence parameter");
    bounds->add_option("--M", inputs.M, "Label range sup(Y)-inf(Y)");
    bounds->add_option("--r", inputs.r, "sup(|inf(Y)|, sup(Y))");
    bounds->add_option("--Lambda", inputs.lambda_budget, "l1 budget of the Lasso class");
    bounds->add_option("--K", inputs.K, "BSF subset cap");
    bounds->add_option("--cardinality", cardinality, "|H| for the finite-class bound");
    bounds->add_option("--tau", tau, "l1 constraint of the risk bound");
    bounds->add_option("--sigma", sigma, "sub-Gaussian noise scale");
    bounds->add_flag("--simulate", simulate_bounds_mode,
                     "Run the bound-validation simulation from --config");
    bounds->add_option("--config", config_path, "Bound simulation JSON config");
    bounds->add_option("--output-dir", output_dir, "Directory for bound_reports.csv");

    auto* viz = app.add_subcommand("viz", "Correlation-distance MDS layout of a forest");
    viz->add_option("--forest", forest_path, "Forest JSON file")->required();
    viz->add_option("--data", data_path, "Validation CSV")->required();
    viz->add_option("--response", response, "Response column name")->required();
    viz->add_option("--prune-result", result_path, "Optional PruneResult JSON for selected flags");
    viz->add_option("--output", output, "Layout CSV path")->default_val("mds_layout.csv");
    viz->add_option("--ordinal", ordinals, "Ordinal encoding, col=level1|level2|...");

    std::string records_path;
    auto* report = app.add_subcommand("report", "Summarize a records CSV");
    report->add_option("--records", records_path, "records.csv from a simulate run")->required();
    report->add_option("--output", output, "Summary CSV path")->default_val("summary.csv");
    report->add_option("--baseline", baseline,
                       "Baseline for comparisons: FULL (default) or a method name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(config_path, output_dir, seed_override, threads_override);
        }
        if (prune->parsed()) {
            return cmd_prune(forest_path, data_path, response, method, K, max_trees, seed, output,
                             ordinals, path_csv, predictions_csv);
        }
        if (merge->parsed()) {
            return cmd_merge(forest_path, result_path, output, max_leaves, coalesce);
        }
        if (bounds->parsed()) {
            if (simulate_bounds_mode) return cmd_bounds_simulate(config_path, output_dir);
            return cmd_bounds_calc(which, inputs, cardinality, tau, sigma);
        }
        if (viz->parsed()) {
            return cmd_viz(forest_path, data_path, response, result_path, output, ordinals);
        }
        if (report->parsed()) {
            return cmd_report(records_path, output, baseline);
        }
    } catch (const fp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
