#pragma once

#include "forestprune/analysis.hpp"
#include "forestprune/bounds.hpp"
#include "forestprune/experiment.hpp"
#include "forestprune/forest.hpp"
#include "forestprune/merge.hpp"
#include "forestprune/nnlasso.hpp"
#include "forestprune/pruning.hpp"
#include "forestprune/tree.hpp"

#include <string>
#include <vector>

namespace forestprune {

// JSON round-trips. Numbers serialize with round-trip precision, so equal
// objects produce byte-equal strings.
std::string tree_to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const std::string& text);

std::string forest_to_json(const Forest& forest);
Forest forest_from_json(const std::string& text);

std::string prune_result_to_json(const PruneResult& result);
PruneResult prune_result_from_json(const std::string& text);

std::string merged_tree_to_json(const MergedTree& merged);

/// Experiment config from its JSON file form (see README for the schema).
ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& config);

BoundSimulationConfig bound_simulation_config_from_json(const std::string& text);

// CSV export. All writers emit deterministic text given equal inputs.
std::string prediction_matrix_to_csv(const PredictionMatrix& P);
std::string records_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_csv(const std::string& text);
std::string summary_to_csv(const std::vector<RunRecord>& records,
                           const std::vector<ComparisonReport>& reports);
std::string comparisons_to_csv(const std::vector<ComparisonReport>& reports);
std::string bound_reports_to_csv(const std::vector<BoundSummaryRow>& rows);
std::string lambda_path_to_csv(const LambdaPath& path);
std::string mds_layout_to_csv(const MdsLayout& layout, const std::vector<double>& individual_mspe,
                              const std::vector<int>& selected);

/// Run manifest: config echo, seeds, software version, wall times.
std::string manifest_to_json(const ExperimentConfig& config,
                             const std::vector<RunRecord>& records);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace forestprune
