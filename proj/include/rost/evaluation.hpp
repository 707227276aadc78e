#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rost/exploration.hpp"
#include "rost/topic_model.hpp"
#include "rost/world.hpp"

namespace rost {

/// Mutual information in bits between two labelings on the same grid. Cells
/// unlabeled (-1) in either labeling are excluded pairwise. Throws
/// std::invalid_argument on mismatched grids or empty intersection.
double mutual_information(const Labeling& a, const Labeling& b);

/// Entropy in bits of a labeling's empirical label distribution (unlabeled
/// cells excluded).
double label_entropy(const Labeling& a);

Labeling ground_truth_labeling(const WordMap& world);

/// Batch-mode reference labeling: all cells ingested up front, refined with
/// full random access, majority label per cell.
std::pair<Labeling, TopicModel> batch_oracle_labeling(const WordMap& world,
                                                      const ModelConfig& cfg,
                                                      int iterations, uint64_t seed);

/// Two-sided Mann-Whitney U p-value (normal approximation with tie
/// correction).
double mann_whitney_u_pvalue(const std::vector<double>& a, const std::vector<double>& b);

struct ExperimentConfig {
    std::vector<Policy> policies;
    std::vector<int> path_lengths{10, 20, 40, 80, 160, 320};
    int restarts = 20;
    ModelConfig model;
    RefinementConfig refinement;
    ExplorationOptions options;
    bool random_start = true;  // false: every run starts at `start`, which cuts
                               // start-position variance out of policy comparisons
    CellKey start{};
    int batch_iterations = 100;
    int fold_in_iterations = 50;
    uint64_t seed = 0;
    int threads = 1;
};

struct ExperimentRow {
    std::string map_name;
    Policy policy;
    int path_len = 0;
    int restart = 0;
    double mi_vs_batch = 0;
    std::optional<double> mi_vs_gt;
    double runtime_ms = 0;
    bool failed = false;
};

struct ExperimentSummaryRow {
    std::string map_name;
    Policy policy;
    int path_len = 0;
    int runs = 0;
    double mean_mi_vs_batch = 0, stddev_mi_vs_batch = 0;
    std::optional<double> mean_mi_vs_gt, stddev_mi_vs_gt;
};

struct ExperimentResult {
    std::vector<ExperimentRow> rows;
    std::vector<ExperimentSummaryRow> summary;
};

/// Full protocol: per (policy, path length, restart) run exploration, fold
/// the learned model onto the whole map, score MI against the batch labeling
/// and ground truth. Failed runs are recorded, not fatal.
ExperimentResult run_experiment(const WordMap& world, const std::string& map_name,
                                const ExperimentConfig& cfg);

void write_results_csv(const ExperimentResult& result, const std::string& path);
void write_summary_csv(const ExperimentResult& result, const std::string& path);

}  // namespace rost
