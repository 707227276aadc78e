#pragma once

#include <unordered_map>
#include <vector>

#include "rost/core.hpp"
#include "rost/perplexity.hpp"
#include "rost/topic_model.hpp"
#include "rost/world.hpp"

namespace rost {

enum class Policy { RandomWalk, StochasticCoverage, WordPerplexity, TopicPerplexity };

Policy policy_from_string(const std::string& name);
std::string policy_name(Policy p);

struct ExplorationState {
    CellKey current;
    std::unordered_map<CellKey, int, CellKeyHash> visit_counts;
    std::vector<CellKey> path;
    PathTopicHistory path_topics;

    explicit ExplorationState(int topics = 0) : path_topics(topics) {}
};

/// Sum of n_j / d^2(g, c_j) over visited cells, with d^2 clamped below by 1.
double repulsive_potential(const CellKey& g, const ExplorationState& state);

struct ExplorationOptions {
    double gamma = 1.0;  // per-cell curiosity decay multiplier, 1 = off
};

/// Weight of each candidate under the given policy. Non-finite or all-zero
/// weights fall back to uniform.
std::vector<double> step_weights(Policy policy, const std::vector<CellKey>& candidates,
                                 const ExplorationState& state, const TopicModel& model,
                                 const WordMap& world, Rng& rng,
                                 const ExplorationOptions& opts = {});

/// Samples the next cell proportionally to its weight and updates path and
/// visit counts. Candidates are the in-bounds 4-neighbors of the current
/// cell. Throws std::runtime_error when no candidate exists.
CellKey next_step(Policy policy, ExplorationState& state, const TopicModel& model,
                  const WordMap& world, Rng& rng, const ExplorationOptions& opts = {},
                  std::vector<double>* weights_out = nullptr,
                  std::vector<CellKey>* candidates_out = nullptr);

struct StepRecord {
    int step = 0;
    CellKey cell;
    double chosen_weight = 0;
    std::vector<CellKey> candidates;
    std::vector<double> weights;
};

struct ExplorationResult {
    std::vector<CellKey> path;
    TopicModel model;
    std::vector<StepRecord> trace;
};

struct ExplorationRunConfig {
    Policy policy = Policy::RandomWalk;
    int steps = 320;
    ModelConfig model;
    RefinementConfig refinement;
    ExplorationOptions options;
    uint64_t seed = 0;
    CellKey start;        // used when random_start is false
    bool random_start = true;
};

/// Full exploration loop: per step, observe the current cell, add the words
/// to the model (first visit only), refine within the time budget, score the
/// spatial neighbors, and take a stochastic step.
ExplorationResult run_exploration(const WordMap& world, const ExplorationRunConfig& cfg);

void write_path_csv(const ExplorationResult& result, const std::string& path);

}  // namespace rost
