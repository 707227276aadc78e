#pragma once

#include <Eigen/Dense>
#include <span>

#include "rost/core.hpp"
#include "rost/topic_model.hpp"

namespace rost {

/// Topic-label counts accumulated over all words observed along the path.
struct PathTopicHistory {
    Eigen::VectorXd counts;

    explicit PathTopicHistory(int topics = 0) : counts(Eigen::VectorXd::Zero(topics)) {}

    void add_labels(std::span<const int> labels) {
        for (int z : labels) counts(z) += 1;
    }
    double total() const { return counts.sum(); }
};

/// Smoothed P(k|P): entry k proportional to counts[k] + alpha.
Eigen::VectorXd path_topic_distribution(const PathTopicHistory& history, double alpha);

/// Inverse geometric mean of the observed words' likelihood under the model
/// mixed by the path topic distribution. Empty word list scores 1 (neutral).
double word_perplexity(std::span<const int> words, const TopicModel& model,
                       const PathTopicHistory& path);

/// Perplexity in topic space: draws one provisional label per word from the
/// posterior conditional at cell c (model counts untouched), then scores the
/// labels against the path topic distribution. Empty word list scores 1.
double topic_perplexity(std::span<const int> words, const TopicModel& model,
                        const CellKey& c, const PathTopicHistory& path, Rng& rng);

}  // namespace rost
