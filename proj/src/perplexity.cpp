#include "rost/perplexity.hpp"

#include <cmath>

namespace rost {

Eigen::VectorXd path_topic_distribution(const PathTopicHistory& history, double alpha) {
    Eigen::VectorXd p = history.counts.array() + alpha;
    return p / p.sum();
}

double word_perplexity(std::span<const int> words, const TopicModel& model,
                       const PathTopicHistory& path) {
    if (words.empty()) return 1.0;
    const int K = model.K();
    const Eigen::VectorXd pk = path_topic_distribution(path, model.config().alpha);
    // mixture word distribution: sum_k P(w|k) P(k|P)
    Eigen::VectorXd mix = Eigen::VectorXd::Zero(model.V());
    for (int k = 0; k < K; ++k) mix += pk(k) * model.phi(k);
    double log_sum = 0;
    for (int w : words) log_sum += std::log(mix(w));
    return std::exp(-log_sum / static_cast<double>(words.size()));
}

double topic_perplexity(std::span<const int> words, const TopicModel& model,
                        const CellKey& c, const PathTopicHistory& path, Rng& rng) {
    if (words.empty()) return 1.0;
    const Eigen::VectorXd pk = path_topic_distribution(path, model.config().alpha);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double log_sum = 0;
    for (int w : words) {
        Eigen::VectorXd cond = model.gibbs_conditional(w, c);
        double u = u01(rng);
        double acc = 0;
        int z = model.K() - 1;
        for (int k = 0; k < model.K(); ++k) {
            acc += cond(k);
            if (u <= acc) { z = k; break; }
        }
        log_sum += std::log(pk(z));
    }
    return std::exp(-log_sum / static_cast<double>(words.size()));
}

}  // namespace rost
