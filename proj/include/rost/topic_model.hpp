#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "rost/core.hpp"

namespace rost {

struct ModelConfig {
    int topics = 64;       // K
    int vocab = 0;         // V
    double alpha = 0.1;    // Dirichlet prior on cell topic distributions
    double beta = 0.1;     // Dirichlet prior on topic word distributions
    NeighborhoodConfig neighborhood;
    GridDims dims;
};

struct RefinementConfig {
    double eta = 0.5;          // refinement bias: P(refine most recent timestep)
    double budget_ms = 200.0;  // wall-clock budget per realtime_refine call
    int max_draws = 0;         // deterministic cap on t-draws per call; 0 = none.
                               // A binding cap makes replays bit-exact, since
                               // wall-clock stopping depends on machine speed.
    int iterations = 100;      // batch mode sweeps
};

/// Returns T with probability eta, else uniform over {1..T-1}. T=1 always
/// returns 1.
int pick_refinement_time(int T, double eta, Rng& rng);

/// ROST sufficient statistics: collapsed representation of the topic model.
/// phi and theta are derived views over counts, never stored.
class TopicModel {
public:
    explicit TopicModel(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }
    int K() const { return cfg_.topics; }
    int V() const { return cfg_.vocab; }

    /// Adds words to cell c, each with a topic label drawn uniformly.
    /// Throws std::invalid_argument on a word id >= V.
    void add_observation(const CellKey& c, std::span<const int> words, Rng& rng);

    /// Records that cell c was observed at the given timestep, making it a
    /// refinement target for realtime_refine. In static-map mode the timestep
    /// is the path step index.
    void mark_observed(int timestep, const CellKey& c);

    /// Posterior topic conditional for word w at cell c, evaluated on current
    /// counts. Callers honoring the "-i" convention must decrement the word's
    /// assignment first. Returns a normalized length-K vector.
    Eigen::VectorXd gibbs_conditional(int w, const CellKey& c) const;

    /// Resamples every word in c sequentially (decrement, sample, increment).
    /// Unknown cell is a no-op.
    void resample_cell(const CellKey& c, Rng& rng);

    /// Full sweeps over all cells in row-major order.
    void batch_refine(int iterations, Rng& rng);

    /// Draws refinement times t ~ P(t|T) and resamples the cells observed at
    /// t until the wall-clock budget elapses or cfg.max_draws times have been
    /// drawn, whichever comes first. The clock is checked between cell sweeps,
    /// so overshoot is bounded by one cell's word count.
    void realtime_refine(int T, const RefinementConfig& cfg, Rng& rng);

    /// Smoothed topic distribution of c's neighborhood (cell + neighbors).
    Eigen::VectorXd theta(const CellKey& c) const;

    /// Smoothed word distribution of topic k.
    Eigen::VectorXd phi(int k) const;

    /// Topic counts summed over c and its neighbors (the n_G^k vector).
    Eigen::VectorXd neighborhood_counts(const CellKey& c) const;

    // --- inspection ---
    long total_words() const { return total_words_; }
    const Eigen::MatrixXd& topic_word_counts() const { return topic_word_; }
    const Eigen::VectorXd& topic_totals() const { return topic_totals_; }
    bool has_cell(const CellKey& c) const { return cells_.count(c) > 0; }
    Eigen::VectorXd cell_topic_counts(const CellKey& c) const;
    const std::vector<int>& cell_words(const CellKey& c) const;
    const std::vector<int>& cell_labels(const CellKey& c) const;
    /// Majority topic of c's words, ties toward the lowest index; -1 if empty.
    int majority_label(const CellKey& c) const;
    std::vector<CellKey> cell_keys_row_major() const;

    // --- checkpoint (textual, bit-exact round trip) ---
    void save(std::ostream& os) const;
    static TopicModel load(std::istream& is);
    void save_file(const std::string& path) const;
    static TopicModel load_file(const std::string& path);

private:
    struct CellData {
        std::vector<int> words;
        std::vector<int> labels;
        Eigen::VectorXd topic_counts;
    };

    void decrement(int w, int z, CellData& cell);
    void increment(int w, int z, CellData& cell);
    int sample_label(const Eigen::VectorXd& weights, Rng& rng) const;

    ModelConfig cfg_;
    Eigen::MatrixXd topic_word_;   // K x V, integral values held as doubles
    Eigen::VectorXd topic_totals_; // K
    std::unordered_map<CellKey, CellData, CellKeyHash> cells_;
    std::vector<std::vector<CellKey>> observed_at_;  // index 1..T
    long total_words_ = 0;
};

/// Per-cell label assignment on a cell grid; -1 marks unlabeled cells.
struct Labeling {
    int width = 0;
    int height = 0;
    int alphabet = 0;
    std::vector<int> labels;  // row-major, size width*height

    int at(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }
    int& at(int x, int y) { return labels[static_cast<size_t>(y) * width + x]; }
};

class WordMap;

/// Labels a map with a frozen model: topic-word counts are held constant,
/// only the query map's cell-topic counts update across the fold-in sweeps.
/// Per-cell label is the majority topic, ties toward the lowest index.
Labeling fold_in_label(const WordMap& map, const TopicModel& frozen, int iterations,
                       Rng& rng);

}  // namespace rost
