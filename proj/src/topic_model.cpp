#include "rost/topic_model.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "rost/world.hpp"

namespace rost {

int pick_refinement_time(int T, double eta, Rng& rng) {
    if (T <= 1) return 1;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < eta) return T;
    std::uniform_int_distribution<int> past(1, T - 1);
    return past(rng);
}

TopicModel::TopicModel(const ModelConfig& cfg) : cfg_(cfg) {
    if (cfg_.topics <= 0 || cfg_.vocab <= 0)
        throw std::invalid_argument("TopicModel: K and V must be positive");
    topic_word_ = Eigen::MatrixXd::Zero(cfg_.topics, cfg_.vocab);
    topic_totals_ = Eigen::VectorXd::Zero(cfg_.topics);
    observed_at_.resize(1);  // slot 0 unused, timesteps are 1-based
}

void TopicModel::add_observation(const CellKey& c, std::span<const int> words, Rng& rng) {
    for (int w : words)
        if (w < 0 || w >= cfg_.vocab)
            throw std::invalid_argument("add_observation: word id out of vocabulary");
    auto& cell = cells_[c];
    if (cell.topic_counts.size() == 0)
        cell.topic_counts = Eigen::VectorXd::Zero(cfg_.topics);
    std::uniform_int_distribution<int> uniform_topic(0, cfg_.topics - 1);
    for (int w : words) {
        int z = uniform_topic(rng);
        cell.words.push_back(w);
        cell.labels.push_back(z);
        cell.topic_counts(z) += 1;
        topic_word_(z, w) += 1;
        topic_totals_(z) += 1;
        ++total_words_;
    }
}

void TopicModel::mark_observed(int timestep, const CellKey& c) {
    if (timestep < 1) throw std::invalid_argument("mark_observed: timestep must be >= 1");
    if (static_cast<size_t>(timestep) >= observed_at_.size())
        observed_at_.resize(timestep + 1);
    observed_at_[timestep].push_back(c);
}

Eigen::VectorXd TopicModel::neighborhood_counts(const CellKey& c) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(cfg_.topics);
    auto it = cells_.find(c);
    if (it != cells_.end()) g += it->second.topic_counts;
    for (const CellKey& n : neighbors(c, cfg_.neighborhood, cfg_.dims)) {
        auto nit = cells_.find(n);
        if (nit != cells_.end()) g += nit->second.topic_counts;
    }
    return g;
}

Eigen::VectorXd TopicModel::gibbs_conditional(int w, const CellKey& c) const {
    const double vbeta = cfg_.vocab * cfg_.beta;
    Eigen::VectorXd g = neighborhood_counts(c);
    const double gdenom = g.sum() + cfg_.topics * cfg_.alpha;
    Eigen::VectorXd p(cfg_.topics);
    for (int k = 0; k < cfg_.topics; ++k) {
        p(k) = (topic_word_(k, w) + cfg_.beta) / (topic_totals_(k) + vbeta) *
               (g(k) + cfg_.alpha) / gdenom;
    }
    return p / p.sum();
}

void TopicModel::decrement(int w, int z, CellData& cell) {
    cell.topic_counts(z) -= 1;
    topic_word_(z, w) -= 1;
    topic_totals_(z) -= 1;
}

void TopicModel::increment(int w, int z, CellData& cell) {
    cell.topic_counts(z) += 1;
    topic_word_(z, w) += 1;
    topic_totals_(z) += 1;
}

int TopicModel::sample_label(const Eigen::VectorXd& weights, Rng& rng) const {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double u = u01(rng) * weights.sum();
    double acc = 0;
    for (int k = 0; k < weights.size(); ++k) {
        acc += weights(k);
        if (u <= acc) return k;
    }
    return static_cast<int>(weights.size()) - 1;
}

void TopicModel::resample_cell(const CellKey& c, Rng& rng) {
    auto it = cells_.find(c);
    if (it == cells_.end()) return;
    CellData& cell = it->second;
    const double vbeta = cfg_.vocab * cfg_.beta;

    // neighbor contribution to n_G is fixed during the sweep; only c's own
    // counts move
    Eigen::VectorXd gfixed = Eigen::VectorXd::Zero(cfg_.topics);
    for (const CellKey& n : neighbors(c, cfg_.neighborhood, cfg_.dims)) {
        auto nit = cells_.find(n);
        if (nit != cells_.end()) gfixed += nit->second.topic_counts;
    }

    Eigen::VectorXd p(cfg_.topics);
    for (size_t i = 0; i < cell.words.size(); ++i) {
        const int w = cell.words[i];
        decrement(w, cell.labels[i], cell);
        for (int k = 0; k < cfg_.topics; ++k) {
            p(k) = (topic_word_(k, w) + cfg_.beta) / (topic_totals_(k) + vbeta) *
                   (gfixed(k) + cell.topic_counts(k) + cfg_.alpha);
        }
        const int z = sample_label(p, rng);
        cell.labels[i] = z;
        increment(w, z, cell);
    }
}

std::vector<CellKey> TopicModel::cell_keys_row_major() const {
    std::vector<CellKey> keys;
    keys.reserve(cells_.size());
    for (const auto& [key, _] : cells_) keys.push_back(key);
    std::sort(keys.begin(), keys.end(), [](const CellKey& a, const CellKey& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    return keys;
}

void TopicModel::batch_refine(int iterations, Rng& rng) {
    const auto keys = cell_keys_row_major();
    for (int it = 0; it < iterations; ++it)
        for (const CellKey& c : keys) resample_cell(c, rng);
}

void TopicModel::realtime_refine(int T, const RefinementConfig& cfg, Rng& rng) {
    if (observed_at_.size() <= 1) return;
    using clock = std::chrono::steady_clock;
    const auto deadline =
        clock::now() + std::chrono::duration_cast<clock::duration>(
                           std::chrono::duration<double, std::milli>(cfg.budget_ms));
    T = std::min<int>(T, static_cast<int>(observed_at_.size()) - 1);
    bool refined_any = false;
    int draws = 0;
    while (true) {
        const int t = pick_refinement_time(T, cfg.eta, rng);
        ++draws;
        for (const CellKey& c : observed_at_[t]) {
            if (refined_any && clock::now() >= deadline) return;
            resample_cell(c, rng);
            refined_any = true;
        }
        if (cfg.max_draws > 0 && draws >= cfg.max_draws) return;
        if (clock::now() >= deadline) return;
        if (!refined_any) return;  // nothing to refine at any drawn time
    }
}

Eigen::VectorXd TopicModel::theta(const CellKey& c) const {
    Eigen::VectorXd g = neighborhood_counts(c).array() + cfg_.alpha;
    return g / g.sum();
}

Eigen::VectorXd TopicModel::phi(int k) const {
    Eigen::VectorXd p = topic_word_.row(k).array() + cfg_.beta;
    return p / p.sum();
}

Eigen::VectorXd TopicModel::cell_topic_counts(const CellKey& c) const {
    auto it = cells_.find(c);
    if (it == cells_.end()) return Eigen::VectorXd::Zero(cfg_.topics);
    return it->second.topic_counts;
}

static const std::vector<int> kEmptyInts;

const std::vector<int>& TopicModel::cell_words(const CellKey& c) const {
    auto it = cells_.find(c);
    return it == cells_.end() ? kEmptyInts : it->second.words;
}

const std::vector<int>& TopicModel::cell_labels(const CellKey& c) const {
    auto it = cells_.find(c);
    return it == cells_.end() ? kEmptyInts : it->second.labels;
}

int TopicModel::majority_label(const CellKey& c) const {
    auto it = cells_.find(c);
    if (it == cells_.end() || it->second.words.empty()) return -1;
    const Eigen::VectorXd& counts = it->second.topic_counts;
    int best = 0;
    for (int k = 1; k < cfg_.topics; ++k)
        if (counts(k) > counts(best)) best = k;
    return best;
}

// --- checkpoint ---

void TopicModel::save(std::ostream& os) const {
    os << "ROSTMODEL 1\n";
    os << "K " << cfg_.topics << " V " << cfg_.vocab << "\n";
    const auto prec = os.precision(17);
    os << "ALPHA " << cfg_.alpha << " BETA " << cfg_.beta << "\n";
    os.precision(prec);
    os << "NEIGHBORHOOD " << cfg_.neighborhood.spatial_radius << " "
       << cfg_.neighborhood.temporal_depth << "\n";
    os << "DIMS " << cfg_.dims.width << " " << cfg_.dims.height << " "
       << cfg_.dims.timesteps << "\n";
    os << "CELLS " << cells_.size() << "\n";
    for (const CellKey& c : cell_keys_row_major()) {
        const CellData& cell = cells_.at(c);
        os << c.x << " " << c.y << " " << c.t << " " << cell.words.size();
        for (size_t i = 0; i < cell.words.size(); ++i)
            os << " " << cell.words[i] << ":" << cell.labels[i];
        os << "\n";
    }
}

TopicModel TopicModel::load(std::istream& is) {
    std::string tag;
    int version;
    is >> tag >> version;
    if (tag != "ROSTMODEL" || version != 1)
        throw std::runtime_error("model checkpoint: bad header");
    ModelConfig cfg;
    is >> tag >> cfg.topics >> tag >> cfg.vocab;
    is >> tag >> cfg.alpha >> tag >> cfg.beta;
    is >> tag >> cfg.neighborhood.spatial_radius >> cfg.neighborhood.temporal_depth;
    is >> tag >> cfg.dims.width >> cfg.dims.height >> cfg.dims.timesteps;
    size_t ncells;
    is >> tag >> ncells;
    if (!is) throw std::runtime_error("model checkpoint: truncated header");
    TopicModel model(cfg);
    for (size_t i = 0; i < ncells; ++i) {
        CellKey c;
        size_t nwords;
        is >> c.x >> c.y >> c.t >> nwords;
        auto& cell = model.cells_[c];
        cell.topic_counts = Eigen::VectorXd::Zero(cfg.topics);
        for (size_t j = 0; j < nwords; ++j) {
            std::string pair;
            is >> pair;
            auto colon = pair.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("model checkpoint: malformed assignment");
            int w = std::stoi(pair.substr(0, colon));
            int z = std::stoi(pair.substr(colon + 1));
            cell.words.push_back(w);
            cell.labels.push_back(z);
            cell.topic_counts(z) += 1;
            model.topic_word_(z, w) += 1;
            model.topic_totals_(z) += 1;
            ++model.total_words_;
        }
    }
    if (!is) throw std::runtime_error("model checkpoint: truncated cell data");
    return model;
}

void TopicModel::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    save(os);
}

TopicModel TopicModel::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return load(is);
}

// --- fold-in labeling ---

Labeling fold_in_label(const WordMap& map, const TopicModel& frozen, int iterations,
                       Rng& rng) {
    const ModelConfig& cfg = frozen.config();
    const int K = cfg.topics;
    const int W = map.width(), H = map.height();
    const GridDims dims{W, H, 1};

    // frozen per-topic word term of the conditional
    Eigen::MatrixXd phi(K, cfg.vocab);
    for (int k = 0; k < K; ++k) phi.row(k) = frozen.phi(k).transpose();

    struct FoldCell {
        std::vector<int> words;
        std::vector<int> labels;
        Eigen::VectorXd counts;
    };
    std::vector<FoldCell> grid(static_cast<size_t>(W) * H);

    std::uniform_int_distribution<int> uniform_topic(0, K - 1);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            FoldCell& fc = grid[static_cast<size_t>(y) * W + x];
            fc.words = map.observe({x, y, 0});
            fc.counts = Eigen::VectorXd::Zero(K);
            for (size_t i = 0; i < fc.words.size(); ++i) {
                int z = uniform_topic(rng);
                fc.labels.push_back(z);
                fc.counts(z) += 1;
            }
        }
    }

    Eigen::VectorXd p(K);
    for (int it = 0; it < iterations; ++it) {
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                FoldCell& fc = grid[static_cast<size_t>(y) * W + x];
                if (fc.words.empty()) continue;
                Eigen::VectorXd gfixed = Eigen::VectorXd::Zero(K);
                for (const CellKey& n : neighbors({x, y, 0}, cfg.neighborhood, dims))
                    gfixed += grid[static_cast<size_t>(n.y) * W + n.x].counts;
                for (size_t i = 0; i < fc.words.size(); ++i) {
                    const int w = fc.words[i];
                    fc.counts(fc.labels[i]) -= 1;
                    for (int k = 0; k < K; ++k)
                        p(k) = phi(k, w) * (gfixed(k) + fc.counts(k) + cfg.alpha);
                    double u = u01(rng) * p.sum();
                    double acc = 0;
                    int z = K - 1;
                    for (int k = 0; k < K; ++k) {
                        acc += p(k);
                        if (u <= acc) { z = k; break; }
                    }
                    fc.labels[i] = z;
                    fc.counts(z) += 1;
                }
            }
        }
    }

    Labeling out{W, H, K, std::vector<int>(static_cast<size_t>(W) * H, -1)};
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const FoldCell& fc = grid[static_cast<size_t>(y) * W + x];
            if (fc.words.empty()) continue;
            int best = 0;
            for (int k = 1; k < K; ++k)
                if (fc.counts(k) > fc.counts(best)) best = k;
            out.at(x, y) = best;
        }
    }
    return out;
}

}  // namespace rost
