#include "rost/exploration.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

namespace rost {

Policy policy_from_string(const std::string& name) {
    if (name == "random") return Policy::RandomWalk;
    if (name == "coverage") return Policy::StochasticCoverage;
    if (name == "wordppx") return Policy::WordPerplexity;
    if (name == "topicppx") return Policy::TopicPerplexity;
    throw std::invalid_argument("unknown policy: " + name);
}

std::string policy_name(Policy p) {
    switch (p) {
        case Policy::RandomWalk: return "random";
        case Policy::StochasticCoverage: return "coverage";
        case Policy::WordPerplexity: return "wordppx";
        case Policy::TopicPerplexity: return "topicppx";
    }
    return "?";
}

double repulsive_potential(const CellKey& g, const ExplorationState& state) {
    double potential = 0;
    for (const auto& [c, n] : state.visit_counts) {
        const double dx = g.x - c.x, dy = g.y - c.y;
        const double d2 = std::max(1.0, dx * dx + dy * dy);
        potential += n / d2;
    }
    return potential;
}

std::vector<double> step_weights(Policy policy, const std::vector<CellKey>& candidates,
                                 const ExplorationState& state, const TopicModel& model,
                                 const WordMap& world, Rng& rng,
                                 const ExplorationOptions& opts) {
    std::vector<double> weights(candidates.size(), 1.0);
    if (policy == Policy::RandomWalk) return weights;

    for (size_t i = 0; i < candidates.size(); ++i) {
        const CellKey& g = candidates[i];
        const double potential = repulsive_potential(g, state);
        double score = 1.0;
        if (policy == Policy::WordPerplexity) {
            score = word_perplexity(world.observe(g), model, state.path_topics);
        } else if (policy == Policy::TopicPerplexity) {
            score = topic_perplexity(world.observe(g), model, g, state.path_topics, rng);
        }
        if (opts.gamma != 1.0 && policy != Policy::StochasticCoverage) {
            auto it = state.visit_counts.find(g);
            if (it != state.visit_counts.end())
                score *= std::pow(opts.gamma, it->second);
        }
        weights[i] = potential > 0 ? score / potential : score;
    }

    bool ok = false;
    for (double w : weights)
        if (std::isfinite(w) && w > 0) { ok = true; break; }
    for (double w : weights)
        if (!std::isfinite(w)) { ok = false; break; }
    if (!ok) {
        std::cerr << "step_weights: degenerate weights, falling back to uniform\n";
        std::fill(weights.begin(), weights.end(), 1.0);
    }
    return weights;
}

static std::vector<CellKey> movement_candidates(const CellKey& c, const WordMap& world) {
    // spatial 4-neighbors only; the robot cannot move in time
    std::vector<CellKey> out;
    const int dx[] = {0, -1, 1, 0};
    const int dy[] = {-1, 0, 0, 1};
    for (int i = 0; i < 4; ++i) {
        CellKey n{c.x + dx[i], c.y + dy[i], c.t};
        if (world.in_bounds(n)) out.push_back(n);
    }
    return out;
}

CellKey next_step(Policy policy, ExplorationState& state, const TopicModel& model,
                  const WordMap& world, Rng& rng, const ExplorationOptions& opts,
                  std::vector<double>* weights_out, std::vector<CellKey>* candidates_out) {
    const auto candidates = movement_candidates(state.current, world);
    if (candidates.empty())
        throw std::runtime_error("next_step: no movement candidates");
    auto weights = step_weights(policy, candidates, state, model, world, rng, opts);

    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double total = 0;
    for (double w : weights) total += w;
    double u = u01(rng) * total;
    size_t choice = weights.size() - 1;
    double acc = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u <= acc) { choice = i; break; }
    }

    state.current = candidates[choice];
    state.path.push_back(state.current);
    state.visit_counts[state.current] += 1;
    if (weights_out) *weights_out = std::move(weights);
    if (candidates_out) *candidates_out = candidates;
    return state.current;
}

ExplorationResult run_exploration(const WordMap& world, const ExplorationRunConfig& cfg) {
    ModelConfig mcfg = cfg.model;
    mcfg.vocab = world.vocab().size;
    mcfg.dims = world.dims();

    Rng rng = make_rng(cfg.seed, 1);
    TopicModel model(mcfg);
    ExplorationResult result{{}, model, {}};
    if (cfg.steps <= 0) return result;

    ExplorationState state(mcfg.topics);
    if (cfg.random_start) {
        std::uniform_int_distribution<int> ux(0, world.width() - 1);
        std::uniform_int_distribution<int> uy(0, world.height() - 1);
        state.current = {ux(rng), uy(rng), 0};
    } else {
        state.current = cfg.start;
    }
    state.path.push_back(state.current);
    state.visit_counts[state.current] = 1;

    for (int step = 1; step <= cfg.steps; ++step) {
        const CellKey here = state.current;
        const auto& words = world.observe(here);
        if (!model.has_cell(here))
            model.add_observation(here, words, rng);
        model.mark_observed(step, here);
        model.realtime_refine(step, cfg.refinement, rng);

        // path history takes the cell's committed labels as refined at this
        // step (the snapshot at the moment of leaving)
        state.path_topics.add_labels(model.cell_labels(here));

        StepRecord rec;
        rec.step = step;
        rec.cell = here;
        if (step < cfg.steps) {
            std::vector<double> weights;
            std::vector<CellKey> candidates;
            const CellKey chosen = next_step(cfg.policy, state, model, world, rng,
                                             cfg.options, &weights, &candidates);
            for (size_t i = 0; i < candidates.size(); ++i)
                if (candidates[i] == chosen) rec.chosen_weight = weights[i];
            rec.candidates = std::move(candidates);
            rec.weights = std::move(weights);
        }
        result.trace.push_back(std::move(rec));
    }
    result.path = state.path;
    result.model = std::move(model);
    return result;
}

void write_path_csv(const ExplorationResult& result, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "step,x,y,chosen_weight,candidate_weights\n";
    for (const auto& rec : result.trace) {
        os << rec.step << "," << rec.cell.x << "," << rec.cell.y << ","
           << rec.chosen_weight << ",";
        for (size_t i = 0; i < rec.weights.size(); ++i) {
            if (i) os << ";";
            os << rec.candidates[i].x << ":" << rec.candidates[i].y << ":"
               << rec.weights[i];
        }
        os << "\n";
    }
}

}  // namespace rost
