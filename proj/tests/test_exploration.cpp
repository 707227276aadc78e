#include <doctest.h>

#include <cmath>
#include <set>

#include "rost/exploration.hpp"

using namespace rost;

namespace {

WordMap uniform_map(int w, int h, int vocab = 8, int words_per_cell = 4) {
    WordMap map(w, h, Vocabulary{vocab, {}});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::vector<int> words;
            for (int i = 0; i < words_per_cell; ++i) words.push_back((x + y + i) % vocab);
            map.add_words({x, y, 0}, words);
        }
    return map;
}

ModelConfig model_for(const WordMap& map, int K = 4) {
    ModelConfig cfg;
    cfg.topics = K;
    cfg.vocab = map.vocab().size;
    cfg.dims = map.dims();
    return cfg;
}

}  // namespace

TEST_CASE("repulsive_potential") {
    ExplorationState state(2);
    SUBCASE("empty history -> 0") {
        CHECK(repulsive_potential({3, 3, 0}, state) == 0.0);
    }
    SUBCASE("single visit at distance 1 -> potential 1") {
        state.visit_counts[{3, 3, 0}] = 1;
        CHECK(repulsive_potential({3, 4, 0}, state) == doctest::Approx(1.0));
    }
    SUBCASE("visits at distances 1 and 2 -> 1 + 1/4") {
        state.visit_counts[{3, 3, 0}] = 1;
        state.visit_counts[{3, 2, 0}] = 1;
        CHECK(repulsive_potential({3, 4, 0}, state) == doctest::Approx(1.25));
    }
    SUBCASE("same cell clamps d^2 to 1") {
        state.visit_counts[{3, 3, 0}] = 2;
        CHECK(repulsive_potential({3, 3, 0}, state) == doctest::Approx(2.0));
    }
}

TEST_CASE("step_weights: random walk is uniform") {
    auto rng = make_rng(1);
    auto map = uniform_map(8, 8);
    TopicModel model(model_for(map));
    ExplorationState state(4);
    state.current = {4, 4, 0};
    state.visit_counts[state.current] = 1;
    std::vector<CellKey> cands{{4, 3, 0}, {3, 4, 0}, {5, 4, 0}, {4, 5, 0}};
    auto w = step_weights(Policy::RandomWalk, cands, state, model, map, rng);
    for (double x : w) CHECK(x == 1.0);
}

TEST_CASE("step_weights: coverage prefers the unvisited direction") {
    auto rng = make_rng(2);
    auto map = uniform_map(8, 8);
    TopicModel model(model_for(map));
    ExplorationState state(4);
    // walked straight from (4,2) to (4,3): forward (4,4) is farther from the
    // trail than backward (4,2)
    state.visit_counts[{4, 2, 0}] = 1;
    state.visit_counts[{4, 3, 0}] = 1;
    state.current = {4, 3, 0};
    std::vector<CellKey> cands{{4, 4, 0}, {4, 2, 0}};
    auto w = step_weights(Policy::StochasticCoverage, cands, state, model, map, rng);
    CHECK(w[0] > w[1]);
}

TEST_CASE("next_step: single candidate is forced") {
    auto rng = make_rng(3);
    WordMap map(1, 2, Vocabulary{4, {}});
    TopicModel model(model_for(map));
    ExplorationState state(4);
    state.current = {0, 0, 0};
    state.path.push_back(state.current);
    state.visit_counts[state.current] = 1;
    auto c = next_step(Policy::RandomWalk, state, model, map, rng);
    CHECK(c == CellKey{0, 1, 0});
    CHECK(state.path.size() == 2);
    CHECK(state.visit_counts[c] == 1);
}

TEST_CASE("next_step: 1x1 world throws") {
    auto rng = make_rng(3);
    WordMap map(1, 1, Vocabulary{4, {}});
    TopicModel model(model_for(map));
    ExplorationState state(4);
    state.current = {0, 0, 0};
    CHECK_THROWS_AS(next_step(Policy::RandomWalk, state, model, map, rng),
                    std::runtime_error);
}

TEST_CASE("weight-proportional sampling: 3:1 empirical ratio") {
    // drive the sampler through next_step on a 1-wide corridor where exactly
    // two candidates exist, using a custom check over many draws of the
    // internal choice; easiest direct check: sample via step_weights +
    // next_step distribution on a fresh state each time.
    auto rng = make_rng(4);
    auto map = uniform_map(3, 1);
    TopicModel model(model_for(map));
    // make the two candidates' repulsive potentials differ 1:3 by visit counts
    int left = 0, right = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        ExplorationState state(4);
        state.current = {1, 0, 0};
        state.path.push_back(state.current);
        // weights 1/potential: left potential 1 (one visit at d=1),
        // right potential 3 (three visits at d=1)
        state.visit_counts[{0, 0, 0}] = 1;
        state.visit_counts[{2, 0, 0}] = 3;
        auto c = next_step(Policy::StochasticCoverage, state, model, map, rng);
        (c.x == 0 ? left : right)++;
    }
    // visit counts also repel from distance 2 on the other side; compute the
    // exact expected ratio: w(left)=1/(1/1+3/4)=4/7, w(right)=1/(3/1+1/4)=4/13
    const double expect_left = (4.0 / 7) / (4.0 / 7 + 4.0 / 13);
    CHECK(std::abs(left / double(draws) - expect_left) < 0.01);
}

TEST_CASE("run_exploration: step counts and connectivity") {
    auto map = uniform_map(8, 8);
    ExplorationRunConfig cfg;
    cfg.policy = Policy::RandomWalk;
    cfg.steps = 25;
    cfg.model = model_for(map);
    cfg.refinement.budget_ms = 1;
    cfg.seed = 5;
    auto result = run_exploration(map, cfg);
    CHECK(result.path.size() == 25);
    for (size_t i = 1; i < result.path.size(); ++i) {
        const auto& a = result.path[i - 1];
        const auto& b = result.path[i];
        CHECK(std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1);
    }
    CHECK(result.model.total_words() > 0);

    SUBCASE("steps=0 -> empty path, prior-only model") {
        cfg.steps = 0;
        auto empty = run_exploration(map, cfg);
        CHECK(empty.path.empty());
        CHECK(empty.model.total_words() == 0);
    }
    SUBCASE("steps=1 -> path of length 1") {
        cfg.steps = 1;
        CHECK(run_exploration(map, cfg).path.size() == 1);
    }
}

TEST_CASE("run_exploration: visit counts match path multiset") {
    auto map = uniform_map(6, 6);
    ExplorationRunConfig cfg;
    cfg.policy = Policy::StochasticCoverage;
    cfg.steps = 40;
    cfg.model = model_for(map);
    cfg.refinement.budget_ms = 1;
    cfg.seed = 6;
    auto result = run_exploration(map, cfg);
    std::unordered_map<CellKey, int, CellKeyHash> counts;
    for (const auto& c : result.path) counts[c]++;
    // reconstruct state equivalence through the trace: last cell of path is
    // the final position, and per-cell multiplicities must match
    CHECK(counts.size() <= result.path.size());
    long total = 0;
    for (const auto& [c, n] : counts) total += n;
    CHECK(total == static_cast<long>(result.path.size()));
}

TEST_CASE("run_exploration is deterministic per seed") {
    auto map = uniform_map(8, 8);
    ExplorationRunConfig cfg;
    cfg.policy = Policy::TopicPerplexity;
    cfg.steps = 15;
    cfg.model = model_for(map);
    cfg.refinement.budget_ms = 0;  // zero budget keeps refinement deterministic-length
    cfg.refinement.eta = 0.5;
    cfg.seed = 7;
    auto a = run_exploration(map, cfg);
    auto b = run_exploration(map, cfg);
    CHECK(a.path.size() == b.path.size());
    for (size_t i = 0; i < a.path.size(); ++i) CHECK(a.path[i] == b.path[i]);
}

TEST_CASE("random walk RMS displacement grows like sqrt(n)") {
    // unbounded-ish map, fit RMS(n) = c*sqrt(n) and check R^2
    auto map = uniform_map(201, 201, 4, 1);
    const std::vector<int> ns{10, 25, 50, 100, 200};
    const int seeds = 100;
    std::vector<double> rms(ns.size(), 0);
    for (int s = 0; s < seeds; ++s) {
        ExplorationRunConfig cfg;
        cfg.policy = Policy::RandomWalk;
        cfg.steps = ns.back();
        cfg.model = model_for(map, 2);
        cfg.refinement.budget_ms = 0;
        cfg.seed = 1000 + s;
        cfg.random_start = false;
        cfg.start = {100, 100, 0};
        auto result = run_exploration(map, cfg);
        for (size_t i = 0; i < ns.size(); ++i) {
            const auto& c = result.path[ns[i] - 1];
            const double dx = c.x - 100, dy = c.y - 100;
            rms[i] += dx * dx + dy * dy;
        }
    }
    // least squares of rms^2 against n through origin; displacement^2 ~ n
    // means rms fits c*sqrt(n). R^2 of the linear fit:
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < ns.size(); ++i) {
        rms[i] /= seeds;  // mean squared displacement
        sxy += rms[i] * ns[i];
        sxx += double(ns[i]) * ns[i];
    }
    const double slope = sxy / sxx;
    double ss_res = 0, ss_tot = 0, mean = 0;
    for (double v : rms) mean += v;
    mean /= rms.size();
    for (size_t i = 0; i < ns.size(); ++i) {
        ss_res += (rms[i] - slope * ns[i]) * (rms[i] - slope * ns[i]);
        ss_tot += (rms[i] - mean) * (rms[i] - mean);
    }
    CHECK(1 - ss_res / ss_tot >= 0.95);
}

TEST_CASE("stochastic coverage beats random walk on distinct cells") {
    auto map = uniform_map(64, 64, 4, 1);
    int coverage_wins = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        auto distinct = [&](Policy p) {
            ExplorationRunConfig cfg;
            cfg.policy = p;
            cfg.steps = 320;
            cfg.model = model_for(map, 2);
            cfg.refinement.budget_ms = 0;
            cfg.seed = 2000 + s;
            auto result = run_exploration(map, cfg);
            std::set<std::pair<int, int>> cells;
            for (const auto& c : result.path) cells.insert({c.x, c.y});
            return cells.size();
        };
        if (distinct(Policy::StochasticCoverage) > distinct(Policy::RandomWalk))
            ++coverage_wins;
    }
    CHECK(coverage_wins >= 15);  // clear expected advantage, paired seeds
}
