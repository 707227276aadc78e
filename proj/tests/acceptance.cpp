// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. argv[1] is the path to the rostsim binary (used by the CLI replay
// criterion).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "rost/evaluation.hpp"
#include "rost/exploration.hpp"
#include "rost/perplexity.hpp"
#include "rost/topic_model.hpp"
#include "rost/world.hpp"

using namespace rost;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

static int failures = 0;

static void report(int criterion, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": "
              << detail << std::endl;
    if (!pass) ++failures;
}

static double elapsed_s(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// ---------------------------------------------------------------------------
// helpers

// Independent conditional evaluator (duplicated on purpose: no shared code
// with TopicModel::gibbs_conditional).
static Eigen::VectorXd brute_force_conditional(const Eigen::MatrixXd& topic_word, int w,
                                               const Eigen::VectorXd& g, double alpha,
                                               double beta) {
    const int K = static_cast<int>(topic_word.rows());
    const int V = static_cast<int>(topic_word.cols());
    Eigen::VectorXd p(K);
    double g_total = 0;
    for (int k = 0; k < K; ++k) g_total += g(k) + alpha;
    for (int k = 0; k < K; ++k) {
        double row_total = 0;
        for (int v = 0; v < V; ++v) row_total += topic_word(k, v) + beta;
        p(k) = (topic_word(k, w) + beta) / row_total * ((g(k) + alpha) / g_total);
    }
    return p / p.sum();
}

static TopicModel model_from_text(const std::string& text) {
    std::stringstream ss(text);
    return TopicModel::load(ss);
}

// regularized upper incomplete gamma Q(a,x), for the chi-square p-value
static double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) return 1.0;
    if (x == 0) return 1.0;
    auto gammln = [](double v) { return std::lgamma(v); };
    if (x < a + 1.0) {
        // series for P(a,x)
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-14) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - gammln(a));
        return 1.0 - p;
    }
    // continued fraction for Q(a,x)
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-14) break;
    }
    return std::exp(-x + a * std::log(x) - gammln(a)) * h;
}

static std::string random_counts_model(Rng& rng, int& K, int& V) {
    std::uniform_int_distribution<int> ksz(1, 4), vsz(1, 4), cnt(0, 5);
    K = ksz(rng);
    V = vsz(rng);
    std::uniform_int_distribution<int> wd(0, V - 1), zd(0, K - 1);
    std::ostringstream ss;
    ss << "ROSTMODEL 1\nK " << K << " V " << V << "\n";
    ss << "ALPHA 0.3 BETA 0.7\nNEIGHBORHOOD 1 1\nDIMS 8 8 1\n";
    ss << "CELLS 3\n";
    for (const char* cell : {"3 3 0", "3 4 0", "7 7 0"}) {
        const int n = cnt(rng);
        ss << cell << " " << n;
        for (int i = 0; i < n; ++i) ss << " " << wd(rng) << ":" << zd(rng);
        ss << "\n";
    }
    return ss.str();
}

// ---------------------------------------------------------------------------
// criteria

static void criterion_1_gibbs_vs_brute_force() {
    auto t0 = clock_type::now();
    auto rng = make_rng(101);
    int checked = 0;
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int K, V;
        auto model = model_from_text(random_counts_model(rng, K, V));
        std::uniform_int_distribution<int> wd(0, V - 1);
        const int w = wd(rng);
        const CellKey c{3, 3, 0};
        auto got = model.gibbs_conditional(w, c);
        auto want = brute_force_conditional(model.topic_word_counts(), w,
                                            model.neighborhood_counts(c), 0.3, 0.7);
        for (int k = 0; k < K; ++k) {
            const double rel = std::abs(got(k) - want(k)) / std::max(1e-300, want(k));
            worst = std::max(worst, rel);
        }
        ++checked;
    }
    const double secs = elapsed_s(t0);
    std::ostringstream msg;
    msg << "gibbs_conditional vs brute force on " << checked
        << " random configs, worst rel err " << worst << ", " << secs << " s";
    report(1, worst <= 1e-12 && secs < 1.0, msg.str());
}

static void criterion_2_lda_reduction() {
    auto rng = make_rng(102);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<int> ksz(1, 4), vsz(1, 4), cnt(1, 5);
        const int K = ksz(rng), V = vsz(rng);
        std::uniform_int_distribution<int> wd(0, V - 1), zd(0, K - 1);
        std::ostringstream ss;
        ss << "ROSTMODEL 1\nK " << K << " V " << V << "\n";
        ss << "ALPHA 0.3 BETA 0.7\nNEIGHBORHOOD 0 0\nDIMS 8 8 1\n";
        ss << "CELLS 2\n";
        for (const char* cell : {"3 3 0", "3 4 0"}) {
            const int n = cnt(rng);
            ss << cell << " " << n;
            for (int i = 0; i < n; ++i) ss << " " << wd(rng) << ":" << zd(rng);
            ss << "\n";
        }
        auto model = model_from_text(ss.str());
        const int w = wd(rng);
        const CellKey c{3, 3, 0};
        auto got = model.gibbs_conditional(w, c);
        // collapsed LDA conditional, the cell as document:
        // (n_k^w + beta)/(n_k + V beta) * (n_d^k + alpha)
        Eigen::VectorXd lda(K);
        const auto& tw = model.topic_word_counts();
        const auto doc = model.cell_topic_counts(c);
        for (int k = 0; k < K; ++k)
            lda(k) = (tw(k, w) + 0.7) / (model.topic_totals()(k) + V * 0.7) *
                     (doc(k) + 0.3);
        lda /= lda.sum();
        for (int k = 0; k < K; ++k) {
            const double rel = std::abs(got(k) - lda(k)) / std::max(1e-300, lda(k));
            worst = std::max(worst, rel);
        }
    }
    std::ostringstream msg;
    msg << "radius-0 conditional vs collapsed LDA, worst rel err " << worst;
    report(2, worst <= 1e-12, msg.str());
}

static void criterion_3_model_recovery() {
    auto t0 = clock_type::now();
    TerrainSpec spec = TerrainSpec::stripes(3, 32, 32, 60, 20.0);
    int ok = 0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        auto map = generate_synthetic_map(spec, 300 + seed);
        ModelConfig cfg;
        cfg.topics = 6;
        cfg.alpha = 0.1;
        cfg.beta = 0.1;
        auto [labels, model] = batch_oracle_labeling(map, cfg, 60, seed);
        auto gt = ground_truth_labeling(map);
        if (mutual_information(labels, gt) >= 0.9 * label_entropy(gt)) ++ok;
    }
    const double secs = elapsed_s(t0);
    std::ostringstream msg;
    msg << "batch oracle MI >= 0.9 H(gt) in " << ok << "/20 seeds, " << secs << " s";
    report(3, ok >= 18 && secs < 120.0, msg.str());
}

static void criterion_4_refinement_bias() {
    auto rng = make_rng(104);
    const int T = 100, draws = 100000;
    std::vector<long> hist(T + 1, 0);
    for (int i = 0; i < draws; ++i) ++hist[pick_refinement_time(T, 0.5, rng)];
    const double freq_T = hist[T] / double(draws);

    // chi-square uniformity over t in {1..T-1}
    long past_total = draws - hist[T];
    const double expect = past_total / double(T - 1);
    double chi2 = 0;
    for (int t = 1; t < T; ++t) {
        const double d = hist[t] - expect;
        chi2 += d * d / expect;
    }
    const double p = gamma_q((T - 2) / 2.0, chi2 / 2.0);
    std::ostringstream msg;
    msg << "freq(t=T) = " << freq_T << " (target [0.48,0.52]), uniformity chi2 p = "
        << p;
    report(4, freq_T >= 0.48 && freq_T <= 0.52 && p > 0.01, msg.str());
}

static void criterion_5_realtime_budget() {
    // map with <= 500 words/cell; walk 100 steps, every refine call must stay
    // within budget + one cell-sweep overshoot
    TerrainSpec spec = TerrainSpec::stripes(2, 16, 16, 50, 400.0);
    auto map = generate_synthetic_map(spec, 500);
    ModelConfig cfg;
    cfg.topics = 8;
    cfg.vocab = 50;
    cfg.dims = map.dims();
    RefinementConfig refine;
    refine.budget_ms = 200.0;
    auto rng = make_rng(105);
    TopicModel model(cfg);

    // measure one cell sweep to bound the allowed overshoot
    model.add_observation({0, 0, 0}, map.observe({0, 0, 0}), rng);
    auto s0 = clock_type::now();
    model.resample_cell({0, 0, 0}, rng);
    const double sweep_ms = std::chrono::duration<double, std::milli>(
                                clock_type::now() - s0)
                                .count();
    const double allowance = std::max(20.0, 4 * sweep_ms);

    // the scheduler can preempt us between deadline checks; measure the worst
    // stall a plain busy loop suffers so OS jitter is not charged to the model
    double stall_ms = 0;
    {
        auto cal0 = clock_type::now();
        auto prev = cal0;
        while (std::chrono::duration<double>(clock_type::now() - cal0).count() < 3.0) {
            auto now = clock_type::now();
            stall_ms = std::max(
                stall_ms, std::chrono::duration<double, std::milli>(now - prev).count());
            prev = now;
        }
    }

    CellKey pos{0, 0, 0};
    double worst_ms = 0;
    int over_tight = 0;  // steps exceeding budget + algorithmic allowance
    for (int step = 1; step <= 100; ++step) {
        if (!model.has_cell(pos)) model.add_observation(pos, map.observe(pos), rng);
        model.mark_observed(step, pos);
        auto t0 = clock_type::now();
        model.realtime_refine(step, refine, rng);
        const double dur = std::chrono::duration<double, std::milli>(
                               clock_type::now() - t0)
                               .count();
        worst_ms = std::max(worst_ms, dur);
        if (dur > 200.0 + allowance) ++over_tight;
        // fixed scan path
        pos.x = (pos.x + 1) % 16;
        if (pos.x == 0) pos.y = (pos.y + 1) % 16;
    }
    const double hard_cap = 200.0 + allowance + 2 * std::max(stall_ms, 10.0);
    std::ostringstream msg;
    msg << "100 steps at 200 ms budget, worst step " << worst_ms << " ms, "
        << over_tight << " step(s) past the " << allowance
        << " ms allowance (cell sweep " << sweep_ms << " ms, measured scheduler stall "
        << stall_ms << " ms, hard cap " << hard_cap << " ms)";
    // a deadline-check bug would blow most steps or the hard cap; scheduler
    // preemption on a loaded host hits only a handful of the 100 steps
    report(5, worst_ms <= hard_cap && over_tight <= 10, msg.str());
}

static void criterion_6_random_walk_scaling() {
    WordMap map(512, 512, Vocabulary{2, {}});  // empty cells: pure walk
    const std::vector<int> ns{50, 100, 200, 400, 700, 1000};
    std::vector<double> msd(ns.size(), 0);
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        ExplorationRunConfig cfg;
        cfg.policy = Policy::RandomWalk;
        cfg.steps = ns.back();
        cfg.model.topics = 2;
        cfg.refinement.budget_ms = 0;
        cfg.seed = 600 + s;
        cfg.random_start = false;
        cfg.start = {256, 256, 0};
        auto result = run_exploration(map, cfg);
        for (size_t i = 0; i < ns.size(); ++i) {
            const auto& c = result.path[ns[i] - 1];
            const double dx = c.x - 256, dy = c.y - 256;
            msd[i] += dx * dx + dy * dy;
        }
    }
    // RMS = c sqrt(n): fit RMS against sqrt(n) through the origin
    std::vector<double> rms(ns.size());
    for (size_t i = 0; i < ns.size(); ++i) rms[i] = std::sqrt(msd[i] / seeds);
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < ns.size(); ++i) {
        sxy += rms[i] * std::sqrt(double(ns[i]));
        sxx += double(ns[i]);
    }
    const double c = sxy / sxx;
    double ss_res = 0, ss_tot = 0, mean = 0;
    for (double v : rms) mean += v;
    mean /= rms.size();
    for (size_t i = 0; i < ns.size(); ++i) {
        const double fit = c * std::sqrt(double(ns[i]));
        ss_res += (rms[i] - fit) * (rms[i] - fit);
        ss_tot += (rms[i] - mean) * (rms[i] - mean);
    }
    const double r2 = 1 - ss_res / ss_tot;
    std::ostringstream msg;
    msg << "RMS displacement ~ c*sqrt(n), c = " << c << ", R^2 = " << r2;
    report(6, r2 >= 0.95, msg.str());
}

static void criteria_7_8_policy_ordering() {
    auto t0 = clock_type::now();
    // scattered member of the rare-trail family: three background terrains
    // tiled in 16x16 blocks plus the rare terrain as scattered 2x2 patches
    // (<= 5% of cells). Scattering keeps the rare terrain reachable from any
    // restart location, so policy quality rather than start luck decides MI.
    TerrainSpec spec = TerrainSpec::rare_trail(64, 64, 200, 30.0, 2);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            spec.layout[y * 64 + x] = ((x / 16) + (y / 16)) % 3;
    {
        auto prng = make_rng(31, 9);
        std::uniform_int_distribution<int> u(0, 62);
        for (int p = 0; p < 16; ++p) {
            int px = u(prng), py = u(prng);
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx)
                    spec.layout[(py + dy) * 64 + (px + dx)] = 3;
        }
    }
    auto map = generate_synthetic_map(spec, 700);

    ExperimentConfig cfg;
    cfg.policies = {Policy::RandomWalk, Policy::StochasticCoverage,
                    Policy::WordPerplexity, Policy::TopicPerplexity};
    cfg.path_lengths = {20, 80, 320};
    cfg.restarts = 20;
    cfg.model.topics = 64;
    cfg.model.alpha = 0.1;
    cfg.model.beta = 0.1;
    cfg.refinement.eta = 0.5;
    cfg.refinement.budget_ms = 1e9;  // bounded by draws, not wall clock
    cfg.refinement.max_draws = 128;
    cfg.options.gamma = 0.7;  // curiosity decay: perplexity policies move on
                              // from cells they have already studied
    cfg.batch_iterations = 80;
    cfg.fold_in_iterations = 30;
    cfg.seed = 7777;
    cfg.threads = 1;
    auto result = run_experiment(map, "rare-trail", cfg);

    auto samples = [&](Policy p, int len) {
        std::vector<double> v;
        for (const auto& row : result.rows)
            if (row.policy == p && row.path_len == len && !row.failed && row.mi_vs_gt)
                v.push_back(*row.mi_vs_gt);
        return v;
    };
    auto mean = [](const std::vector<double>& v) {
        double m = 0;
        for (double x : v) m += x;
        return m / v.size();
    };
    auto sd = [&](const std::vector<double>& v) {
        const double m = mean(v);
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / (v.size() - 1));
    };

    // criterion 7: at length 80, topicppx > random (MW p < 0.05) and
    // mean(topicppx) >= mean(coverage); at 320 topicppx and coverage within
    // one pooled stddev
    auto topic80 = samples(Policy::TopicPerplexity, 80);
    auto rand80 = samples(Policy::RandomWalk, 80);
    auto cov80 = samples(Policy::StochasticCoverage, 80);
    auto topic320 = samples(Policy::TopicPerplexity, 320);
    auto cov320 = samples(Policy::StochasticCoverage, 320);
    const double p_tr = mann_whitney_u_pvalue(topic80, rand80);
    const bool beats_random = mean(topic80) > mean(rand80) && p_tr < 0.05;
    const bool matches_coverage80 = mean(topic80) >= mean(cov80);
    const double pooled =
        std::sqrt((sd(topic320) * sd(topic320) + sd(cov320) * sd(cov320)) / 2);
    const bool converges320 = std::abs(mean(topic320) - mean(cov320)) <= pooled;
    std::ostringstream msg7;
    msg7 << "len 80: topicppx " << mean(topic80) << " vs random " << mean(rand80)
         << " (MW p " << p_tr << ") vs coverage " << mean(cov80) << "; len 320: |"
         << mean(topic320) << " - " << mean(cov320) << "| <= pooled sd " << pooled
         << "; " << elapsed_s(t0) << " s";
    report(7, beats_random && matches_coverage80 && converges320 &&
                  elapsed_s(t0) < 1800,
           msg7.str());

    // criterion 8: at short paths no policy pair differs significantly
    const std::vector<Policy> all = cfg.policies;
    bool null_ok = true;
    double min_p = 1.0;
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = i + 1; j < all.size(); ++j) {
            const double p =
                mann_whitney_u_pvalue(samples(all[i], 20), samples(all[j], 20));
            min_p = std::min(min_p, p);
            if (p <= 0.05) null_ok = false;
        }
    std::ostringstream msg8;
    msg8 << "len 20: min pairwise MW p = " << min_p << " (need > 0.05)";
    report(8, null_ok, msg8.str());
}

static void criterion_9_mi_evaluator() {
    std::vector<int> half;
    for (int i = 0; i < 4096; ++i) half.push_back(i % 2);
    Labeling a{64, 64, 2, half};
    const bool exact_bit = std::abs(mutual_information(a, a) - 1.0) < 1e-12;

    std::vector<int> permuted;
    for (int l : half) permuted.push_back(1 - l);
    Labeling ap{64, 64, 2, permuted};
    auto rng = make_rng(109);
    std::vector<int> rand_b;
    for (int i = 0; i < 4096; ++i) rand_b.push_back(static_cast<int>(rng() % 2));
    Labeling b{64, 64, 2, rand_b};
    const bool perm_ok =
        std::abs(mutual_information(a, b) - mutual_information(ap, b)) < 1e-12;

    bool indep_ok = true;
    double worst = 0;
    for (uint64_t seed = 0; seed < 5; ++seed) {
        auto r2 = make_rng(200 + seed);
        std::vector<int> la, lb;
        for (int i = 0; i < 4096; ++i) {
            la.push_back(static_cast<int>(r2() % 4));
            lb.push_back(static_cast<int>(r2() % 4));
        }
        const double mi =
            mutual_information(Labeling{64, 64, 4, la}, Labeling{64, 64, 4, lb});
        worst = std::max(worst, mi);
        if (mi > 0.05) indep_ok = false;
    }
    std::ostringstream msg;
    msg << "identical 50/50 = 1 bit exact: " << exact_bit
        << ", permutation-invariant: " << perm_ok << ", independent worst MI = "
        << worst;
    report(9, exact_bit && perm_ok && indep_ok, msg.str());
}

static int run_cmd(const std::string& cmd) { return std::system(cmd.c_str()); }

static std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

static void criterion_10_cli_replay(const std::string& rostsim) {
    if (rostsim.empty()) {
        report(10, false, "rostsim path not supplied");
        return;
    }
    const fs::path dir = fs::temp_directory_path() / "rost_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string d = dir.string();
    bool ok = true;
    std::string detail;

    // generate, then replay from the manifest into a second location
    ok &= run_cmd(rostsim + " generate --preset rare-trail --seed 11 --out " + d +
                  "/map > /dev/null") == 0;
    ok &= run_cmd(rostsim + " explore " + d + "/map.words --policy topicppx --steps 40" +
                  " --topics 8 --budget-ms 5 --seed 12 --out " + d +
                  "/run1 > /dev/null") == 0;
    if (ok) {
        // replay must be byte-identical; rerun into the same out dir after
        // stashing the originals
        fs::create_directories(dir / "orig");
        for (const char* f : {"path.csv", "model.rost", "labels.pgm", "labels.txt"})
            fs::copy_file(dir / "run1" / f, dir / "orig" / f);
        ok &= run_cmd(rostsim + " replay " + d + "/run1/manifest > /dev/null") == 0;
        for (const char* f : {"path.csv", "model.rost", "labels.pgm", "labels.txt"}) {
            if (slurp(dir / "run1" / f) != slurp(dir / "orig" / f)) {
                ok = false;
                detail += std::string(" mismatch:") + f;
            }
        }
    } else {
        detail = " command failed";
    }
    report(10, ok, "CLI replay from manifest is byte-identical" + detail);
    fs::remove_all(dir);
}

int main(int argc, char** argv) {
    const std::string rostsim = argc > 1 ? argv[1] : "";
    criterion_1_gibbs_vs_brute_force();
    criterion_2_lda_reduction();
    criterion_3_model_recovery();
    criterion_4_refinement_bias();
    criterion_5_realtime_budget();
    criterion_6_random_walk_scaling();
    criteria_7_8_policy_ordering();
    criterion_9_mi_evaluator();
    criterion_10_cli_replay(rostsim);
    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" :
                                  std::to_string(failures) + " CRITERIA FAILED")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
