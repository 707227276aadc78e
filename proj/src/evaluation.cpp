#include "rost/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

namespace rost {

double mutual_information(const Labeling& a, const Labeling& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("mutual_information: labelings on different grids");
    std::map<std::pair<int, int>, long> joint;
    std::map<int, long> ma, mb;
    long n = 0;
    for (size_t i = 0; i < a.labels.size(); ++i) {
        const int la = a.labels[i], lb = b.labels[i];
        if (la < 0 || lb < 0) continue;
        ++joint[{la, lb}];
        ++ma[la];
        ++mb[lb];
        ++n;
    }
    if (n == 0)
        throw std::invalid_argument("mutual_information: no cells labeled in both");
    double mi = 0;
    for (const auto& [labels, count] : joint) {
        const double pxy = static_cast<double>(count) / n;
        const double px = static_cast<double>(ma[labels.first]) / n;
        const double py = static_cast<double>(mb[labels.second]) / n;
        mi += pxy * std::log2(pxy / (px * py));
    }
    return std::max(0.0, mi);
}

double label_entropy(const Labeling& a) {
    std::map<int, long> counts;
    long n = 0;
    for (int l : a.labels)
        if (l >= 0) { ++counts[l]; ++n; }
    double h = 0;
    for (const auto& [_, count] : counts) {
        const double p = static_cast<double>(count) / n;
        h -= p * std::log2(p);
    }
    return h;
}

Labeling ground_truth_labeling(const WordMap& world) {
    Labeling out{world.width(), world.height(), world.ground_truth_alphabet(),
                 std::vector<int>(static_cast<size_t>(world.width()) * world.height(), -1)};
    for (int y = 0; y < world.height(); ++y)
        for (int x = 0; x < world.width(); ++x)
            out.at(x, y) = world.ground_truth({x, y, 0});
    return out;
}

std::pair<Labeling, TopicModel> batch_oracle_labeling(const WordMap& world,
                                                      const ModelConfig& cfg,
                                                      int iterations, uint64_t seed) {
    ModelConfig mcfg = cfg;
    mcfg.vocab = world.vocab().size;
    mcfg.dims = world.dims();
    Rng rng = make_rng(seed, 2);
    TopicModel model(mcfg);
    for (int y = 0; y < world.height(); ++y)
        for (int x = 0; x < world.width(); ++x)
            model.add_observation({x, y, 0}, world.observe({x, y, 0}), rng);
    model.batch_refine(iterations, rng);

    Labeling out{world.width(), world.height(), mcfg.topics,
                 std::vector<int>(static_cast<size_t>(world.width()) * world.height(), -1)};
    for (int y = 0; y < world.height(); ++y)
        for (int x = 0; x < world.width(); ++x)
            out.at(x, y) = model.majority_label({x, y, 0});
    return {out, std::move(model)};
}

double mann_whitney_u_pvalue(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t na = a.size(), nb = b.size();
    if (na == 0 || nb == 0)
        throw std::invalid_argument("mann_whitney_u_pvalue: empty sample");
    struct Obs { double v; int group; };
    std::vector<Obs> all;
    all.reserve(na + nb);
    for (double v : a) all.push_back({v, 0});
    for (double v : b) all.push_back({v, 1});
    std::sort(all.begin(), all.end(), [](const Obs& x, const Obs& y) { return x.v < y.v; });

    // midranks with tie correction
    const size_t n = all.size();
    std::vector<double> ranks(n);
    double tie_term = 0;
    for (size_t i = 0; i < n;) {
        size_t j = i;
        while (j < n && all[j].v == all[i].v) ++j;
        const double rank = (i + j + 1) / 2.0;  // average of 1-based ranks
        for (size_t k = i; k < j; ++k) ranks[k] = rank;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    double ra = 0;
    for (size_t i = 0; i < n; ++i)
        if (all[i].group == 0) ra += ranks[i];
    const double u = ra - na * (na + 1) / 2.0;
    const double mu = na * nb / 2.0;
    const double nn = static_cast<double>(n);
    const double sigma2 = na * nb / 12.0 * (nn + 1 - tie_term / (nn * (nn - 1)));
    if (sigma2 <= 0) return 1.0;
    const double z = (u - mu - (u > mu ? 0.5 : -0.5)) / std::sqrt(sigma2);
    const double p = std::erfc(std::abs(z) / std::sqrt(2.0));
    return std::min(1.0, p);
}

ExperimentResult run_experiment(const WordMap& world, const std::string& map_name,
                                const ExperimentConfig& cfg) {
    ExperimentResult result;
    if (cfg.policies.empty()) return result;
    if (cfg.restarts < 1)
        throw std::invalid_argument("run_experiment: restarts must be >= 1");

    auto [batch_labels, batch_model] =
        batch_oracle_labeling(world, cfg.model, cfg.batch_iterations, cfg.seed);
    std::optional<Labeling> gt;
    if (world.has_ground_truth()) gt = ground_truth_labeling(world);

    struct Job {
        Policy policy;
        int path_len;
        int restart;
        uint64_t stream;
    };
    // common random numbers: the stream depends only on (path length, restart),
    // so every policy draws the same start position and noise for a given
    // restart and comparisons across policies are not confounded by starts
    std::vector<Job> jobs;
    for (Policy policy : cfg.policies) {
        uint64_t stream = 100;
        for (int len : cfg.path_lengths)
            for (int r = 0; r < cfg.restarts; ++r)
                jobs.push_back({policy, len, r, stream++});
    }

    std::vector<ExperimentRow> rows(jobs.size());
    auto run_job = [&](size_t j) {
        const Job& job = jobs[j];
        ExperimentRow row;
        row.map_name = map_name;
        row.policy = job.policy;
        row.path_len = job.path_len;
        row.restart = job.restart;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            ExplorationRunConfig run;
            run.policy = job.policy;
            run.steps = job.path_len;
            run.model = cfg.model;
            run.refinement = cfg.refinement;
            run.options = cfg.options;
            run.random_start = cfg.random_start;
            run.start = cfg.start;
            run.seed = cfg.seed ^ (job.stream * 0x9e3779b97f4a7c15ull);
            auto explored = run_exploration(world, run);
            Rng rng = make_rng(run.seed, 3);
            Labeling labels =
                fold_in_label(world, explored.model, cfg.fold_in_iterations, rng);
            row.mi_vs_batch = mutual_information(labels, batch_labels);
            if (gt) row.mi_vs_gt = mutual_information(labels, *gt);
        } catch (const std::exception& e) {
            std::cerr << "run failed (" << policy_name(job.policy) << ", len "
                      << job.path_len << ", restart " << job.restart << "): " << e.what()
                      << "\n";
            row.failed = true;
        }
        row.runtime_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
        rows[j] = std::move(row);
    };

    if (cfg.threads > 1) {
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        for (int t = 0; t < cfg.threads; ++t)
            workers.emplace_back([&] {
                for (size_t j = next++; j < jobs.size(); j = next++) run_job(j);
            });
        for (auto& w : workers) w.join();
    } else {
        for (size_t j = 0; j < jobs.size(); ++j) run_job(j);
    }
    result.rows = std::move(rows);

    // per-case summary
    for (Policy policy : cfg.policies) {
        for (int len : cfg.path_lengths) {
            std::vector<double> mb, mg;
            for (const auto& row : result.rows) {
                if (row.policy != policy || row.path_len != len || row.failed) continue;
                mb.push_back(row.mi_vs_batch);
                if (row.mi_vs_gt) mg.push_back(*row.mi_vs_gt);
            }
            if (mb.empty()) continue;
            auto mean_std = [](const std::vector<double>& v) {
                double mean = 0;
                for (double x : v) mean += x;
                mean /= v.size();
                double var = 0;
                for (double x : v) var += (x - mean) * (x - mean);
                var = v.size() > 1 ? var / (v.size() - 1) : 0;
                return std::pair<double, double>{mean, std::sqrt(var)};
            };
            ExperimentSummaryRow s;
            s.map_name = map_name;
            s.policy = policy;
            s.path_len = len;
            s.runs = static_cast<int>(mb.size());
            std::tie(s.mean_mi_vs_batch, s.stddev_mi_vs_batch) = mean_std(mb);
            if (!mg.empty()) {
                auto [m, sd] = mean_std(mg);
                s.mean_mi_vs_gt = m;
                s.stddev_mi_vs_gt = sd;
            }
            result.summary.push_back(std::move(s));
        }
    }
    return result;
}

void write_results_csv(const ExperimentResult& result, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "# schema: rost-results-v1 (mi in bits, log base 2)\n";
    os << "map,policy,path_len,restart,mi_vs_batch,mi_vs_gt,runtime_ms\n";
    os.precision(10);
    for (const auto& r : result.rows) {
        os << r.map_name << "," << policy_name(r.policy) << "," << r.path_len << ","
           << r.restart << ",";
        if (r.failed) os << ",";
        else {
            os << r.mi_vs_batch << ",";
            if (r.mi_vs_gt) os << *r.mi_vs_gt;
        }
        os << "," << r.runtime_ms << "\n";
    }
}

void write_summary_csv(const ExperimentResult& result, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "# schema: rost-summary-v1 (mi in bits, log base 2)\n";
    os << "map,policy,path_len,runs,mean_mi_vs_batch,stddev_mi_vs_batch,"
          "mean_mi_vs_gt,stddev_mi_vs_gt\n";
    os.precision(10);
    for (const auto& s : result.summary) {
        os << s.map_name << "," << policy_name(s.policy) << "," << s.path_len << ","
           << s.runs << "," << s.mean_mi_vs_batch << "," << s.stddev_mi_vs_batch << ",";
        if (s.mean_mi_vs_gt) os << *s.mean_mi_vs_gt;
        os << ",";
        if (s.stddev_mi_vs_gt) os << *s.stddev_mi_vs_gt;
        os << "\n";
    }
}

}  // namespace rost
