// rostsim: spatiotemporal topic-model exploration simulator CLI.
//
// Subcommands: generate, explore, stream, evaluate, label, replay.
// Every run writes a manifest (resolved config + master seed) to the output
// directory before doing any work; `replay <manifest>` reruns it exactly.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "rost/codebook.hpp"
#include "rost/evaluation.hpp"
#include "rost/exploration.hpp"
#include "rost/perplexity.hpp"
#include "rost/topic_model.hpp"
#include "rost/world.hpp"

namespace fs = std::filesystem;
using namespace rost;

static constexpr int kExitConfig = 2;
static constexpr int kExitIo = 3;
static constexpr int kExitRuntime = 4;
static constexpr const char* kVersion = "rostsim 1.0";

// ---------------------------------------------------------------------------
// manifest

struct Manifest {
    std::string command;
    std::map<std::string, std::string> values;

    void set(const std::string& k, const std::string& v) { values[k] = v; }
    void set(const std::string& k, double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        values[k] = os.str();
    }
    void set(const std::string& k, int v) { values[k] = std::to_string(v); }
    void set(const std::string& k, uint64_t v) { values[k] = std::to_string(v); }

    void write(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot write manifest: " + path);
        os << "version " << kVersion << "\n";
        os << "command " << command << "\n";
        for (const auto& [k, v] : values) os << k << " " << v << "\n";
    }

    static Manifest read(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("cannot open manifest: " + path);
        Manifest m;
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            auto space = line.find(' ');
            std::string key = line.substr(0, space);
            std::string value = space == std::string::npos ? "" : line.substr(space + 1);
            if (key == "version") continue;
            else if (key == "command") m.command = value;
            else m.values[key] = value;
        }
        return m;
    }

    std::string get(const std::string& k) const {
        auto it = values.find(k);
        if (it == values.end()) throw std::runtime_error("manifest: missing key " + k);
        return it->second;
    }
    double get_double(const std::string& k) const { return std::stod(get(k)); }
    int get_int(const std::string& k) const { return std::stoi(get(k)); }
    uint64_t get_u64(const std::string& k) const { return std::stoull(get(k)); }
};

// ---------------------------------------------------------------------------
// shared flag bundles

struct ModelFlags {
    int topics = 64;
    double alpha = 0.1;
    double beta = 0.1;
    double eta = 0.5;
    double budget_ms = 200.0;
    int refine_draws = 64;
    double gamma = 1.0;

    void attach(CLI::App* app) {
        app->add_option("--topics", topics, "number of topics K");
        app->add_option("--alpha", alpha, "Dirichlet prior on cell topic distributions");
        app->add_option("--beta", beta, "Dirichlet prior on topic word distributions");
        app->add_option("--eta", eta, "refinement bias");
        app->add_option("--budget-ms", budget_ms, "refinement time budget per step (ms)");
        app->add_option("--refine-draws", refine_draws,
                        "deterministic cap on refinement draws per step (0 = time only)");
        app->add_option("--gamma", gamma, "curiosity decay multiplier (1 = off)");
    }
    void to_manifest(Manifest& m) const {
        m.set("topics", topics);
        m.set("alpha", alpha);
        m.set("beta", beta);
        m.set("eta", eta);
        m.set("budget_ms", budget_ms);
        m.set("refine_draws", refine_draws);
        m.set("gamma", gamma);
    }
    void from_manifest(const Manifest& m) {
        topics = m.get_int("topics");
        alpha = m.get_double("alpha");
        beta = m.get_double("beta");
        eta = m.get_double("eta");
        budget_ms = m.get_double("budget_ms");
        refine_draws = m.get_int("refine_draws");
        gamma = m.get_double("gamma");
    }
};

static void labeling_to_pgm(const Labeling& labels, const std::string& path) {
    GrayImage img{labels.width, labels.height,
                  std::vector<uint8_t>(static_cast<size_t>(labels.width) * labels.height, 0)};
    const int K = std::max(1, labels.alphabet);
    for (int y = 0; y < labels.height; ++y)
        for (int x = 0; x < labels.width; ++x) {
            const int l = labels.at(x, y);
            img.pixels[static_cast<size_t>(y) * labels.width + x] =
                l < 0 ? 0 : static_cast<uint8_t>(((l + 1) * 255) / (K + 1));
        }
    save_pgm(img, path);
}

static void write_labeling_file(const Labeling& labels, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    for (int y = 0; y < labels.height; ++y)
        for (int x = 0; x < labels.width; ++x)
            if (labels.at(x, y) >= 0) os << x << " " << y << " " << labels.at(x, y) << "\n";
}

// ---------------------------------------------------------------------------
// commands

struct GenerateArgs {
    std::string spec_file;
    std::string out = "map";
    std::string preset = "rare-trail";
    uint64_t seed = 0;
};

static int run_generate(const GenerateArgs& a) {
    Manifest m;
    m.command = "generate";
    m.set("spec", a.spec_file);
    m.set("preset", a.preset);
    m.set("out", a.out);
    m.set("seed", a.seed);
    m.write(a.out + ".manifest");

    TerrainSpec spec;
    if (!a.spec_file.empty()) {
        spec = TerrainSpec::load_file(a.spec_file);
    } else if (a.preset == "rare-trail") {
        spec = TerrainSpec::rare_trail(64, 64, 400, 30.0, 2);
    } else if (a.preset == "stripes") {
        spec = TerrainSpec::stripes(3, 64, 64, 300, 30.0);
    } else {
        throw CLI::ValidationError("--preset", "unknown preset: " + a.preset);
    }
    WordMap map = generate_synthetic_map(spec, a.seed);
    map.save_file(a.out + ".words");
    map.save_ground_truth_file(a.out + ".truth");
    std::cout << "wrote " << a.out << ".words (" << map.width() << "x" << map.height()
              << ", " << map.total_words() << " words) and " << a.out << ".truth\n";
    return 0;
}

struct ExploreArgs {
    std::string map_file;
    std::string truth_file;
    std::string policy = "topicppx";
    int steps = 320;
    uint64_t seed = 0;
    std::string out_dir = "explore_out";
    ModelFlags model;
    int fold_in_iterations = 50;
};

static int run_explore(const ExploreArgs& a) {
    fs::create_directories(a.out_dir);
    Manifest m;
    m.command = "explore";
    m.set("map", a.map_file);
    m.set("truth", a.truth_file);
    m.set("policy", a.policy);
    m.set("steps", a.steps);
    m.set("seed", a.seed);
    m.set("out_dir", a.out_dir);
    m.set("fold_in_iterations", a.fold_in_iterations);
    a.model.to_manifest(m);
    m.write(a.out_dir + "/manifest");

    WordMap world = WordMap::load_file(a.map_file);
    if (!a.truth_file.empty()) world.load_ground_truth_file(a.truth_file);

    ExplorationRunConfig cfg;
    cfg.policy = policy_from_string(a.policy);
    cfg.steps = a.steps;
    cfg.model.topics = a.model.topics;
    cfg.model.alpha = a.model.alpha;
    cfg.model.beta = a.model.beta;
    cfg.refinement.eta = a.model.eta;
    cfg.refinement.budget_ms = a.model.budget_ms;
    cfg.refinement.max_draws = a.model.refine_draws;
    cfg.options.gamma = a.model.gamma;
    cfg.seed = a.seed;
    auto result = run_exploration(world, cfg);

    write_path_csv(result, a.out_dir + "/path.csv");
    result.model.save_file(a.out_dir + "/model.rost");
    Rng rng = make_rng(a.seed, 3);
    Labeling labels = fold_in_label(world, result.model, a.fold_in_iterations, rng);
    labeling_to_pgm(labels, a.out_dir + "/labels.pgm");
    write_labeling_file(labels, a.out_dir + "/labels.txt");
    std::cout << "explored " << result.path.size() << " steps, wrote " << a.out_dir
              << "/{path.csv,model.rost,labels.pgm,labels.txt}\n";
    return 0;
}

struct StreamArgs {
    std::string docs_file;
    std::string out = "stream.csv";
    uint64_t seed = 0;
    ModelFlags model;
};

static int run_stream(const StreamArgs& a) {
    Manifest m;
    m.command = "stream";
    m.set("docs", a.docs_file);
    m.set("out", a.out);
    m.set("seed", a.seed);
    a.model.to_manifest(m);
    m.write(a.out + ".manifest");

    // one whitespace-separated document per line; each document is the
    // observation at timestep t, temporally adjacent to its neighbors
    std::ifstream is(a.docs_file);
    if (!is) throw std::runtime_error("cannot open: " + a.docs_file);
    std::vector<std::vector<int>> docs;
    std::string line;
    int vocab = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<int> doc;
        int w;
        while (ls >> w) {
            doc.push_back(w);
            vocab = std::max(vocab, w + 1);
        }
        docs.push_back(std::move(doc));
    }
    if (docs.empty()) throw std::runtime_error("stream: no documents in " + a.docs_file);

    ModelConfig cfg;
    cfg.topics = a.model.topics;
    cfg.vocab = vocab;
    cfg.alpha = a.model.alpha;
    cfg.beta = a.model.beta;
    cfg.dims = {1, 1, static_cast<int>(docs.size()) + 1};
    cfg.neighborhood = {0, 1};  // temporal context only
    RefinementConfig refine;
    refine.eta = a.model.eta;
    refine.budget_ms = a.model.budget_ms;
    refine.max_draws = a.model.refine_draws;

    Rng rng = make_rng(a.seed, 5);
    TopicModel model(cfg);
    PathTopicHistory history(cfg.topics);
    std::ofstream os(a.out);
    if (!os) throw std::runtime_error("cannot open for writing: " + a.out);
    os << "t,n_words,majority_topic,word_perplexity,topic_perplexity,curiosity\n";
    os.precision(10);
    std::unordered_map<int, int> visits;
    for (size_t i = 0; i < docs.size(); ++i) {
        const int t = static_cast<int>(i) + 1;
        const CellKey cell{0, 0, t - 1};
        const double wppx = word_perplexity(docs[i], model, history);
        const double tppx = topic_perplexity(docs[i], model, cell, history, rng);
        model.add_observation(cell, docs[i], rng);
        model.mark_observed(t, cell);
        model.realtime_refine(t, refine, rng);
        history.add_labels(model.cell_labels(cell));
        const double curiosity = tppx * std::pow(a.model.gamma, visits[0]++);
        os << t << "," << docs[i].size() << "," << model.majority_label(cell) << ","
           << wppx << "," << tppx << "," << curiosity << "\n";
    }
    std::cout << "streamed " << docs.size() << " documents to " << a.out << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string config_file;
    std::string out_dir = "eval_out";
    uint64_t seed = 0;
    int threads = 1;
};

static ExperimentConfig parse_experiment_config(const std::string& path,
                                                std::string& map_file,
                                                std::string& truth_file,
                                                std::string& map_name) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    ExperimentConfig cfg;
    cfg.path_lengths.clear();
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "map") ls >> map_file;
        else if (key == "truth") ls >> truth_file;
        else if (key == "name") ls >> map_name;
        else if (key == "policies") {
            std::string p;
            while (ls >> p) cfg.policies.push_back(policy_from_string(p));
        } else if (key == "path_lengths") {
            int n;
            while (ls >> n) cfg.path_lengths.push_back(n);
        } else if (key == "restarts") ls >> cfg.restarts;
        else if (key == "topics") ls >> cfg.model.topics;
        else if (key == "alpha") ls >> cfg.model.alpha;
        else if (key == "beta") ls >> cfg.model.beta;
        else if (key == "eta") ls >> cfg.refinement.eta;
        else if (key == "budget_ms") ls >> cfg.refinement.budget_ms;
        else if (key == "refine_draws") ls >> cfg.refinement.max_draws;
        else if (key == "gamma") ls >> cfg.options.gamma;
        else if (key == "batch_iterations") ls >> cfg.batch_iterations;
        else if (key == "fold_in_iterations") ls >> cfg.fold_in_iterations;
        else if (key == "seed") ls >> cfg.seed;
        else if (key == "threads") ls >> cfg.threads;
        else
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
    }
    if (map_file.empty()) throw std::runtime_error(path + ": missing 'map' entry");
    if (cfg.path_lengths.empty()) cfg.path_lengths = {10, 20, 40, 80, 160, 320};
    return cfg;
}

static int run_evaluate(const EvaluateArgs& a) {
    fs::create_directories(a.out_dir);
    std::string map_file, truth_file, map_name = "map";
    ExperimentConfig cfg = parse_experiment_config(a.config_file, map_file, truth_file,
                                                   map_name);
    if (a.seed) cfg.seed = a.seed;       // flags override file values
    if (a.threads > 1) cfg.threads = a.threads;

    Manifest m;
    m.command = "evaluate";
    m.set("config", a.config_file);
    m.set("out_dir", a.out_dir);
    m.set("seed", cfg.seed);
    m.set("threads", 1);  // replay is always sequential
    m.write(a.out_dir + "/manifest");

    WordMap world = WordMap::load_file(map_file);
    if (!truth_file.empty()) world.load_ground_truth_file(truth_file);
    ExperimentResult result = run_experiment(world, map_name, cfg);
    write_results_csv(result, a.out_dir + "/results.csv");
    write_summary_csv(result, a.out_dir + "/summary.csv");
    std::cout << "wrote " << a.out_dir << "/{results.csv,summary.csv} (" <<
        result.rows.size() << " runs)\n";
    return 0;
}

struct LabelArgs {
    std::string map_file;
    std::string model_file;
    std::string out = "labels";
    int iterations = 50;
    uint64_t seed = 0;
};

static int run_label(const LabelArgs& a) {
    Manifest m;
    m.command = "label";
    m.set("map", a.map_file);
    m.set("model", a.model_file);
    m.set("out", a.out);
    m.set("iterations", a.iterations);
    m.set("seed", a.seed);
    m.write(a.out + ".manifest");

    WordMap world = WordMap::load_file(a.map_file);
    TopicModel model = TopicModel::load_file(a.model_file);
    Rng rng = make_rng(a.seed, 3);
    Labeling labels = fold_in_label(world, model, a.iterations, rng);
    write_labeling_file(labels, a.out + ".txt");
    labeling_to_pgm(labels, a.out + ".pgm");
    std::cout << "wrote " << a.out << ".txt and " << a.out << ".pgm\n";
    return 0;
}

static int run_replay(const std::string& manifest_path) {
    Manifest m = Manifest::read(manifest_path);
    if (m.command == "generate") {
        GenerateArgs a;
        a.spec_file = m.get("spec");
        a.preset = m.get("preset");
        a.out = m.get("out");
        a.seed = m.get_u64("seed");
        return run_generate(a);
    }
    if (m.command == "explore") {
        ExploreArgs a;
        a.map_file = m.get("map");
        a.truth_file = m.get("truth");
        a.policy = m.get("policy");
        a.steps = m.get_int("steps");
        a.seed = m.get_u64("seed");
        a.out_dir = m.get("out_dir");
        a.fold_in_iterations = m.get_int("fold_in_iterations");
        a.model.from_manifest(m);
        return run_explore(a);
    }
    if (m.command == "stream") {
        StreamArgs a;
        a.docs_file = m.get("docs");
        a.out = m.get("out");
        a.seed = m.get_u64("seed");
        a.model.from_manifest(m);
        return run_stream(a);
    }
    if (m.command == "evaluate") {
        EvaluateArgs a;
        a.config_file = m.get("config");
        a.out_dir = m.get("out_dir");
        a.seed = m.get_u64("seed");
        a.threads = 1;
        return run_evaluate(a);
    }
    if (m.command == "label") {
        LabelArgs a;
        a.map_file = m.get("map");
        a.model_file = m.get("model");
        a.out = m.get("out");
        a.iterations = m.get_int("iterations");
        a.seed = m.get_u64("seed");
        return run_label(a);
    }
    throw std::runtime_error("manifest: unknown command '" + m.command + "'");
}

int main(int argc, char** argv) {
    CLI::App app{"spatiotemporal topic-model exploration simulator"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* cmd_gen = app.add_subcommand("generate", "generate a synthetic word map");
    cmd_gen->add_option("--spec", gen.spec_file, "terrain spec file");
    cmd_gen->add_option("--preset", gen.preset, "built-in layout: rare-trail | stripes");
    cmd_gen->add_option("--out", gen.out, "output prefix");
    cmd_gen->add_option("--seed", gen.seed, "master seed");

    ExploreArgs exp;
    auto* cmd_exp = app.add_subcommand("explore", "run a single exploration");
    cmd_exp->add_option("map", exp.map_file, "word map file")->required();
    cmd_exp->add_option("--truth", exp.truth_file, "ground-truth label file");
    cmd_exp->add_option("--policy", exp.policy, "random | coverage | wordppx | topicppx");
    cmd_exp->add_option("--steps", exp.steps, "path length");
    cmd_exp->add_option("--seed", exp.seed, "master seed");
    cmd_exp->add_option("--out", exp.out_dir, "output directory");
    cmd_exp->add_option("--fold-in-iterations", exp.fold_in_iterations,
                        "sweeps for the output labeling");
    exp.model.attach(cmd_exp);

    StreamArgs str;
    auto* cmd_str = app.add_subcommand("stream", "replay a word-document stream");
    cmd_str->add_option("docs", str.docs_file, "one document per line")->required();
    cmd_str->add_option("--out", str.out, "output CSV");
    cmd_str->add_option("--seed", str.seed, "master seed");
    str.model.attach(cmd_str);

    EvaluateArgs ev;
    auto* cmd_ev = app.add_subcommand("evaluate", "run the policy-comparison experiment");
    cmd_ev->add_option("config", ev.config_file, "experiment config file")->required();
    cmd_ev->add_option("--out", ev.out_dir, "output directory");
    cmd_ev->add_option("--seed", ev.seed, "override the config seed");
    cmd_ev->add_option("--threads", ev.threads, "parallel runs (breaks bit-exact replay)");

    LabelArgs lab;
    auto* cmd_lab = app.add_subcommand("label", "fold a checkpoint onto a map");
    cmd_lab->add_option("map", lab.map_file, "word map file")->required();
    cmd_lab->add_option("model", lab.model_file, "model checkpoint")->required();
    cmd_lab->add_option("--out", lab.out, "output prefix");
    cmd_lab->add_option("--iterations", lab.iterations, "fold-in sweeps");
    cmd_lab->add_option("--seed", lab.seed, "master seed");

    std::string replay_manifest;
    auto* cmd_rep = app.add_subcommand("replay", "rerun a recorded manifest");
    cmd_rep->add_option("manifest", replay_manifest, "manifest file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        if (*cmd_gen) return run_generate(gen);
        if (*cmd_exp) return run_explore(exp);
        if (*cmd_str) return run_stream(str);
        if (*cmd_ev) return run_evaluate(ev);
        if (*cmd_lab) return run_label(lab);
        if (*cmd_rep) return run_replay(replay_manifest);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        if (what.find("cannot open") != std::string::npos) {
            std::cerr << "i/o error: " << what << "\n";
            return kExitIo;
        }
        std::cerr << "error: " << what << "\n";
        return kExitRuntime;
    }
    return 0;
}
