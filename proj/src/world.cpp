#include "rost/world.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace rost {

WordMap::WordMap(int width, int height, Vocabulary vocab)
    : width_(width), height_(height), vocab_(std::move(vocab)),
      cells_(static_cast<size_t>(width) * height) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("WordMap: dimensions must be positive");
    if (vocab_.size <= 0) throw std::invalid_argument("WordMap: vocabulary must be positive");
}

const std::vector<int>& WordMap::observe(const CellKey& c) const {
    if (!in_bounds(c)) throw std::out_of_range("WordMap::observe: cell out of bounds");
    return cells_[index(c)];
}

void WordMap::add_words(const CellKey& c, const std::vector<int>& words) {
    if (!in_bounds(c)) throw std::out_of_range("WordMap::add_words: cell out of bounds");
    for (int w : words)
        if (w < 0 || w >= vocab_.size)
            throw std::invalid_argument("WordMap::add_words: word id out of vocabulary");
    auto& cell = cells_[index(c)];
    cell.insert(cell.end(), words.begin(), words.end());
}

long WordMap::total_words() const {
    long n = 0;
    for (const auto& cell : cells_) n += static_cast<long>(cell.size());
    return n;
}

int WordMap::ground_truth(const CellKey& c) const {
    if (!in_bounds(c)) throw std::out_of_range("WordMap::ground_truth: cell out of bounds");
    return ground_truth_.empty() ? -1 : ground_truth_[index(c)];
}

void WordMap::set_ground_truth(const CellKey& c, int label) {
    if (!in_bounds(c)) throw std::out_of_range("WordMap::set_ground_truth: out of bounds");
    if (ground_truth_.empty())
        ground_truth_.assign(static_cast<size_t>(width_) * height_, -1);
    ground_truth_[index(c)] = label;
}

int WordMap::ground_truth_alphabet() const {
    int hi = 0;
    for (int g : ground_truth_) hi = std::max(hi, g + 1);
    return hi;
}

void WordMap::save(std::ostream& os) const {
    os << "V " << vocab_.size << " WIDTH " << width_ << " HEIGHT " << height_ << "\n";
    for (const auto& range : vocab_.ranges)
        os << "# RANGE " << range.name << " " << range.begin << " " << range.end << "\n";
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const auto& cell = cells_[static_cast<size_t>(y) * width_ + x];
            if (cell.empty()) continue;
            os << x << " " << y << " :";
            for (int w : cell) os << " " << w;
            os << "\n";
        }
    }
}

void WordMap::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    save(os);
}

WordMap WordMap::load(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("word map: empty file");
    std::istringstream header(line);
    std::string tv, tw, th;
    int V, W, H;
    header >> tv >> V >> tw >> W >> th >> H;
    if (!header || tv != "V" || tw != "WIDTH" || th != "HEIGHT")
        throw std::runtime_error("word map: bad header line: " + line);

    Vocabulary vocab{V, {}};
    WordMap map(W, H, vocab);
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream cs(line);
            std::string hash, tag;
            cs >> hash >> tag;
            if (tag == "RANGE") {
                Vocabulary::SubRange r;
                cs >> r.name >> r.begin >> r.end;
                if (cs) map.vocab_.ranges.push_back(r);
            }
            continue;
        }
        std::istringstream cell_line(line);
        int x, y;
        std::string colon;
        if (!(cell_line >> x >> y >> colon) || colon != ":")
            throw std::runtime_error("word map: line " + std::to_string(lineno) +
                                     ": expected 'x y : words...'");
        if (x < 0 || x >= W || y < 0 || y >= H)
            throw std::runtime_error("word map: line " + std::to_string(lineno) +
                                     ": cell out of bounds");
        std::vector<int> words;
        int w;
        while (cell_line >> w) {
            if (w < 0 || w >= V)
                throw std::runtime_error("word map: line " + std::to_string(lineno) +
                                         ": word id out of vocabulary");
            words.push_back(w);
        }
        if (!cell_line.eof())
            throw std::runtime_error("word map: line " + std::to_string(lineno) +
                                     ": malformed word list");
        map.add_words({x, y, 0}, words);
    }
    return map;
}

WordMap WordMap::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return load(is);
}

void WordMap::save_ground_truth_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x) {
            int g = ground_truth_.empty() ? -1 : ground_truth_[static_cast<size_t>(y) * width_ + x];
            if (g >= 0) os << x << " " << y << " " << g << "\n";
        }
}

void WordMap::load_ground_truth_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    int x, y, g;
    int lineno = 0;
    std::string line;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        if (!(ls >> x >> y >> g))
            throw std::runtime_error("ground truth: line " + std::to_string(lineno) +
                                     ": expected 'x y label'");
        set_ground_truth({x, y, 0}, g);
    }
}

// --- synthetic terrain ---

static Eigen::VectorXd uniform_over_range(int vocab, int lo, int hi) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(vocab);
    for (int w = lo; w < hi; ++w) d(w) = 1.0 / (hi - lo);
    return d;
}

TerrainSpec TerrainSpec::stripes(int terrains, int width, int height, int vocab,
                                 double words_per_cell) {
    if (terrains <= 0 || vocab < terrains)
        throw std::invalid_argument("stripes: need vocab >= terrains > 0");
    TerrainSpec spec;
    spec.vocab_size = vocab;
    spec.width = width;
    spec.height = height;
    spec.words_per_cell = words_per_cell;
    const int span = vocab / terrains;
    for (int t = 0; t < terrains; ++t)
        spec.terrain_word_dist.push_back(
            uniform_over_range(vocab, t * span, t == terrains - 1 ? vocab : (t + 1) * span));
    spec.layout.resize(static_cast<size_t>(width) * height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            spec.layout[static_cast<size_t>(y) * width + x] =
                std::min(terrains - 1, x * terrains / width);
    return spec;
}

TerrainSpec TerrainSpec::rare_trail(int width, int height, int vocab,
                                    double words_per_cell, int trail_width) {
    TerrainSpec spec;
    spec.vocab_size = vocab;
    spec.width = width;
    spec.height = height;
    spec.words_per_cell = words_per_cell;
    const int terrains = 4;  // 3 background quadrants + 1 rare trail
    const int span = vocab / terrains;
    for (int t = 0; t < terrains; ++t)
        spec.terrain_word_dist.push_back(
            uniform_over_range(vocab, t * span, t == terrains - 1 ? vocab : (t + 1) * span));
    spec.layout.resize(static_cast<size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            int t;
            if (x < width / 2 && y < height / 2) t = 0;
            else if (x >= width / 2 && y < height / 2) t = 1;
            else t = 2;
            spec.layout[static_cast<size_t>(y) * width + x] = t;
        }
    }
    // thin diagonal trail of terrain 3
    for (int y = 0; y < height; ++y) {
        int cx = y * width / height;
        for (int dx = 0; dx < trail_width; ++dx) {
            int x = std::min(width - 1, cx + dx);
            spec.layout[static_cast<size_t>(y) * width + x] = 3;
        }
    }
    return spec;
}

WordMap generate_synthetic_map(const TerrainSpec& spec, uint64_t seed) {
    if (spec.terrain_count() == 0)
        throw std::invalid_argument("generate_synthetic_map: no terrains");
    Rng rng = make_rng(seed, 0);
    WordMap map(spec.width, spec.height, Vocabulary{spec.vocab_size, {}});
    std::poisson_distribution<int> word_count(spec.words_per_cell);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            const int terrain = spec.layout[static_cast<size_t>(y) * spec.width + x];
            const Eigen::VectorXd& dist = spec.terrain_word_dist.at(terrain);
            const int n = word_count(rng);
            std::vector<int> words;
            words.reserve(n);
            for (int i = 0; i < n; ++i) {
                double u = u01(rng);
                double acc = 0;
                int w = spec.vocab_size - 1;
                for (int v = 0; v < spec.vocab_size; ++v) {
                    acc += dist(v);
                    if (u <= acc) { w = v; break; }
                }
                words.push_back(w);
            }
            map.add_words({x, y, 0}, words);
            map.set_ground_truth({x, y, 0}, terrain);
        }
    }
    return map;
}

// --- terrain spec file ---

void TerrainSpec::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "V " << vocab_size << " WIDTH " << width << " HEIGHT " << height << "\n";
    os << "WORDS_PER_CELL " << words_per_cell << "\n";
    os << "TERRAINS " << terrain_count() << "\n";
    os.precision(17);
    for (int t = 0; t < terrain_count(); ++t) {
        os << "DIST " << t;
        // sparse: only nonzero entries
        for (int v = 0; v < vocab_size; ++v)
            if (terrain_word_dist[t](v) > 0) os << " " << v << ":" << terrain_word_dist[t](v);
        os << "\n";
    }
    os << "LAYOUT\n";
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (x) os << " ";
            os << layout[static_cast<size_t>(y) * width + x];
        }
        os << "\n";
    }
}

TerrainSpec TerrainSpec::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    TerrainSpec spec;
    std::string tag;
    int terrains;
    is >> tag >> spec.vocab_size >> tag >> spec.width >> tag >> spec.height;
    is >> tag >> spec.words_per_cell;
    is >> tag >> terrains;
    if (!is || terrains <= 0) throw std::runtime_error("terrain spec: bad header");
    spec.terrain_word_dist.assign(terrains, Eigen::VectorXd::Zero(spec.vocab_size));
    for (int t = 0; t < terrains; ++t) {
        int id;
        is >> tag >> id;
        if (tag != "DIST" || id != t) throw std::runtime_error("terrain spec: bad DIST line");
        std::string rest;
        std::getline(is, rest);
        std::istringstream ds(rest);
        std::string pair;
        while (ds >> pair) {
            auto colon = pair.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("terrain spec: malformed DIST entry");
            int v = std::stoi(pair.substr(0, colon));
            spec.terrain_word_dist[t](v) = std::stod(pair.substr(colon + 1));
        }
        double s = spec.terrain_word_dist[t].sum();
        if (std::abs(s - 1.0) > 1e-9)
            throw std::runtime_error("terrain spec: DIST does not sum to 1");
    }
    is >> tag;
    if (tag != "LAYOUT") throw std::runtime_error("terrain spec: missing LAYOUT");
    spec.layout.resize(static_cast<size_t>(spec.width) * spec.height);
    for (auto& cell : spec.layout) {
        if (!(is >> cell) || cell < 0 || cell >= terrains)
            throw std::runtime_error("terrain spec: bad layout entry");
    }
    return spec;
}

// --- PGM ---

GrayImage load_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::string magic;
    is >> magic;
    if (magic != "P5") throw std::runtime_error("PGM: expected P5, got " + magic);
    auto skip_ws_comments = [&is]() {
        while (true) {
            int ch = is.peek();
            if (ch == '#') { std::string dummy; std::getline(is, dummy); }
            else if (std::isspace(ch)) is.get();
            else break;
        }
    };
    GrayImage img;
    int maxval;
    skip_ws_comments(); is >> img.width;
    skip_ws_comments(); is >> img.height;
    skip_ws_comments(); is >> maxval;
    if (!is || img.width <= 0 || img.height <= 0 || maxval != 255)
        throw std::runtime_error("PGM: bad header (need 8-bit P5)");
    is.get();  // single whitespace after maxval
    img.pixels.resize(static_cast<size_t>(img.width) * img.height);
    is.read(reinterpret_cast<char*>(img.pixels.data()), img.pixels.size());
    if (is.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw std::runtime_error("PGM: truncated pixel data");
    return img;
}

void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "P5\n" << img.width << " " << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
}

}  // namespace rost
