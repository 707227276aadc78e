#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rost/core.hpp"

namespace rost {

/// Static grid of cells, each holding a bag of observation words, with
/// optional ground-truth terrain labels.
class WordMap {
public:
    WordMap() = default;
    WordMap(int width, int height, Vocabulary vocab);

    int width() const { return width_; }
    int height() const { return height_; }
    const Vocabulary& vocab() const { return vocab_; }
    GridDims dims() const { return {width_, height_, 1}; }

    bool in_bounds(const CellKey& c) const {
        return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_;
    }

    /// Words of cell c; throws std::out_of_range when c is out of bounds.
    const std::vector<int>& observe(const CellKey& c) const;
    void add_words(const CellKey& c, const std::vector<int>& words);

    long total_words() const;

    bool has_ground_truth() const { return !ground_truth_.empty(); }
    int ground_truth(const CellKey& c) const;
    void set_ground_truth(const CellKey& c, int label);
    int ground_truth_alphabet() const;

    // word-map file format: header "V <int> WIDTH <int> HEIGHT <int>",
    // then one line per non-empty cell: "x y : w1 w2 ...".
    void save(std::ostream& os) const;
    void save_file(const std::string& path) const;
    static WordMap load(std::istream& is);
    static WordMap load_file(const std::string& path);

    // ground-truth file: one line per cell, "x y label".
    void save_ground_truth_file(const std::string& path) const;
    void load_ground_truth_file(const std::string& path);

private:
    size_t index(const CellKey& c) const {
        return static_cast<size_t>(c.y) * width_ + c.x;
    }

    int width_ = 0;
    int height_ = 0;
    Vocabulary vocab_;
    std::vector<std::vector<int>> cells_;
    std::vector<int> ground_truth_;  // -1 = unlabeled; empty = no ground truth
};

/// Synthetic terrain family: per-terrain word distribution plus a spatial
/// layout assigning a terrain id to every cell.
struct TerrainSpec {
    int vocab_size = 0;
    int width = 0;
    int height = 0;
    double words_per_cell = 30.0;
    std::vector<Eigen::VectorXd> terrain_word_dist;  // one per terrain, sums to 1
    std::vector<int> layout;                         // row-major terrain ids

    int terrain_count() const { return static_cast<int>(terrain_word_dist.size()); }

    /// Vertical-stripe layout over n terrains with disjoint uniform word
    /// supports (vocab split evenly).
    static TerrainSpec stripes(int terrains, int width, int height, int vocab,
                               double words_per_cell);

    /// Quadrant background terrains plus a thin diagonal trail of a rare
    /// terrain covering a few percent of cells.
    static TerrainSpec rare_trail(int width, int height, int vocab,
                                  double words_per_cell, int trail_width = 1);

    // plain-text spec file, see README
    static TerrainSpec load_file(const std::string& path);
    void save_file(const std::string& path) const;
};

/// Draws each cell's words i.i.d. from its terrain distribution; ground truth
/// is the terrain id.
WordMap generate_synthetic_map(const TerrainSpec& spec, uint64_t seed);

// --- PGM (P5 binary) ---
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;  // row-major

    uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

GrayImage load_pgm(const std::string& path);
void save_pgm(const GrayImage& img, const std::string& path);

}  // namespace rost
