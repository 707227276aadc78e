#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rost {

/// Discrete spacetime cell. In static-map mode t is pinned to 0.
struct CellKey {
    int x = 0;
    int y = 0;
    int t = 0;

    bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
    size_t operator()(const CellKey& c) const {
        size_t h = static_cast<size_t>(c.x) * 73856093u;
        h ^= static_cast<size_t>(c.y) * 19349663u;
        h ^= static_cast<size_t>(c.t) * 83492791u;
        return h;
    }
};

struct GridDims {
    int width = 0;
    int height = 0;
    int timesteps = 1;  // 1 in static-map mode

    bool contains(const CellKey& c) const {
        return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height && c.t >= 0 &&
               c.t < timesteps;
    }
    int cell_count() const { return width * height; }
};

struct NeighborhoodConfig {
    int spatial_radius = 1;
    int temporal_depth = 1;  // defaults give the 6-neighborhood (4 spatial + 2 temporal)
};

/// Vocabulary of discrete observation words, optionally split into named
/// sub-ranges (e.g. feature words vs texture words).
struct Vocabulary {
    int size = 0;

    struct SubRange {
        std::string name;
        int begin = 0;
        int end = 0;  // half-open
    };
    std::vector<SubRange> ranges;
};

using Rng = std::mt19937_64;

/// Derives an independent RNG stream from a master seed (splitmix64 mixing).
Rng make_rng(uint64_t seed, uint64_t stream = 0);

/// In-bounds cells within Manhattan spatial radius at the same timestep, plus
/// cells at the same position within +/- temporal depth. Excludes c itself.
/// Order: spatial neighbors row-major, then temporal by increasing t.
std::vector<CellKey> neighbors(const CellKey& c, const NeighborhoodConfig& cfg,
                               const GridDims& bounds);

/// Maps a pixel coordinate to its containing cell (half-open intervals).
/// Throws std::out_of_range if the point lies outside the map extent.
CellKey cell_of(double px, double py, int cell_width, int extent_w, int extent_h,
                int t = 0);

}  // namespace rost
