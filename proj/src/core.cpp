#include "rost/core.hpp"

namespace rost {

static uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Rng make_rng(uint64_t seed, uint64_t stream) {
    uint64_t state = seed;
    splitmix64(state);
    state ^= 0x6a09e667f3bcc909ull * (stream + 1);
    return Rng(splitmix64(state));
}

std::vector<CellKey> neighbors(const CellKey& c, const NeighborhoodConfig& cfg,
                               const GridDims& bounds) {
    std::vector<CellKey> out;
    // spatial, row-major
    for (int dy = -cfg.spatial_radius; dy <= cfg.spatial_radius; ++dy) {
        for (int dx = -cfg.spatial_radius; dx <= cfg.spatial_radius; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (std::abs(dx) + std::abs(dy) > cfg.spatial_radius) continue;
            CellKey n{c.x + dx, c.y + dy, c.t};
            if (bounds.contains(n)) out.push_back(n);
        }
    }
    // temporal, increasing t
    for (int dt = -cfg.temporal_depth; dt <= cfg.temporal_depth; ++dt) {
        if (dt == 0) continue;
        CellKey n{c.x, c.y, c.t + dt};
        if (bounds.contains(n)) out.push_back(n);
    }
    return out;
}

CellKey cell_of(double px, double py, int cell_width, int extent_w, int extent_h,
                int t) {
    if (cell_width <= 0) throw std::invalid_argument("cell_of: cell_width must be > 0");
    if (px < 0 || py < 0 || px >= extent_w || py >= extent_h)
        throw std::out_of_range("cell_of: point outside map extent");
    return CellKey{static_cast<int>(px / cell_width), static_cast<int>(py / cell_width), t};
}

}  // namespace rost
