#include "rost/codebook.hpp"

#include <set>

namespace rost {

int Codebook::nearest(const Eigen::VectorXd& patch) const {
    int best = 0;
    double best_d = (centroids.row(0).transpose() - patch).squaredNorm();
    for (int i = 1; i < centroids.rows(); ++i) {
        double d = (centroids.row(i).transpose() - patch).squaredNorm();
        if (d < best_d) { best_d = d; best = i; }
    }
    return best;
}

static Eigen::VectorXd extract_patch(const GrayImage& img, int x, int y, int ps) {
    Eigen::VectorXd p(ps * ps);
    for (int dy = 0; dy < ps; ++dy)
        for (int dx = 0; dx < ps; ++dx)
            p(dy * ps + dx) = img.at(x + dx, y + dy);
    return p;
}

static Eigen::MatrixXd sample_patches(const std::vector<GrayImage>& images, int ps,
                                      int max_samples, Rng& rng) {
    std::vector<Eigen::VectorXd> patches;
    for (const auto& img : images) {
        if (img.width < ps || img.height < ps) continue;
        for (int y = 0; y + ps <= img.height; y += ps)
            for (int x = 0; x + ps <= img.width; x += ps)
                patches.push_back(extract_patch(img, x, y, ps));
    }
    if (static_cast<int>(patches.size()) > max_samples) {
        std::shuffle(patches.begin(), patches.end(), rng);
        patches.resize(max_samples);
    }
    Eigen::MatrixXd m(patches.size(), ps * ps);
    for (size_t i = 0; i < patches.size(); ++i) m.row(i) = patches[i].transpose();
    return m;
}

Codebook train_codebook(const std::vector<GrayImage>& images, int k, int patch_size,
                        uint64_t seed, int iterations, int max_samples) {
    if (k <= 0 || patch_size <= 0)
        throw std::invalid_argument("train_codebook: k and patch_size must be positive");
    Rng rng = make_rng(seed, 4);
    Eigen::MatrixXd patches = sample_patches(images, patch_size, max_samples, rng);

    std::set<std::vector<double>> distinct;
    for (int i = 0; i < patches.rows(); ++i) {
        distinct.insert(std::vector<double>(patches.row(i).begin(), patches.row(i).end()));
        if (static_cast<int>(distinct.size()) >= k) break;
    }
    if (static_cast<int>(distinct.size()) < k)
        throw std::invalid_argument("train_codebook: fewer distinct patches than k");

    // seeded init: k distinct patches
    Codebook cb;
    cb.patch_size = patch_size;
    cb.centroids = Eigen::MatrixXd(k, patch_size * patch_size);
    {
        std::vector<int> order(patches.rows());
        for (int i = 0; i < patches.rows(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        std::set<std::vector<double>> chosen;
        int filled = 0;
        for (int idx : order) {
            std::vector<double> key(patches.row(idx).begin(), patches.row(idx).end());
            if (!chosen.insert(key).second) continue;
            cb.centroids.row(filled++) = patches.row(idx);
            if (filled == k) break;
        }
    }

    std::vector<int> assign(patches.rows());
    for (int it = 0; it < iterations; ++it) {
        for (int i = 0; i < patches.rows(); ++i)
            assign[i] = cb.nearest(patches.row(i).transpose());
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, patch_size * patch_size);
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
        for (int i = 0; i < patches.rows(); ++i) {
            sums.row(assign[i]) += patches.row(i);
            counts(assign[i]) += 1;
        }
        for (int c = 0; c < k; ++c)
            if (counts(c) > 0) cb.centroids.row(c) = sums.row(c) / counts(c);
    }
    return cb;
}

double quantization_error(const Codebook& cb, const Eigen::MatrixXd& patches) {
    double err = 0;
    for (int i = 0; i < patches.rows(); ++i) {
        int c = cb.nearest(patches.row(i).transpose());
        err += (patches.row(i) - cb.centroids.row(c)).squaredNorm();
    }
    return err;
}

WordMap tokenize_image(const GrayImage& image, const Codebook& cb, int cell_width,
                       int stride) {
    if (cell_width <= 0 || stride <= 0)
        throw std::invalid_argument("tokenize_image: cell_width and stride must be positive");
    if (image.width < cell_width || image.height < cell_width)
        throw std::invalid_argument("tokenize_image: image smaller than one cell");
    const int W = image.width / cell_width;
    const int H = image.height / cell_width;
    WordMap map(W, H, Vocabulary{cb.size(), {{"quantized", 0, cb.size()}}});
    const int ps = cb.patch_size;
    for (int y = 0; y + ps <= image.height; y += stride) {
        for (int x = 0; x + ps <= image.width; x += stride) {
            const int cx = (x + ps / 2) / cell_width;
            const int cy = (y + ps / 2) / cell_width;
            if (cx >= W || cy >= H) continue;
            const int w = cb.nearest(extract_patch(image, x, y, ps));
            map.add_words({cx, cy, 0}, {w});
        }
    }
    return map;
}

}  // namespace rost
