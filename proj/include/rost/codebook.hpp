#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rost/world.hpp"

namespace rost {

/// k-means codebook over fixed-size grayscale patches, the texton-style
/// quantizer feeding the word map.
struct Codebook {
    int patch_size = 0;
    Eigen::MatrixXd centroids;  // k x patch_size^2, pixel values in [0,255]

    int size() const { return static_cast<int>(centroids.rows()); }
    int nearest(const Eigen::VectorXd& patch) const;
};

/// Seeded k-means with a fixed iteration count over patches sampled from the
/// images. Throws std::invalid_argument when fewer distinct patches than k
/// exist.
Codebook train_codebook(const std::vector<GrayImage>& images, int k, int patch_size,
                        uint64_t seed, int iterations = 20, int max_samples = 20000);

/// Within-cluster sum of squared distances for the sampled patches; used to
/// check the k-means objective is non-increasing.
double quantization_error(const Codebook& cb, const Eigen::MatrixXd& patches);

/// Quantizes every patch (stride-spaced centers) to its nearest centroid and
/// drops the word into the containing cell. Throws when the image is smaller
/// than one cell.
WordMap tokenize_image(const GrayImage& image, const Codebook& cb, int cell_width,
                       int stride = 1);

}  // namespace rost
