#pragma once

#include <cstdint>
#include <vector>

#include "ibs/dataset.hpp"

namespace ibs {

// Gaussian clusters placed on distinct vertices of a hypercube with side
// 2*class_sep. Informative coordinates are N(0,1) draws mixed by a random
// per-cluster linear map (adds covariance), then shifted to the cluster
// vertex; remaining coordinates are pure N(0,1) noise. Clusters alternate
// class labels. Rows are shuffled.
Dataset generate_hypercube(int n_samples, int n_features, int n_informative,
                           int clusters_per_class, double class_sep,
                           std::uint64_t seed);

// Two interleaved arithmetic spirals, class 1 rotated by pi relative to
// class 0, radius growing linearly from inner_radius to 1 over `turns`
// revolutions. Gaussian positional noise with std noise_sigma. Rows are laid
// out as (class0_i, class1_i) pairs ordered by increasing radius.
Dataset generate_spiral(int n_samples, double noise_sigma, double turns,
                        std::uint64_t seed);

// Pixel geometry of the simulated brain view: an elliptical mask inside a
// 109x91 grid covering exactly 5290 pixels, with a contiguous patch of 53
// informative pixels. Pixel indices are row-major over the full image.
struct BrainLayout {
  int height = 109;
  int width = 91;
  std::vector<std::uint8_t> mask;       // height*width entries, 1 = inside
  std::vector<int> informative_pixels;  // sorted full-image indices, 53 of them
  double smoothing_sigma = 2.0;

  int masked_pixel_count() const;
  // Sorted full-image indices of mask pixels; position in this list is the
  // dataset feature index.
  std::vector<int> masked_indices() const;
  void validate() const;
};

struct BrainData {
  Dataset dataset;
  BrainLayout layout;
};

// Simulated 2-D brain view dataset: per-sample N(0,1) pixel noise, a
// class-conditional shift of +-class_shift/2 on the informative patch,
// Gaussian-smoothed over the full image, then flattened over mask pixels.
BrainData generate_brain(int n_samples, std::uint64_t seed,
                         double smoothing_sigma = 2.0,
                         double class_shift = 1.2);

// Separable Gaussian blur with kernel truncated at 4*sigma; sigma = 0 is the
// identity. Exposed for the smoothing tests.
void gaussian_smooth(Eigen::MatrixXd& image, double sigma);

}  // namespace ibs
