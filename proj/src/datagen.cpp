#include "ibs/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "ibs/error.hpp"

namespace ibs {

namespace {

constexpr double kPi = 3.14159265358979323846;

constexpr int kBrainHeight = 109;
constexpr int kBrainWidth = 91;
constexpr int kBrainMaskedPixels = 5290;
constexpr int kBrainInformativePixels = 53;

}  // namespace

Dataset generate_hypercube(int n_samples, int n_features, int n_informative,
                           int clusters_per_class, double class_sep,
                           std::uint64_t seed) {
  if (n_features < 1 || n_informative < 1 || n_informative > n_features)
    throw config_error("need 1 <= n_informative <= n_features");
  if (clusters_per_class < 1)
    throw config_error("clusters_per_class must be positive");
  if (class_sep <= 0.0) throw config_error("class_sep must be positive");
  const int n_clusters = 2 * clusters_per_class;
  if (n_samples < n_clusters)
    throw config_error("need at least one sample per cluster");
  if (n_informative >= 63 ||
      static_cast<std::uint64_t>(n_clusters) > (1ULL << n_informative))
    throw config_error("not enough hypercube vertices for the cluster count");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Distinct hypercube vertices, one per cluster, encoded as bit patterns.
  std::set<std::uint64_t> used;
  std::vector<std::uint64_t> vertex(n_clusters);
  std::uniform_int_distribution<std::uint64_t> vertex_draw(
      0, (1ULL << n_informative) - 1);
  for (int k = 0; k < n_clusters; ++k) {
    std::uint64_t code;
    do {
      code = vertex_draw(rng);
    } while (!used.insert(code).second);
    vertex[k] = code;
  }

  std::vector<int> cluster_size(n_clusters, n_samples / n_clusters);
  for (int k = 0; k < n_samples % n_clusters; ++k) ++cluster_size[k];

  Eigen::MatrixXd features(n_samples, n_features);
  Eigen::VectorXi labels(n_samples);

  int row = 0;
  for (int k = 0; k < n_clusters; ++k) {
    // Random linear mix of the informative coordinates gives each cluster
    // its own covariance structure.
    Eigen::MatrixXd mix(n_informative, n_informative);
    for (int r = 0; r < n_informative; ++r)
      for (int c = 0; c < n_informative; ++c) mix(r, c) = gauss(rng);

    Eigen::VectorXd shift(n_informative);
    for (int d = 0; d < n_informative; ++d)
      shift(d) = (vertex[k] >> d) & 1 ? class_sep : -class_sep;

    for (int i = 0; i < cluster_size[k]; ++i, ++row) {
      Eigen::VectorXd z(n_informative);
      for (int d = 0; d < n_informative; ++d) z(d) = gauss(rng);
      features.row(row).head(n_informative) = (mix * z + shift).transpose();
      labels(row) = k % 2;
    }
  }

  for (int i = 0; i < n_samples; ++i)
    for (int d = n_informative; d < n_features; ++d) features(i, d) = gauss(rng);

  std::vector<int> order(n_samples);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  Dataset out;
  out.features.resize(n_samples, n_features);
  out.labels.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    out.features.row(i) = features.row(order[i]);
    out.labels(i) = labels(order[i]);
  }
  out.informative_indices.resize(n_informative);
  std::iota(out.informative_indices.begin(), out.informative_indices.end(), 0);
  out.seed = seed;
  out.name = "hypercube";
  out.validate();
  return out;
}

Dataset generate_spiral(int n_samples, double noise_sigma, double turns,
                        std::uint64_t seed) {
  if (n_samples < 4 || n_samples % 2 != 0)
    throw config_error("spiral needs an even sample count >= 4");
  if (turns <= 0.0) throw config_error("turns must be positive");
  if (noise_sigma < 0.0) throw config_error("noise_sigma must be non-negative");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int m = n_samples / 2;
  Dataset out;
  out.features.resize(n_samples, 2);
  out.labels.resize(n_samples);

  for (int i = 0; i < m; ++i) {
    const double t = static_cast<double>(i) / (m - 1);
    // Radius proportional to the turn angle, unit-scaled so the arms end at
    // radius 1. Both arms emanate from the origin.
    const double r = t;
    const double theta = 2.0 * kPi * turns * t;
    const double x = r * std::cos(theta);
    const double y = r * std::sin(theta);
    // Class 1 is the pi-rotated copy; rows interleave the two arms so radii
    // grow with the row index.
    out.features(2 * i, 0) = x + noise_sigma * gauss(rng);
    out.features(2 * i, 1) = y + noise_sigma * gauss(rng);
    out.labels(2 * i) = 0;
    out.features(2 * i + 1, 0) = -x + noise_sigma * gauss(rng);
    out.features(2 * i + 1, 1) = -y + noise_sigma * gauss(rng);
    out.labels(2 * i + 1) = 1;
  }

  out.informative_indices = {0, 1};
  out.seed = seed;
  out.name = "spiral";
  out.validate();
  return out;
}

int BrainLayout::masked_pixel_count() const {
  return static_cast<int>(std::count(mask.begin(), mask.end(), 1));
}

std::vector<int> BrainLayout::masked_indices() const {
  std::vector<int> idx;
  idx.reserve(mask.size());
  for (int i = 0; i < static_cast<int>(mask.size()); ++i)
    if (mask[i]) idx.push_back(i);
  return idx;
}

void BrainLayout::validate() const {
  if (static_cast<int>(mask.size()) != height * width)
    throw data_error("mask size does not match image dimensions");
  if (masked_pixel_count() != kBrainMaskedPixels)
    throw data_error("mask must cover exactly 5290 pixels");
  if (static_cast<int>(informative_pixels.size()) != kBrainInformativePixels)
    throw data_error("expected exactly 53 informative pixels");
  if (!std::is_sorted(informative_pixels.begin(), informative_pixels.end()))
    throw data_error("informative pixels must be sorted");
  for (int p : informative_pixels)
    if (p < 0 || p >= height * width || !mask[p])
      throw data_error("informative pixel outside the mask");
  if (smoothing_sigma < 0.0) throw data_error("negative smoothing sigma");
}

void gaussian_smooth(Eigen::MatrixXd& image, double sigma) {
  if (sigma == 0.0) return;
  if (sigma < 0.0) throw config_error("sigma must be non-negative");

  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  Eigen::VectorXd kernel(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i)
    kernel(i + radius) = std::exp(-0.5 * (i * i) / (sigma * sigma));
  kernel /= kernel.sum();

  const int h = static_cast<int>(image.rows());
  const int w = static_cast<int>(image.cols());

  // Separable blur with zero padding outside the image.
  Eigen::MatrixXd tmp = Eigen::MatrixXd::Zero(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      const int lo = std::max(-radius, -r), hi = std::min(radius, h - 1 - r);
      for (int k = lo; k <= hi; ++k) acc += kernel(k + radius) * image(r + k, c);
      tmp(r, c) = acc;
    }
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      const int lo = std::max(-radius, -c), hi = std::min(radius, w - 1 - c);
      for (int k = lo; k <= hi; ++k) acc += kernel(k + radius) * tmp(r, c + k);
      image(r, c) = acc;
    }
}

BrainData generate_brain(int n_samples, std::uint64_t seed,
                         double smoothing_sigma, double class_shift) {
  if (n_samples < 2) throw config_error("need at least two samples");
  if (smoothing_sigma < 0.0) throw config_error("sigma must be non-negative");

  BrainLayout layout;
  layout.smoothing_sigma = smoothing_sigma;
  layout.mask.assign(kBrainHeight * kBrainWidth, 0);

  // Elliptical mask: the 5290 pixels closest to the image center in the
  // normalized-ellipse metric; ties broken by pixel index.
  const double cy = (kBrainHeight - 1) / 2.0, cx = (kBrainWidth - 1) / 2.0;
  const double ay = (kBrainHeight + 0.5) / 2.0, ax = (kBrainWidth + 0.5) / 2.0;
  std::vector<std::pair<double, int>> metric;
  metric.reserve(kBrainHeight * kBrainWidth);
  for (int r = 0; r < kBrainHeight; ++r)
    for (int c = 0; c < kBrainWidth; ++c) {
      const double dy = (r - cy) / ay, dx = (c - cx) / ax;
      metric.emplace_back(dy * dy + dx * dx, r * kBrainWidth + c);
    }
  std::sort(metric.begin(), metric.end());
  for (int i = 0; i < kBrainMaskedPixels; ++i) layout.mask[metric[i].second] = 1;

  const std::vector<int> masked = layout.masked_indices();

  std::mt19937_64 rng(seed);

  // Contiguous informative patch: the 53 mask pixels nearest a random
  // anchor pixel.
  const int anchor = masked[static_cast<int>(rng() % masked.size())];
  const double anchor_r = anchor / kBrainWidth, anchor_c = anchor % kBrainWidth;
  std::vector<std::pair<double, int>> by_dist;
  by_dist.reserve(masked.size());
  for (int p : masked) {
    const double dr = p / kBrainWidth - anchor_r, dc = p % kBrainWidth - anchor_c;
    by_dist.emplace_back(dr * dr + dc * dc, p);
  }
  std::sort(by_dist.begin(), by_dist.end());
  layout.informative_pixels.resize(kBrainInformativePixels);
  for (int i = 0; i < kBrainInformativePixels; ++i)
    layout.informative_pixels[i] = by_dist[i].second;
  std::sort(layout.informative_pixels.begin(), layout.informative_pixels.end());
  layout.validate();

  // Feature index of each informative pixel inside the masked flattening.
  std::vector<int> informative_features;
  for (int i = 0; i < static_cast<int>(masked.size()); ++i)
    if (std::binary_search(layout.informative_pixels.begin(),
                           layout.informative_pixels.end(), masked[i]))
      informative_features.push_back(i);

  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset data;
  data.features.resize(n_samples, kBrainMaskedPixels);
  data.labels.resize(n_samples);

  Eigen::MatrixXd image(kBrainHeight, kBrainWidth);
  for (int s = 0; s < n_samples; ++s) {
    const int label = s % 2;
    image.setZero();
    for (int p : masked) image(p / kBrainWidth, p % kBrainWidth) = gauss(rng);
    const double shift = (label == 1 ? 0.5 : -0.5) * class_shift;
    for (int p : layout.informative_pixels)
      image(p / kBrainWidth, p % kBrainWidth) += shift;
    gaussian_smooth(image, smoothing_sigma);
    for (int i = 0; i < kBrainMaskedPixels; ++i)
      data.features(s, i) = image(masked[i] / kBrainWidth, masked[i] % kBrainWidth);
    data.labels(s) = label;
  }

  data.informative_indices = std::move(informative_features);
  data.seed = seed;
  data.name = "brain";
  data.validate();
  return BrainData{std::move(data), std::move(layout)};
}

}  // namespace ibs
