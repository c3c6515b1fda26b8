#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "ibs/datagen.hpp"
#include "ibs/error.hpp"
#include "ibs/network.hpp"

TEST_CASE("hypercube generator is deterministic and balanced") {
  const ibs::Dataset a = ibs::generate_hypercube(501, 4, 2, 2, 2.0, 11);
  const ibs::Dataset b = ibs::generate_hypercube(501, 4, 2, 2, 2.0, 11);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.n_samples() == 501);
  CHECK(a.n_features() == 4);
  CHECK(a.informative_indices == std::vector<int>{0, 1});

  const auto c0 = a.indices_of_class(0).size();
  const auto c1 = a.indices_of_class(1).size();
  CHECK(std::abs(static_cast<int>(c0) - static_cast<int>(c1)) <= 1);

  const ibs::Dataset c = ibs::generate_hypercube(501, 4, 2, 2, 2.0, 12);
  CHECK(a.features != c.features);
}

TEST_CASE("one-dimensional blobs sit at the expected separation") {
  const ibs::Dataset data = ibs::generate_hypercube(2000, 1, 1, 1, 5.0, 21);
  double mean0 = 0.0, mean1 = 0.0;
  const auto idx0 = data.indices_of_class(0);
  const auto idx1 = data.indices_of_class(1);
  for (int i : idx0) mean0 += data.features(i, 0);
  for (int i : idx1) mean1 += data.features(i, 0);
  mean0 /= static_cast<double>(idx0.size());
  mean1 /= static_cast<double>(idx1.size());
  CHECK(std::abs(mean0 - mean1) == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("two clusters per class occupy four distinct quadrants") {
  // With a large separation the quadrant of the informative coordinates
  // recovers the cluster vertex.
  const ibs::Dataset data = ibs::generate_hypercube(2000, 2, 2, 2, 8.0, 31);
  std::map<int, std::pair<int, int>> quadrant_counts;  // quadrant -> per class
  for (int i = 0; i < data.n_samples(); ++i) {
    const int q = (data.features(i, 0) > 0 ? 1 : 0) +
                  (data.features(i, 1) > 0 ? 2 : 0);
    if (data.labels(i) == 0)
      ++quadrant_counts[q].first;
    else
      ++quadrant_counts[q].second;
  }
  CHECK(quadrant_counts.size() == 4);
  int class0_major = 0, class1_major = 0;
  for (const auto& [q, counts] : quadrant_counts) {
    const int total = counts.first + counts.second;
    CHECK(total > 300);  // roughly n/4 each
    if (counts.first > 0.9 * total) ++class0_major;
    if (counts.second > 0.9 * total) ++class1_major;
  }
  CHECK(class0_major == 2);
  CHECK(class1_major == 2);
}

TEST_CASE("linear probe separates informative features at wide separation") {
  const ibs::Dataset data = ibs::generate_hypercube(1000, 3, 2, 1, 3.0, 41);
  // Probe on the informative columns only.
  ibs::Dataset informative = data;
  informative.features = data.features.leftCols(2).eval();
  informative.informative_indices = {0, 1};

  ibs::NetworkSpec probe;
  probe.layer_sizes = {2, 1};
  ibs::TrainConfig config;
  config.epochs = 60;
  config.seed = 4;
  const ibs::TrainResult result = ibs::train(probe, informative, config);
  CHECK(result.metrics.accuracy >= 0.95);
}

TEST_CASE("hypercube rejects impossible cluster layouts") {
  CHECK_THROWS_AS(ibs::generate_hypercube(100, 2, 1, 2, 1.0, 1),
                  ibs::config_error);
  CHECK_THROWS_AS(ibs::generate_hypercube(100, 2, 3, 1, 1.0, 1),
                  ibs::config_error);
  CHECK_THROWS_AS(ibs::generate_hypercube(2, 2, 2, 2, 1.0, 1),
                  ibs::config_error);
  CHECK_THROWS_AS(ibs::generate_hypercube(100, 2, 2, 1, -1.0, 1),
                  ibs::config_error);
}

TEST_CASE("noiseless spiral arms are exact half-turn rotations") {
  const ibs::Dataset data = ibs::generate_spiral(400, 0.0, 1.5, 5);
  CHECK(data.n_samples() == 400);
  CHECK(data.n_features() == 2);
  for (int i = 0; i < 200; ++i) {
    CHECK(data.features(2 * i + 1, 0) == -data.features(2 * i, 0));
    CHECK(data.features(2 * i + 1, 1) == -data.features(2 * i, 1));
    CHECK(data.labels(2 * i) == 0);
    CHECK(data.labels(2 * i + 1) == 1);
  }
}

TEST_CASE("noiseless spiral radii grow with the row index") {
  const ibs::Dataset data = ibs::generate_spiral(600, 0.0, 1.5, 6);
  double last = 0.0;
  for (int i = 0; i < data.n_samples(); ++i) {
    const double r = data.features.row(i).norm();
    CHECK(r >= last - 1e-12);
    last = std::max(last, r);
  }
  CHECK(data.features.row(data.n_samples() - 1).norm() ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spiral determinism and input validation") {
  const ibs::Dataset a = ibs::generate_spiral(300, 0.05, 1.5, 9);
  const ibs::Dataset b = ibs::generate_spiral(300, 0.05, 1.5, 9);
  CHECK(a.features == b.features);
  CHECK_THROWS_AS(ibs::generate_spiral(301, 0.05, 1.5, 9), ibs::config_error);
  CHECK_THROWS_AS(ibs::generate_spiral(300, 0.05, 0.0, 9), ibs::config_error);
  CHECK_THROWS_AS(ibs::generate_spiral(300, -0.1, 1.5, 9), ibs::config_error);
}

TEST_CASE("gaussian smoothing: identity at sigma zero, mass preserving inside") {
  Eigen::MatrixXd image = Eigen::MatrixXd::Random(30, 25);
  Eigen::MatrixXd copy = image;
  ibs::gaussian_smooth(image, 0.0);
  CHECK(image == copy);

  // An interior impulse keeps unit mass and stays symmetric.
  Eigen::MatrixXd impulse = Eigen::MatrixXd::Zero(31, 31);
  impulse(15, 15) = 1.0;
  ibs::gaussian_smooth(impulse, 2.0);
  CHECK(impulse.sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(impulse(15, 15) > impulse(15, 16));
  CHECK(impulse(14, 15) == doctest::Approx(impulse(16, 15)).epsilon(1e-12));
  CHECK(impulse(15, 14) == doctest::Approx(impulse(15, 16)).epsilon(1e-12));
}

TEST_CASE("brain layout geometry") {
  const ibs::BrainData brain = ibs::generate_brain(4, 13);
  const ibs::BrainLayout& layout = brain.layout;
  CHECK(layout.height == 109);
  CHECK(layout.width == 91);
  CHECK(layout.masked_pixel_count() == 5290);
  CHECK(layout.informative_pixels.size() == 53);
  for (int p : layout.informative_pixels) CHECK(layout.mask[p] == 1);
  CHECK_NOTHROW(layout.validate());

  CHECK(brain.dataset.n_features() == 5290);
  CHECK(brain.dataset.n_samples() == 4);
  CHECK(brain.dataset.informative_indices.size() == 53);

  // The informative patch is contiguous: every informative pixel has a
  // neighbor within 2 pixels.
  for (int p : layout.informative_pixels) {
    const int r = p / layout.width, c = p % layout.width;
    bool near = false;
    for (int q : layout.informative_pixels) {
      if (q == p) continue;
      const int qr = q / layout.width, qc = q % layout.width;
      if (std::abs(qr - r) <= 2 && std::abs(qc - c) <= 2) near = true;
    }
    CHECK(near);
  }
}

TEST_CASE("brain generation is deterministic and balanced") {
  const ibs::BrainData a = ibs::generate_brain(40, 77);
  const ibs::BrainData b = ibs::generate_brain(40, 77);
  CHECK(a.dataset.features == b.dataset.features);
  CHECK(a.layout.informative_pixels == b.layout.informative_pixels);
  const auto c0 = a.dataset.indices_of_class(0).size();
  const auto c1 = a.dataset.indices_of_class(1).size();
  CHECK(c0 == c1);
}

TEST_CASE("class-conditional mean difference peaks on the informative patch") {
  const ibs::BrainData brain = ibs::generate_brain(600, 19);
  const ibs::Dataset& data = brain.dataset;
  Eigen::VectorXd mean_diff = Eigen::VectorXd::Zero(data.n_features());
  const auto idx0 = data.indices_of_class(0);
  const auto idx1 = data.indices_of_class(1);
  for (int i : idx1) mean_diff += data.features.row(i).transpose();
  mean_diff /= static_cast<double>(idx1.size());
  Eigen::VectorXd mean0 = Eigen::VectorXd::Zero(data.n_features());
  for (int i : idx0) mean0 += data.features.row(i).transpose();
  mean0 /= static_cast<double>(idx0.size());
  mean_diff -= mean0;

  // Rank features by |mean difference|; the leaders must lie in or next to
  // the informative patch.
  std::vector<int> order(data.n_features());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return std::abs(mean_diff(x)) > std::abs(mean_diff(y));
  });

  const std::vector<int> masked = brain.layout.masked_indices();
  auto near_informative = [&](int feature) {
    const int p = masked[feature];
    const int r = p / brain.layout.width, c = p % brain.layout.width;
    for (int q : brain.layout.informative_pixels) {
      if (std::abs(q / brain.layout.width - r) <= 3 &&
          std::abs(q % brain.layout.width - c) <= 3)
        return true;
    }
    return false;
  };
  int hits = 0;
  for (int k = 0; k < 53; ++k)
    if (near_informative(order[k])) ++hits;
  CHECK(hits >= 48);
}
