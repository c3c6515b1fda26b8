#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <filesystem>
#include <random>
#include <vector>

#include "ibs/dataset.hpp"
#include "ibs/experiment.hpp"
#include "ibs/network.hpp"
#include "ibs/rng.hpp"

namespace helpers {

// Small fixed 2-2-1 network with hand-checkable arithmetic:
//   z1 = [[1,-2],[0.5,1]] x + [0.5,-1],  a1 = relu(z1)
//   z2 = [1.5,-1] a1 + 0.25
// At x = (1,2): z1 = (-2.5, 1.5), a1 = (0, 1.5), z2 = -1.25.
inline const ibs::TrainedModel& hand_model() {
  static const ibs::TrainedModel model = [] {
    ibs::NetworkSpec spec;
    spec.layer_sizes = {2, 2, 1};
    Eigen::MatrixXd w0(2, 2);
    w0 << 1.0, -2.0, 0.5, 1.0;
    Eigen::VectorXd b0(2);
    b0 << 0.5, -1.0;
    Eigen::MatrixXd w1(1, 2);
    w1 << 1.5, -1.0;
    Eigen::VectorXd b1(1);
    b1 << 0.25;
    return ibs::TrainedModel::from_weights(spec, {w0, w1}, {b0, b1});
  }();
  return model;
}

inline ibs::TrainedModel linear_model(const Eigen::VectorXd& w, double b) {
  ibs::NetworkSpec spec;
  spec.layer_sizes = {static_cast<int>(w.size()), 1};
  Eigen::MatrixXd w0(1, w.size());
  w0.row(0) = w.transpose();
  Eigen::VectorXd b0(1);
  b0 << b;
  return ibs::TrainedModel::from_weights(spec, {w0}, {b0});
}

// Untrained network with uniform random weights; enough structure for
// gradient and quadrature tests without a training run.
inline ibs::TrainedModel random_model(const std::vector<int>& layer_sizes,
                                      std::uint64_t seed) {
  ibs::NetworkSpec spec;
  spec.layer_sizes = layer_sizes;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    Eigen::MatrixXd w(layer_sizes[l + 1], layer_sizes[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    weights.push_back(std::move(w));
    Eigen::VectorXd b(layer_sizes[l + 1]);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = 0.25 * dist(rng);
    biases.push_back(std::move(b));
  }
  return ibs::TrainedModel::from_weights(spec, std::move(weights),
                                         std::move(biases), seed);
}

// Shared heavyweight fixtures, built once per binary run with the default
// experiment parameters so tests exercise the same models the pipeline uses.

inline const ibs::Dataset& custom_dataset() {
  static const ibs::Dataset dataset =
      ibs::make_preset_data("custom", {}, ibs::stage_seeds(42).data).dataset;
  return dataset;
}

inline const ibs::TrainResult& custom_model() {
  static const ibs::TrainResult result = [] {
    const ibs::ExperimentConfig config = ibs::default_config("custom");
    ibs::TrainConfig tc = config.train;
    tc.seed = ibs::stage_seeds(config.seed).train;
    return ibs::train(
        ibs::NetworkSpec::mlp(custom_dataset().n_features(), config.hidden),
        custom_dataset(), tc);
  }();
  return result;
}

// The training rows the pipeline would use for pools and manifold checks.
inline const ibs::Dataset& custom_train_split() {
  static const ibs::Dataset subset = [] {
    const ibs::ExperimentConfig config = ibs::default_config("custom");
    const ibs::Split split = ibs::train_test_split(
        custom_dataset().n_samples(), config.train.split_fraction,
        ibs::stage_seeds(config.seed).train);
    return custom_dataset().subset(split.train);
  }();
  return subset;
}

inline const ibs::Dataset& spiral_dataset() {
  static const ibs::Dataset dataset =
      ibs::make_preset_data("spiral", {}, ibs::stage_seeds(42).data).dataset;
  return dataset;
}

inline const ibs::TrainResult& spiral_model() {
  static const ibs::TrainResult result = [] {
    const ibs::ExperimentConfig config = ibs::default_config("spiral");
    ibs::TrainConfig tc = config.train;
    tc.seed = ibs::stage_seeds(config.seed).train;
    return ibs::train(
        ibs::NetworkSpec::mlp(spiral_dataset().n_features(), config.hidden),
        spiral_dataset(), tc);
  }();
  return result;
}

// Fresh scratch directory under the build tree.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const std::filesystem::path dir =
      std::filesystem::path("test_scratch") /
      (tag + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace helpers
