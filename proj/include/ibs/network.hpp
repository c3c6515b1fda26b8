#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "ibs/dataset.hpp"

namespace ibs {

enum class HiddenActivation { relu };
enum class OutputActivation { sigmoid };

// Layer widths, input dimension first, single output unit last.
struct NetworkSpec {
  std::vector<int> layer_sizes;
  HiddenActivation hidden_activation = HiddenActivation::relu;
  OutputActivation output_activation = OutputActivation::sigmoid;

  static NetworkSpec mlp(int input_dim, std::vector<int> hidden = {10, 10, 10, 10, 10});

  int input_dim() const { return layer_sizes.front(); }
  // Number of affine (weight) layers; a spec {d, 1} has exactly one and
  // models plain logistic regression.
  int n_affine_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }

  // Throws config_error unless there are >= 2 entries, all >= 1, and the
  // last is exactly 1.
  void validate() const;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 15;  // 0 is allowed and returns the initialized model untrained
  int batch_size = 128;
  double weight_decay = 0.0;
  double split_fraction = 0.85;
  std::uint64_t seed = 0;

  void validate() const;
};

// Feed-forward binary classifier. Immutable after construction; safe for
// concurrent read-only evaluation.
struct TrainedModel {
  NetworkSpec spec;
  std::vector<Eigen::MatrixXd> weights;  // weights[l]: sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> biases;   // biases[l]: sizes[l+1]
  std::uint64_t train_seed = 0;

  // Builds a model from explicit parameters, validating shapes.
  static TrainedModel from_weights(NetworkSpec spec,
                                   std::vector<Eigen::MatrixXd> weights,
                                   std::vector<Eigen::VectorXd> biases,
                                   std::uint64_t train_seed = 0);

  int input_dim() const { return spec.input_dim(); }

  // P(class 1); always in [0, 1].
  double predict_proba(const Eigen::VectorXd& x) const;
  // Pre-sigmoid output.
  double predict_logit(const Eigen::VectorXd& x) const;

  // Gradient of the probability output with respect to the input.
  Eigen::VectorXd input_gradient(const Eigen::VectorXd& x) const;
  // Gradient of the pre-sigmoid output.
  Eigen::VectorXd input_gradient_logit(const Eigen::VectorXd& x) const;

  // Column-batched variants; X is input_dim x batch.
  Eigen::VectorXd predict_proba_batch(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd predict_logit_batch(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd input_gradient_batch(const Eigen::MatrixXd& X,
                                       bool logit_target = false) const;
};

struct TrainMetrics {
  double accuracy = 0.0;
  double f1 = 0.0;
  double initial_loss = 0.0;  // training loss before the first update
  double final_loss = 0.0;    // training loss after the last epoch
};

struct TrainResult {
  TrainedModel model;
  TrainMetrics metrics;
};

struct Split {
  std::vector<int> train;
  std::vector<int> test;
};

// Seeded shuffle split; n_train = round(n * fraction), clamped to [1, n-1].
Split train_test_split(int n, double fraction, std::uint64_t seed);

// Adam on binary cross entropy, metrics on the held-out split. Fully
// deterministic for a given seed.
TrainResult train(const NetworkSpec& spec, const Dataset& dataset,
                  const TrainConfig& config);

// Numerically stable logistic function and its inverse.
double sigmoid(double z);
double logit(double p);

}  // namespace ibs
