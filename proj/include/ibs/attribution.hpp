#pragma once

#include <Eigen/Dense>
#include <utility>

#include "ibs/network.hpp"

namespace ibs {

// Integrated-gradients result for one (input, baseline) pair. Stored in
// factored form: values = delta (elementwise) cumulated_gradients, where
// delta = input - baseline and cumulated_gradients is the averaged path
// gradient. The factorization holds bitwise by construction.
struct Attribution {
  Eigen::VectorXd input;
  Eigen::VectorXd baseline;
  Eigen::VectorXd values;
  Eigen::VectorXd delta;
  Eigen::VectorXd cumulated_gradients;
  int steps = 0;
  double completeness_residual = 0.0;
  int target_class = 1;       // values explain P(target_class)
  bool logit_target = false;  // attribute the pre-sigmoid output instead
};

// Midpoint-rule integrated gradients with `steps` quadrature nodes at
// t = (k + 0.5) / steps. Attributions explain the probability of
// target_class (gradients of 1 - f for class 0); logit_target switches the
// explained function to the raw logit.
Attribution integrated_gradients(const TrainedModel& model,
                                 const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& baseline,
                                 int steps = 128, int target_class = 1,
                                 bool logit_target = false);

// The stored factors (delta, cumulated_gradients).
std::pair<Eigen::VectorXd, Eigen::VectorXd> decompose(const Attribution& a);

// Gradients and predictions sampled along the straight baseline -> x path.
struct PathTrace {
  Eigen::VectorXd t_values;   // strictly increasing, 0 and 1 included
  Eigen::MatrixXd gradients;  // input_dim x resolution, one column per t
  Eigen::VectorXd predictions;
};

PathTrace gradient_along_path(const TrainedModel& model,
                              const Eigen::VectorXd& baseline,
                              const Eigen::VectorXd& x, int resolution,
                              int target_class = 1);

}  // namespace ibs
