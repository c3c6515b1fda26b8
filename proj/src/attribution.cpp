#include "ibs/attribution.hpp"

#include <cmath>

#include "ibs/error.hpp"

namespace ibs {

namespace {

void check_pair(const TrainedModel& model, const Eigen::VectorXd& x,
                const Eigen::VectorXd& baseline) {
  if (x.size() != model.input_dim() || baseline.size() != model.input_dim())
    throw shape_error("input/baseline dimension does not match the model");
}

void check_target(int target_class) {
  if (target_class != 0 && target_class != 1)
    throw config_error("target_class must be 0 or 1");
}

}  // namespace

Attribution integrated_gradients(const TrainedModel& model,
                                 const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& baseline, int steps,
                                 int target_class, bool logit_target) {
  check_pair(model, x, baseline);
  check_target(target_class);
  if (steps < 1) throw config_error("steps must be >= 1");

  Attribution a;
  a.input = x;
  a.baseline = baseline;
  a.delta = x - baseline;
  a.steps = steps;
  a.target_class = target_class;
  a.logit_target = logit_target;

  // Midpoint-rule average of the path gradient, all nodes in one batch.
  Eigen::MatrixXd nodes(x.size(), steps);
  for (int k = 0; k < steps; ++k) {
    const double t = (k + 0.5) / steps;
    nodes.col(k) = baseline + t * a.delta;
  }
  const Eigen::MatrixXd grads = model.input_gradient_batch(nodes, logit_target);
  a.cumulated_gradients = grads.rowwise().sum() / static_cast<double>(steps);

  // Class 0 explains 1 - f (or -logit): flip the gradient sign.
  if (target_class == 0) a.cumulated_gradients = -a.cumulated_gradients;

  a.values = a.delta.cwiseProduct(a.cumulated_gradients);

  const double fx = logit_target ? model.predict_logit(x) : model.predict_proba(x);
  const double fb = logit_target ? model.predict_logit(baseline)
                                 : model.predict_proba(baseline);
  const double span = target_class == 0 ? (fb - fx) : (fx - fb);
  a.completeness_residual = std::abs(a.values.sum() - span);
  return a;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> decompose(const Attribution& a) {
  return {a.delta, a.cumulated_gradients};
}

PathTrace gradient_along_path(const TrainedModel& model,
                              const Eigen::VectorXd& baseline,
                              const Eigen::VectorXd& x, int resolution,
                              int target_class) {
  check_pair(model, x, baseline);
  check_target(target_class);
  if (resolution < 2) throw config_error("resolution must be >= 2");

  PathTrace trace;
  trace.t_values.resize(resolution);
  Eigen::MatrixXd nodes(x.size(), resolution);
  const Eigen::VectorXd delta = x - baseline;
  for (int i = 0; i < resolution; ++i) {
    const double t = static_cast<double>(i) / (resolution - 1);
    trace.t_values(i) = t;
    nodes.col(i) = baseline + t * delta;
  }
  trace.gradients = model.input_gradient_batch(nodes, false);
  trace.predictions = model.predict_proba_batch(nodes);
  if (target_class == 0) trace.gradients = -trace.gradients;
  return trace;
}

}  // namespace ibs
