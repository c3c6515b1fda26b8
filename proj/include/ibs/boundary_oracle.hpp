#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ibs/dataset.hpp"
#include "ibs/network.hpp"

namespace ibs {

// Decision-boundary points extracted from a regular grid: for every grid
// edge whose endpoint predictions straddle 0.5, the linearly interpolated
// root. Ground truth for validating the boundary search in 2 or 3 dimensions.
struct GridOracle {
  std::vector<std::pair<double, double>> bounds;  // per-dimension (min, max)
  int resolution = 0;                             // cells per dimension
  std::vector<Eigen::VectorXd> boundary_points;

  // Longest grid-cell diagonal; useful as an agreement tolerance unit.
  double cell_diagonal() const;
};

GridOracle grid_boundary(const TrainedModel& model,
                         const std::vector<std::pair<double, double>>& bounds,
                         int resolution);

// Dataset bounding box expanded by 10% per side.
std::vector<std::pair<double, double>> default_bounds(const Dataset& dataset);

// Sign changes of f - 0.5 along the straight baseline -> x segment.
struct CrossingReport {
  int count = 0;
  std::vector<double> crossing_ts;  // strictly increasing, in (0, 1]
  int resolution = 0;
};

// Samples f at t = i/resolution. An initial band where |f - 0.5| <= start_band
// is skipped so a baseline sitting on the boundary does not count itself;
// exact touches without a sign flip are ignored.
CrossingReport count_crossings(const TrainedModel& model,
                               const Eigen::VectorXd& baseline,
                               const Eigen::VectorXd& x, int resolution = 1024,
                               double start_band = 1e-3);

// Boundary parameters (w, b) of a single-affine-layer logistic model:
// boundary = { x : w.x + b = 0 }.
std::pair<Eigen::VectorXd, double> analytic_hyperplane(const TrainedModel& model);

// How close query points sit to the support of a reference sample: distances
// to the nearest reference row, compared against the given percentile of the
// reference set's own (self-excluded) nearest-neighbor distances.
struct ManifoldReport {
  double threshold = 0.0;        // percentile of reference self-NN distances
  double fraction_within = 0.0;  // queries with NN distance <= threshold
  Eigen::VectorXd distances;     // per-query NN distance
};

ManifoldReport manifold_closeness(const Eigen::MatrixXd& query_rows,
                                  const Eigen::MatrixXd& reference_rows,
                                  double percentile_rank = 99.0);

}  // namespace ibs
