#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ibs {

// For each row of `queries`, the Euclidean distance to its nearest row of
// `reference`. When `exclude_self` is set, a query is not allowed to match
// the reference row with the same index (use for self-distances within one
// matrix; requires queries.rows() == reference.rows()).
Eigen::VectorXd nearest_neighbor_distances(const Eigen::MatrixXd& queries,
                                           const Eigen::MatrixXd& reference,
                                           bool exclude_self = false);

// Nearest-rank percentile, q in [0, 100]. Copies and sorts.
double percentile(std::vector<double> values, double q);

}  // namespace ibs
