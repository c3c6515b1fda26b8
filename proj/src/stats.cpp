#include "ibs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ibs/error.hpp"

namespace ibs {

Eigen::VectorXd nearest_neighbor_distances(const Eigen::MatrixXd& queries,
                                           const Eigen::MatrixXd& reference,
                                           bool exclude_self) {
  if (queries.cols() != reference.cols())
    throw shape_error("query and reference dimensionality differ");
  if (reference.rows() == 0) throw data_error("reference set is empty");
  if (exclude_self && queries.rows() != reference.rows())
    throw shape_error("exclude_self requires matching row counts");
  if (exclude_self && reference.rows() < 2)
    throw data_error("exclude_self needs at least two reference rows");

  // ||a - b||^2 = ||a||^2 + ||b||^2 - 2 a.b, computed blockwise so the
  // n x m distance matrix never materializes for large inputs.
  const Eigen::VectorXd ref_sq = reference.rowwise().squaredNorm();
  const Eigen::Index n = queries.rows();
  const Eigen::Index block = 2048;
  Eigen::VectorXd out(n);

  for (Eigen::Index start = 0; start < n; start += block) {
    const Eigen::Index b = std::min(block, n - start);
    const auto q = queries.middleRows(start, b);
    Eigen::MatrixXd d2 = (-2.0 * q * reference.transpose()).rowwise() +
                         ref_sq.transpose();
    d2.colwise() += q.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < b; ++i) {
      if (exclude_self)
        d2(i, start + i) = std::numeric_limits<double>::infinity();
      out(start + i) = std::sqrt(std::max(d2.row(i).minCoeff(), 0.0));
    }
  }
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw data_error("percentile of empty sample");
  if (q < 0.0 || q > 100.0) throw config_error("percentile rank out of range");
  std::sort(values.begin(), values.end());
  if (q == 0.0) return values.front();
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n));
  return values[rank - 1];
}

}  // namespace ibs
