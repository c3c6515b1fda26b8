#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace ibs {

// Feature matrix (one sample per row) with binary labels and generation
// metadata.
struct Dataset {
  Eigen::MatrixXd features;              // n_samples x n_features
  Eigen::VectorXi labels;                // entries in {0, 1}
  std::vector<int> informative_indices;  // sorted, subset of [0, n_features)
  std::uint64_t seed = 0;
  std::string name;

  int n_samples() const { return static_cast<int>(features.rows()); }
  int n_features() const { return static_cast<int>(features.cols()); }

  // Throws data_error on single-class labels, non-finite entries, or
  // informative indices outside the feature range.
  void validate() const;

  // Row subset, keeping metadata.
  Dataset subset(const std::vector<int>& rows) const;

  // Row indices carrying the given label, in row order.
  std::vector<int> indices_of_class(int label) const;
};

}  // namespace ibs
