#include "ibs/dataset.hpp"

#include <cmath>

#include "ibs/error.hpp"

namespace ibs {

void Dataset::validate() const {
  if (features.rows() == 0 || features.cols() == 0)
    throw data_error("dataset is empty");
  if (labels.size() != features.rows())
    throw data_error("label count does not match sample count");
  bool has0 = false, has1 = false;
  for (int i = 0; i < labels.size(); ++i) {
    if (labels(i) == 0)
      has0 = true;
    else if (labels(i) == 1)
      has1 = true;
    else
      throw data_error("labels must be 0 or 1");
  }
  if (!has0 || !has1) throw data_error("dataset must contain both classes");
  if (!features.allFinite()) throw data_error("dataset contains NaN/Inf entries");
  int prev = -1;
  for (int idx : informative_indices) {
    if (idx < 0 || idx >= n_features())
      throw data_error("informative index out of range");
    if (idx <= prev) throw data_error("informative indices must be sorted and unique");
    prev = idx;
  }
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.features.resize(static_cast<int>(rows.size()), features.cols());
  out.labels.resize(static_cast<int>(rows.size()));
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    out.features.row(i) = features.row(rows[i]);
    out.labels(i) = labels(rows[i]);
  }
  out.informative_indices = informative_indices;
  out.seed = seed;
  out.name = name;
  return out;
}

std::vector<int> Dataset::indices_of_class(int label) const {
  std::vector<int> out;
  for (int i = 0; i < labels.size(); ++i)
    if (labels(i) == label) out.push_back(i);
  return out;
}

}  // namespace ibs
