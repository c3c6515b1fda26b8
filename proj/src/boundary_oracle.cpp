#include "ibs/boundary_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ibs/error.hpp"
#include "ibs/stats.hpp"

namespace ibs {

namespace {

constexpr int kPredictChunk = 65536;

// Predict a list of points (rows) in bounded-memory chunks.
Eigen::VectorXd predict_rows(const TrainedModel& model, const Eigen::MatrixXd& rows) {
  Eigen::VectorXd out(rows.rows());
  for (Eigen::Index start = 0; start < rows.rows(); start += kPredictChunk) {
    const Eigen::Index b = std::min<Eigen::Index>(kPredictChunk, rows.rows() - start);
    out.segment(start, b) =
        model.predict_proba_batch(rows.middleRows(start, b).transpose());
  }
  return out;
}

}  // namespace

double GridOracle::cell_diagonal() const {
  double sum = 0.0;
  for (const auto& [lo, hi] : bounds) {
    const double step = (hi - lo) / resolution;
    sum += step * step;
  }
  return std::sqrt(sum);
}

GridOracle grid_boundary(const TrainedModel& model,
                         const std::vector<std::pair<double, double>>& bounds,
                         int resolution) {
  const int dim = static_cast<int>(bounds.size());
  if (dim != model.input_dim())
    throw shape_error("bounds dimensionality does not match the model");
  if (dim != 2 && dim != 3)
    throw unsupported_error("grid boundary extraction supports 2 or 3 dimensions");
  if (resolution < 8) throw config_error("grid resolution must be >= 8");
  for (const auto& [lo, hi] : bounds)
    if (!(hi > lo)) throw config_error("grid bounds must have positive extent");

  GridOracle oracle;
  oracle.bounds = bounds;
  oracle.resolution = resolution;

  const int nodes = resolution + 1;
  std::vector<double> axis_step(dim);
  for (int d = 0; d < dim; ++d)
    axis_step[d] = (bounds[d].second - bounds[d].first) / resolution;

  const long n_nodes = dim == 2 ? static_cast<long>(nodes) * nodes
                                : static_cast<long>(nodes) * nodes * nodes;
  auto node_coord = [&](long id, int d) {
    long idx = 0;
    if (dim == 2) {
      idx = d == 0 ? id / nodes : id % nodes;
    } else {
      if (d == 0) idx = id / (static_cast<long>(nodes) * nodes);
      else if (d == 1) idx = (id / nodes) % nodes;
      else idx = id % nodes;
    }
    return bounds[d].first + axis_step[d] * static_cast<double>(idx);
  };

  Eigen::MatrixXd points(n_nodes, dim);
  for (long id = 0; id < n_nodes; ++id)
    for (int d = 0; d < dim; ++d) points(id, d) = node_coord(id, d);
  const Eigen::VectorXd g = predict_rows(model, points).array() - 0.5;

  // Walk every axis-aligned grid edge; a strict sign straddle yields one
  // linearly interpolated boundary point. Nodes that are exact roots are
  // emitted once rather than per incident edge.
  std::vector<bool> node_emitted(n_nodes, false);
  auto emit_node = [&](long id) {
    if (node_emitted[id]) return;
    node_emitted[id] = true;
    oracle.boundary_points.push_back(points.row(id).transpose());
  };
  auto visit_edge = [&](long a, long b) {
    const double ga = g(a), gb = g(b);
    if (ga == 0.0) emit_node(a);
    if (gb == 0.0) emit_node(b);
    if (ga * gb < 0.0) {
      const double t = ga / (ga - gb);
      oracle.boundary_points.push_back(
          (points.row(a) + t * (points.row(b) - points.row(a))).transpose());
    }
  };

  if (dim == 2) {
    for (long i = 0; i < nodes; ++i)
      for (long j = 0; j < nodes; ++j) {
        const long id = i * nodes + j;
        if (i + 1 < nodes) visit_edge(id, id + nodes);
        if (j + 1 < nodes) visit_edge(id, id + 1);
      }
  } else {
    const long plane = static_cast<long>(nodes) * nodes;
    for (long i = 0; i < nodes; ++i)
      for (long j = 0; j < nodes; ++j)
        for (long k = 0; k < nodes; ++k) {
          const long id = i * plane + j * nodes + k;
          if (i + 1 < nodes) visit_edge(id, id + plane);
          if (j + 1 < nodes) visit_edge(id, id + nodes);
          if (k + 1 < nodes) visit_edge(id, id + 1);
        }
  }
  return oracle;
}

std::vector<std::pair<double, double>> default_bounds(const Dataset& dataset) {
  std::vector<std::pair<double, double>> bounds(dataset.n_features());
  for (int d = 0; d < dataset.n_features(); ++d) {
    const double lo = dataset.features.col(d).minCoeff();
    const double hi = dataset.features.col(d).maxCoeff();
    const double pad = 0.1 * (hi - lo);
    bounds[d] = {lo - pad, hi + pad};
  }
  return bounds;
}

CrossingReport count_crossings(const TrainedModel& model,
                               const Eigen::VectorXd& baseline,
                               const Eigen::VectorXd& x, int resolution,
                               double start_band) {
  if (baseline.size() != model.input_dim() || x.size() != model.input_dim())
    throw shape_error("baseline/x dimension does not match the model");
  if (resolution < 2) throw config_error("crossing resolution must be >= 2");

  CrossingReport report;
  report.resolution = resolution;

  const int n = resolution + 1;
  Eigen::MatrixXd nodes(x.size(), n);
  const Eigen::VectorXd delta = x - baseline;
  std::vector<double> ts(n);
  for (int i = 0; i < n; ++i) {
    ts[i] = static_cast<double>(i) / resolution;
    nodes.col(i) = baseline + ts[i] * delta;
  }
  const Eigen::VectorXd g =
      model.predict_proba_batch(nodes).array() - 0.5;

  // Anchor past the initial on-boundary band so a baseline already sitting
  // on the DB does not register its own departure as a crossing.
  int anchor = 0;
  if (std::abs(g(0)) <= start_band) {
    while (anchor < n && std::abs(g(anchor)) <= start_band) ++anchor;
  }
  if (anchor >= n) return report;  // whole path inside the band

  int last_sign = g(anchor) > 0.0 ? 1 : (g(anchor) < 0.0 ? -1 : 0);
  int last_idx = anchor;
  for (int i = anchor + 1; i < n; ++i) {
    const int s = g(i) > 0.0 ? 1 : (g(i) < 0.0 ? -1 : 0);
    if (s == 0) continue;  // exact touch; crossing decided by the next sign
    if (last_sign != 0 && s != last_sign) {
      const double t = ts[last_idx] +
                       (ts[i] - ts[last_idx]) * g(last_idx) / (g(last_idx) - g(i));
      report.crossing_ts.push_back(t);
    }
    last_sign = s;
    last_idx = i;
  }
  report.count = static_cast<int>(report.crossing_ts.size());
  return report;
}

std::pair<Eigen::VectorXd, double> analytic_hyperplane(const TrainedModel& model) {
  if (model.spec.n_affine_layers() != 1)
    throw unsupported_error("analytic hyperplane requires a single affine layer");
  return {model.weights[0].row(0).transpose(), model.biases[0](0)};
}

ManifoldReport manifold_closeness(const Eigen::MatrixXd& query_rows,
                                  const Eigen::MatrixXd& reference_rows,
                                  double percentile_rank) {
  ManifoldReport report;
  const Eigen::VectorXd self_nn =
      nearest_neighbor_distances(reference_rows, reference_rows, true);
  report.threshold = percentile(
      std::vector<double>(self_nn.data(), self_nn.data() + self_nn.size()),
      percentile_rank);
  report.distances = nearest_neighbor_distances(query_rows, reference_rows);
  const auto within =
      (report.distances.array() <= report.threshold).count();
  report.fraction_within =
      static_cast<double>(within) / static_cast<double>(query_rows.rows());
  return report;
}

}  // namespace ibs
