#include "ibs/search.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ibs/error.hpp"
#include "ibs/boundary_oracle.hpp"
#include "ibs/rng.hpp"

namespace ibs {

namespace {

// State of one search inside the lockstep engine.
struct SearchState {
  Eigen::VectorXd point;
  Eigen::VectorXd start;
  std::mt19937_64 rng;
  Eigen::MatrixXd sub0, sub1;  // per-search pools in subsample mode
  double scale = 1.0;          // gamma^step, updated multiplicatively
  double prediction = 0.0;
  int steps = 0;
  bool done = false;
  std::vector<TraceEntry> trace;
};

Eigen::MatrixXd draw_subpool(const Eigen::MatrixXd& pool, int k,
                             std::mt19937_64& rng) {
  Eigen::MatrixXd sub(k, pool.cols());
  for (int i = 0; i < k; ++i)
    sub.row(i) = pool.row(static_cast<Eigen::Index>(
        draw_index(rng, static_cast<std::uint64_t>(pool.rows()))));
  return sub;
}

// Advances all searches together, one round of single-point model
// evaluations per step. Predictions are computed per column through the
// same scalar path the sequential API uses, so a batch of n searches is
// bitwise identical to n independent runs with the same streams.
std::vector<BoundarySample> run_lockstep(const TrainedModel& model,
                                         const Eigen::MatrixXd& starts,
                                         const Eigen::MatrixXd& pool0,
                                         const Eigen::MatrixXd& pool1,
                                         const SearchConfig& config,
                                         std::uint64_t first_stream) {
  config.validate();
  if (pool0.rows() == 0 || pool1.rows() == 0)
    throw config_error("both class pools must be non-empty");
  if (pool0.cols() != model.input_dim() || pool1.cols() != model.input_dim() ||
      starts.rows() != model.input_dim())
    throw shape_error("pool/start dimension does not match the model");

  const int n = static_cast<int>(starts.cols());
  std::vector<SearchState> states(n);
  for (int k = 0; k < n; ++k) {
    SearchState& s = states[k];
    s.point = starts.col(k);
    s.start = s.point;
    s.rng.seed(derive_seed(config.pool_seed, first_stream + k));
    if (config.pool_mode == SearchConfig::PoolMode::subsample) {
      s.sub0 = draw_subpool(pool0, config.subsample_k, s.rng);
      s.sub1 = draw_subpool(pool1, config.subsample_k, s.rng);
    }
    s.prediction = model.predict_proba(s.point);
    s.done = std::abs(s.prediction - 0.5) <= config.epsilon;
  }

  int active = static_cast<int>(
      std::count_if(states.begin(), states.end(),
                    [](const SearchState& s) { return !s.done; }));
  while (active > 0) {
    for (SearchState& s : states) {
      if (s.done) continue;
      if (s.steps >= config.max_steps) {
        s.done = true;
        --active;
        continue;
      }
      // The pool of the class the current point is NOT predicted as.
      const bool predicted_one = s.prediction > 0.5;
      const Eigen::MatrixXd& pool =
          config.pool_mode == SearchConfig::PoolMode::subsample
              ? (predicted_one ? s.sub0 : s.sub1)
              : (predicted_one ? pool0 : pool1);
      const auto target_row = static_cast<Eigen::Index>(
          draw_index(s.rng, static_cast<std::uint64_t>(pool.rows())));
      const double magnitude = std::abs(s.prediction - 0.5) * s.scale;
      if (config.record_trace)
        s.trace.push_back({s.point, s.prediction, magnitude});
      s.point += magnitude * (pool.row(target_row).transpose() - s.point);
      s.scale *= config.gamma;
      ++s.steps;
      s.prediction = model.predict_proba(s.point);
      if (std::abs(s.prediction - 0.5) <= config.epsilon) {
        s.done = true;
        --active;
      }
    }
  }

  std::vector<BoundarySample> out(n);
  for (int k = 0; k < n; ++k) {
    SearchState& s = states[k];
    BoundarySample& b = out[k];
    b.point = std::move(s.point);
    b.prediction = s.prediction;
    b.steps_taken = s.steps;
    b.start = std::move(s.start);
    b.converged = std::abs(s.prediction - 0.5) <= config.epsilon;
    if (config.record_trace) {
      s.trace.push_back({b.point, b.prediction, 0.0});
      b.trace = std::move(s.trace);
    }
  }
  return out;
}

}  // namespace

void SearchConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw config_error("epsilon must lie in (0, 0.5)");
  if (max_steps < 1) throw config_error("max_steps must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw config_error("gamma must lie in (0, 1]");
  if (pool_mode == PoolMode::subsample && subsample_k < 1)
    throw config_error("subsample pool size must be positive");
}

BoundarySample ibs_search(const TrainedModel& model,
                          const Eigen::VectorXd& start,
                          const Eigen::MatrixXd& pool0,
                          const Eigen::MatrixXd& pool1,
                          const SearchConfig& config, std::uint64_t stream) {
  return run_lockstep(model, start, pool0, pool1, config, stream)[0];
}

Eigen::MatrixXd BoundarySampleSet::points() const {
  Eigen::MatrixXd rows(samples.size(), samples.empty() ? 0 : samples[0].point.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    rows.row(static_cast<Eigen::Index>(i)) = samples[i].point.transpose();
  return rows;
}

BoundarySampleSet sample_boundary(const TrainedModel& model,
                                  const Dataset& dataset, int n_samples,
                                  const SearchConfig& config) {
  if (n_samples < 1) throw config_error("n_samples must be positive");
  dataset.validate();

  const std::vector<int> idx0 = dataset.indices_of_class(0);
  const std::vector<int> idx1 = dataset.indices_of_class(1);
  Eigen::MatrixXd pool0(idx0.size(), dataset.n_features());
  Eigen::MatrixXd pool1(idx1.size(), dataset.n_features());
  for (std::size_t i = 0; i < idx0.size(); ++i)
    pool0.row(static_cast<Eigen::Index>(i)) = dataset.features.row(idx0[i]);
  for (std::size_t i = 0; i < idx1.size(); ++i)
    pool1.row(static_cast<Eigen::Index>(i)) = dataset.features.row(idx1[i]);

  // Starts alternate between the classes, cycling through each class's rows
  // in dataset order.
  Eigen::MatrixXd starts(dataset.n_features(), n_samples);
  for (int k = 0; k < n_samples; ++k) {
    const auto& idx = (k % 2 == 0) ? idx0 : idx1;
    starts.col(k) =
        dataset.features.row(idx[(k / 2) % idx.size()]).transpose();
  }

  std::vector<BoundarySample> all =
      run_lockstep(model, starts, pool0, pool1, config, 0);

  BoundarySampleSet set;
  set.n_requested = n_samples;
  for (BoundarySample& b : all) {
    if (b.converged)
      set.samples.push_back(std::move(b));
    else
      ++set.n_failed;
  }
  return set;
}

BaselineSelection select_optimal_baseline(
    const Eigen::VectorXd& x, const std::vector<BoundarySample>& db_samples,
    const TrainedModel& model, int crossing_resolution) {
  if (db_samples.empty())
    throw config_error("baseline selection needs at least one boundary sample");
  if (x.size() != model.input_dim())
    throw shape_error("sample dimension does not match the model");

  int best = 0;
  double best_d2 = (x - db_samples[0].point).squaredNorm();
  for (int i = 1; i < static_cast<int>(db_samples.size()); ++i) {
    const double d2 = (x - db_samples[i].point).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }

  BaselineSelection sel;
  sel.baseline = db_samples[best].point;
  sel.distance = std::sqrt(best_d2);
  sel.selected_index = best;
  sel.rank_pool_size = static_cast<int>(db_samples.size());
  sel.crossings =
      count_crossings(model, sel.baseline, x, crossing_resolution).count;

  const Eigen::VectorXd normal = model.input_gradient(sel.baseline);
  const Eigen::VectorXd to_x = x - sel.baseline;
  const double denom = normal.norm() * to_x.norm();
  sel.orthogonality = denom > 0.0 ? normal.dot(to_x) / denom : 0.0;
  return sel;
}

}  // namespace ibs
