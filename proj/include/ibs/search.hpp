#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ibs/dataset.hpp"
#include "ibs/network.hpp"

namespace ibs {

struct SearchConfig {
  double epsilon = 1e-3;   // halting tolerance on |predict - 0.5|
  int max_steps = 10000;
  double gamma = 0.999;    // step-scaling base, magnitude ~ gamma^step
  std::uint64_t pool_seed = 0;

  enum class PoolMode { full_class, subsample };
  PoolMode pool_mode = PoolMode::full_class;
  int subsample_k = 64;  // pool size per class when pool_mode == subsample

  bool record_trace = false;

  void validate() const;
};

// One visited point of a search. The move leaving point i is reconstructable
// from consecutive entries: direction = (point[i+1] - point[i]) / magnitude[i],
// and point[i] + direction is the drawn target. The final entry has
// magnitude 0.
struct TraceEntry {
  Eigen::VectorXd point;
  double prediction;
  double magnitude;
};

struct BoundarySample {
  Eigen::VectorXd point;
  double prediction = 0.0;
  int steps_taken = 0;
  Eigen::VectorXd start;
  bool converged = false;
  std::vector<TraceEntry> trace;  // only filled when config.record_trace
};

// One boundary search from `start`. Each step classifies the current point,
// draws a target uniformly from the pool of the class it is NOT predicted
// as (the losing class), and moves toward it by |predict - 0.5| * gamma^step.
// Pool rows are samples. `stream` separates the RNG of concurrent searches
// derived from the same pool_seed.
BoundarySample ibs_search(const TrainedModel& model,
                          const Eigen::VectorXd& start,
                          const Eigen::MatrixXd& pool0,
                          const Eigen::MatrixXd& pool1,
                          const SearchConfig& config, std::uint64_t stream = 0);

struct BoundarySampleSet {
  std::vector<BoundarySample> samples;  // converged searches only
  int n_failed = 0;
  int n_requested = 0;

  // Converged points as rows.
  Eigen::MatrixXd points() const;
};

// Runs n_samples searches in lockstep, starting from dataset rows of
// alternating class (cycling when n_samples exceeds the class sizes), with
// pools taken from the dataset's class split. Search k uses RNG stream k, so
// the result matches n_samples independent ibs_search calls exactly.
BoundarySampleSet sample_boundary(const TrainedModel& model,
                                  const Dataset& dataset, int n_samples,
                                  const SearchConfig& config);

// The boundary sample closest to x, annotated with diagnostics.
struct BaselineSelection {
  Eigen::VectorXd baseline;
  double distance = 0.0;     // L2 from x to the baseline
  int crossings = 0;         // boundary crossings on the open path to x
  double orthogonality = 0.0;  // cosine of gradient-at-baseline vs path to x
  int rank_pool_size = 0;
  int selected_index = 0;    // position within db_samples
};

BaselineSelection select_optimal_baseline(
    const Eigen::VectorXd& x, const std::vector<BoundarySample>& db_samples,
    const TrainedModel& model, int crossing_resolution = 1024);

}  // namespace ibs
