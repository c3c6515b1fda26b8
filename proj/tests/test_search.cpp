#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "ibs/boundary_oracle.hpp"
#include "ibs/dataset.hpp"
#include "ibs/error.hpp"
#include "ibs/network.hpp"
#include "ibs/search.hpp"

namespace {

// Largest |logit| compatible with |sigmoid(z) - 0.5| <= epsilon.
double logit_band(double epsilon) { return ibs::logit(0.5 + epsilon); }

// Labels a feature matrix with a model's own predictions so class pools are
// consistent with the decision boundary under test.
ibs::Dataset label_by_model(const ibs::TrainedModel& m, Eigen::MatrixXd rows) {
  ibs::Dataset d;
  d.labels.resize(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    d.labels(i) = m.predict_proba(rows.row(i).transpose()) > 0.5 ? 1 : 0;
  d.features = std::move(rows);
  d.name = "model-labeled";
  return d;
}

Eigen::MatrixXd gaussian_rows(int n, int dim, std::uint64_t seed, double sd) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sd);
  Eigen::MatrixXd rows(n, dim);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < dim; ++d) rows(i, d) = gauss(rng);
  return rows;
}

}  // namespace

TEST_CASE("a start already on the boundary converges in zero steps") {
  Eigen::VectorXd w(1);
  w << 1.0;
  const ibs::TrainedModel m = helpers::linear_model(w, 0.0);
  Eigen::MatrixXd pool0(1, 1), pool1(1, 1);
  pool0 << -1.0;
  pool1 << 1.0;
  Eigen::VectorXd start(1);
  start << 0.0;

  ibs::SearchConfig config;
  config.record_trace = true;
  const ibs::BoundarySample s = ibs::ibs_search(m, start, pool0, pool1, config);
  CHECK(s.converged);
  CHECK(s.steps_taken == 0);
  CHECK(s.point == start);
  CHECK(s.prediction == 0.5);
  REQUIRE(s.trace.size() == 1);
  CHECK(s.trace[0].magnitude == 0.0);
}

TEST_CASE("two opposite pool points pull the iterate onto the midpoint") {
  Eigen::VectorXd w(1);
  w << 1.0;
  const ibs::TrainedModel m = helpers::linear_model(w, 0.0);
  Eigen::MatrixXd pool0(1, 1), pool1(1, 1);
  pool0 << -1.0;
  pool1 << 1.0;
  Eigen::VectorXd start(1);
  start << -1.0;

  const ibs::SearchConfig config;
  const ibs::BoundarySample s = ibs::ibs_search(m, start, pool0, pool1, config);
  REQUIRE(s.converged);
  CHECK(s.steps_taken > 0);
  CHECK(std::abs(s.point(0)) <= logit_band(config.epsilon) + 1e-15);
  CHECK(std::abs(s.prediction - 0.5) <= config.epsilon);
  CHECK(s.start == start);
}

TEST_CASE("converged samples of a linear model satisfy the plane equation") {
  Eigen::VectorXd w(2);
  w << 1.2, -0.8;
  const ibs::TrainedModel m = helpers::linear_model(w, 0.4);
  const ibs::Dataset data = label_by_model(m, gaussian_rows(300, 2, 613, 2.0));
  REQUIRE(!data.indices_of_class(0).empty());
  REQUIRE(!data.indices_of_class(1).empty());

  ibs::SearchConfig config;
  config.pool_seed = 99;
  const ibs::BoundarySampleSet set = ibs::sample_boundary(m, data, 100, config);
  CHECK(set.n_failed == 0);
  CHECK(set.n_requested == 100);
  const double band = logit_band(config.epsilon) * (1.0 + 1e-12);
  for (const ibs::BoundarySample& s : set.samples) {
    CHECK(std::abs(w.dot(s.point) + 0.4) <= band);
    CHECK(std::abs(s.prediction - 0.5) <= config.epsilon);
  }
}

TEST_CASE("singleton pools keep every iterate on the connecting segment") {
  const ibs::TrainedModel& m = helpers::custom_model().model;
  const ibs::Dataset& data = helpers::custom_dataset();
  const std::vector<int> idx0 = data.indices_of_class(0);
  const std::vector<int> idx1 = data.indices_of_class(1);
  const Eigen::VectorXd a = data.features.row(idx0[0]).transpose();
  const Eigen::VectorXd b = data.features.row(idx1[0]).transpose();
  Eigen::MatrixXd pool0(1, 2), pool1(1, 2);
  pool0 = a.transpose();
  pool1 = b.transpose();

  ibs::SearchConfig config;
  config.record_trace = true;
  config.max_steps = 2000;
  const Eigen::VectorXd start = 0.5 * (a + b);
  const ibs::BoundarySample s = ibs::ibs_search(m, start, pool0, pool1, config);

  const Eigen::VectorXd u = (b - a).normalized();
  for (const ibs::TraceEntry& e : s.trace) {
    const Eigen::VectorXd r = e.point - a;
    const double off_line = (r - r.dot(u) * u).norm();
    CHECK(off_line <= 1e-9);
  }
}

TEST_CASE("a search that cannot converge stops at the step limit") {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(2);
  const ibs::TrainedModel m = helpers::linear_model(w, 0.8472978603872037);
  Eigen::MatrixXd pool0 = gaussian_rows(5, 2, 1, 1.0);
  Eigen::MatrixXd pool1 = gaussian_rows(5, 2, 2, 1.0);
  Eigen::VectorXd start(2);
  start << 0.3, -0.4;

  ibs::SearchConfig config;
  config.max_steps = 50;
  const ibs::BoundarySample s = ibs::ibs_search(m, start, pool0, pool1, config);
  CHECK(!s.converged);
  CHECK(s.steps_taken == 50);
  CHECK(s.prediction == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(std::abs(s.prediction - 0.5) > config.epsilon);
}

TEST_CASE("step magnitudes decay inside the gamma envelope") {
  const ibs::TrainedModel& m = helpers::custom_model().model;
  const ibs::Dataset& data = helpers::custom_dataset();

  ibs::SearchConfig config;
  config.record_trace = true;
  const ibs::BoundarySampleSet set = ibs::sample_boundary(m, data, 4, config);
  REQUIRE(!set.samples.empty());
  for (const ibs::BoundarySample& s : set.samples) {
    REQUIRE(s.trace.size() == static_cast<std::size_t>(s.steps_taken) + 1);
    for (std::size_t i = 0; i + 1 < s.trace.size(); ++i) {
      const double cap = 0.5 * std::pow(config.gamma, static_cast<double>(i));
      CHECK(s.trace[i].magnitude <= cap * (1.0 + 1e-10));
      CHECK(s.trace[i].magnitude ==
            doctest::Approx(std::abs(s.trace[i].prediction - 0.5) *
                            std::pow(config.gamma, static_cast<double>(i)))
                .epsilon(1e-9));
    }
    CHECK(s.trace.back().magnitude == 0.0);
    CHECK(s.trace.back().point == s.point);
  }
}

TEST_CASE("trace moves point at a sample of the losing class") {
  const ibs::TrainedModel& m = helpers::custom_model().model;
  const ibs::Dataset& data = helpers::custom_dataset();
  const std::vector<int> idx0 = data.indices_of_class(0);
  const std::vector<int> idx1 = data.indices_of_class(1);
  Eigen::MatrixXd pool0(idx0.size(), 2), pool1(idx1.size(), 2);
  for (std::size_t i = 0; i < idx0.size(); ++i)
    pool0.row(i) = data.features.row(idx0[i]);
  for (std::size_t i = 0; i < idx1.size(); ++i)
    pool1.row(i) = data.features.row(idx1[i]);

  ibs::SearchConfig config;
  config.record_trace = true;
  const ibs::BoundarySample s = ibs::ibs_search(
      m, data.features.row(0).transpose(), pool0, pool1, config, 3);

  int verified = 0;
  for (std::size_t i = 0; i + 1 < s.trace.size(); ++i) {
    const ibs::TraceEntry& e = s.trace[i];
    if (e.magnitude < 1e-8) continue;
    const Eigen::VectorXd target =
        e.point + (s.trace[i + 1].point - e.point) / e.magnitude;
    const Eigen::MatrixXd& losing = e.prediction > 0.5 ? pool0 : pool1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < losing.rows(); ++r)
      best = std::min(best, (losing.row(r).transpose() - target).norm());
    CHECK(best <= 1e-6);
    ++verified;
  }
  CHECK(verified > 0);
}

TEST_CASE("searches are deterministic in the seed and stream") {
  const ibs::TrainedModel& m = helpers::custom_model().model;
  const ibs::Dataset& data = helpers::custom_dataset();

  ibs::SearchConfig config;
  config.pool_seed = 7;
  config.record_trace = true;
  const ibs::BoundarySampleSet first = ibs::sample_boundary(m, data, 6, config);
  const ibs::BoundarySampleSet second = ibs::sample_boundary(m, data, 6, config);
  REQUIRE(first.samples.size() == second.samples.size());
  for (std::size_t i = 0; i < first.samples.size(); ++i) {
    CHECK(first.samples[i].point == second.samples[i].point);
    CHECK(first.samples[i].steps_taken == second.samples[i].steps_taken);
    REQUIRE(first.samples[i].trace.size() == second.samples[i].trace.size());
    for (std::size_t k = 0; k < first.samples[i].trace.size(); ++k)
      CHECK(first.samples[i].trace[k].point == second.samples[i].trace[k].point);
  }

  ibs::SearchConfig other = config;
  other.pool_seed = 8;
  const ibs::BoundarySampleSet third = ibs::sample_boundary(m, data, 6, other);
  bool any_differs = third.samples.size() != first.samples.size();
  for (std::size_t i = 0;
       !any_differs && i < std::min(first.samples.size(), third.samples.size());
       ++i)
    any_differs = first.samples[i].point != third.samples[i].point;
  CHECK(any_differs);
}

TEST_CASE("the batched sampler equals independent sequential searches") {
  const ibs::TrainedModel& m = helpers::custom_model().model;
  const ibs::Dataset& data = helpers::custom_dataset();

  ibs::SearchConfig config;
  config.pool_seed = 21;
  const int n = 16;
  const ibs::BoundarySampleSet set = ibs::sample_boundary(m, data, n, config);

  const std::vector<int> idx0 = data.indices_of_class(0);
  const std::vector<int> idx1 = data.indices_of_class(1);
  Eigen::MatrixXd pool0(idx0.size(), 2), pool1(idx1.size(), 2);
  for (std::size_t i = 0; i < idx0.size(); ++i)
    pool0.row(i) = data.features.row(idx0[i]);
  for (std::size_t i = 0; i < idx1.size(); ++i)
    pool1.row(i) = data.features.row(idx1[i]);

  std::size_t cursor = 0;
  for (int k = 0; k < n; ++k) {
    const auto& idx = (k % 2 == 0) ? idx0 : idx1;
    const Eigen::VectorXd start =
        data.features.row(idx[(k / 2) % idx.size()]).transpose();
    const ibs::BoundarySample solo =
        ibs::ibs_search(m, start, pool0, pool1, config,
                        static_cast<std::uint64_t>(k));
    if (!solo.converged) continue;
    REQUIRE(cursor < set.samples.size());
    CHECK(set.samples[cursor].point == solo.point);
    CHECK(set.samples[cursor].steps_taken == solo.steps_taken);
    CHECK(set.samples[cursor].start == solo.start);
    ++cursor;
  }
  CHECK(cursor == set.samples.size());
  CHECK(static_cast<int>(set.samples.size()) + set.n_failed == n);
}

TEST_CASE("subsampled pools converge and stay deterministic") {
  const ibs::TrainedModel& m = helpers::custom_model().model;
  const ibs::Dataset& data = helpers::custom_dataset();

  ibs::SearchConfig config;
  config.pool_mode = ibs::SearchConfig::PoolMode::subsample;
  config.subsample_k = 16;
  config.pool_seed = 5;
  const ibs::BoundarySampleSet a = ibs::sample_boundary(m, data, 8, config);
  const ibs::BoundarySampleSet b = ibs::sample_boundary(m, data, 8, config);
  CHECK(!a.samples.empty());
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].point == b.samples[i].point);
    CHECK(std::abs(a.samples[i].prediction - 0.5) <= config.epsilon);
  }
}

TEST_CASE("search configuration validation") {
  ibs::SearchConfig config;
  config.epsilon = 0.0;
  CHECK_THROWS_AS(config.validate(), ibs::config_error);
  config = {};
  config.epsilon = 0.5;
  CHECK_THROWS_AS(config.validate(), ibs::config_error);
  config = {};
  config.gamma = 0.0;
  CHECK_THROWS_AS(config.validate(), ibs::config_error);
  config = {};
  config.gamma = 1.5;
  CHECK_THROWS_AS(config.validate(), ibs::config_error);
  config = {};
  config.max_steps = 0;
  CHECK_THROWS_AS(config.validate(), ibs::config_error);
  config = {};
  config.pool_mode = ibs::SearchConfig::PoolMode::subsample;
  config.subsample_k = 0;
  CHECK_THROWS_AS(config.validate(), ibs::config_error);

  const ibs::TrainedModel& m = helpers::hand_model();
  Eigen::VectorXd start(2);
  start << 0.0, 0.0;
  Eigen::MatrixXd empty(0, 2), pool = gaussian_rows(4, 2, 3, 1.0);
  CHECK_THROWS_AS(ibs::ibs_search(m, start, empty, pool, {}), ibs::config_error);
  CHECK_THROWS_AS(ibs::ibs_search(m, start, pool, empty, {}), ibs::config_error);
  Eigen::MatrixXd wide = gaussian_rows(4, 3, 4, 1.0);
  CHECK_THROWS_AS(ibs::ibs_search(m, start, wide, pool, {}), ibs::shape_error);
}

TEST_CASE("baseline selection returns the closest boundary sample") {
  const ibs::TrainedModel& m = helpers::hand_model();
  auto sample_at = [](double x0, double x1) {
    ibs::BoundarySample s;
    s.point.resize(2);
    s.point << x0, x1;
    s.converged = true;
    return s;
  };
  std::vector<ibs::BoundarySample> db{sample_at(3.0, 0.0), sample_at(1.0, 1.0),
                                      sample_at(0.0, 0.5), sample_at(-2.0, -2.0)};
  Eigen::VectorXd x(2);
  x << 0.0, 0.0;
  const ibs::BaselineSelection sel = ibs::select_optimal_baseline(x, db, m, 64);
  CHECK(sel.selected_index == 2);
  CHECK(sel.distance == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sel.rank_pool_size == 4);
  CHECK(sel.baseline == db[2].point);

  // Exact ties resolve to the earliest sample.
  std::vector<ibs::BoundarySample> tied{sample_at(1.0, 0.0), sample_at(0.0, 1.0)};
  CHECK(ibs::select_optimal_baseline(x, tied, m, 64).selected_index == 0);

  CHECK_THROWS_AS(ibs::select_optimal_baseline(x, {}, m, 64), ibs::config_error);
  Eigen::VectorXd bad(3);
  bad.setZero();
  CHECK_THROWS_AS(ibs::select_optimal_baseline(bad, db, m, 64), ibs::shape_error);
}

TEST_CASE("a dense hyperplane pool recovers the analytic projection") {
  Eigen::VectorXd w(2);
  w << 1.0, 0.0;
  const ibs::TrainedModel m = helpers::linear_model(w, 0.0);

  // Boundary samples laid directly on the plane x0 = 0.
  std::vector<ibs::BoundarySample> db;
  const int n = 10001;
  for (int i = 0; i < n; ++i) {
    ibs::BoundarySample s;
    s.point.resize(2);
    s.point << 0.0, -5.0 + 10.0 * static_cast<double>(i) / (n - 1);
    s.prediction = 0.5;
    s.converged = true;
    db.push_back(std::move(s));
  }

  Eigen::VectorXd x(2);
  x << 2.0, 1.3;
  const ibs::BaselineSelection sel = ibs::select_optimal_baseline(x, db, m);
  const double analytic = std::abs(w.dot(x)) / w.norm();
  CHECK(std::abs(sel.distance - analytic) <= 1e-2);
  CHECK(sel.baseline(1) == doctest::Approx(1.3).epsilon(1e-3));
  CHECK(sel.crossings == 0);
  CHECK(std::abs(sel.orthogonality) >= 0.99);
}

TEST_CASE("selected boundary baselines reach real samples without recrossing") {
  const ibs::TrainedModel& m = helpers::custom_model().model;
  const ibs::Dataset& data = helpers::custom_dataset();

  ibs::SearchConfig config;
  config.pool_seed = 17;
  const ibs::BoundarySampleSet set = ibs::sample_boundary(m, data, 64, config);
  REQUIRE(set.samples.size() >= 32);

  int zero_crossings = 0, strict = 0;
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = data.features.row(17 * i + 3).transpose();
    if (std::abs(m.predict_proba(x) - 0.5) < 0.1) continue;  // near-neutral
    ++strict;
    const ibs::BaselineSelection sel =
        ibs::select_optimal_baseline(x, set.samples, m);
    CHECK(std::abs(m.predict_proba(sel.baseline) - 0.5) <= config.epsilon);
    if (sel.crossings == 0) ++zero_crossings;
  }
  REQUIRE(strict > 0);
  // The nearest boundary point reaches x directly in the typical case.
  CHECK(zero_crossings >= strict - 1);
}
