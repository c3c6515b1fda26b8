#include "ibs/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include <json.hpp>

#include "ibs/attribution.hpp"
#include "ibs/boundary_oracle.hpp"
#include "ibs/error.hpp"
#include "ibs/io.hpp"
#include "ibs/rng.hpp"
#include "ibs/svg.hpp"

namespace ibs {

namespace {

using nlohmann::json;

// Shared figure palette: class 0 orange, class 1 blue, boundary green,
// chosen baseline gold, faulty baseline purple, crossings red.
constexpr const char* kClass0Color = "#ff7f0e";
constexpr const char* kClass1Color = "#1f77b4";
constexpr const char* kBoundaryColor = "#2ca02c";
constexpr const char* kBaselineColor = "#daa520";
constexpr const char* kSampleColor = "#000000";
constexpr const char* kCrossingColor = "#d62728";
constexpr const char* kPredictionColor = "#111111";

const std::set<std::string>& known_presets() {
  static const std::set<std::string> presets = {"custom", "spiral",
                                                "three-feature", "brain"};
  return presets;
}

const std::set<std::string>& known_modes() {
  static const std::set<std::string> modes = {"optimal", "random-db", "zero",
                                              "noise", "custom-point"};
  return modes;
}

Eigen::MatrixXd rows_of_class(const Dataset& d, int label, int limit) {
  const std::vector<int> idx = d.indices_of_class(label);
  const int n = std::min<int>(static_cast<int>(idx.size()), limit);
  Eigen::MatrixXd out(n, d.n_features());
  for (int i = 0; i < n; ++i) out.row(i) = d.features.row(idx[i]);
  return out;
}

double cosine_to_gradient(const TrainedModel& model, const Eigen::VectorXd& baseline,
                          const Eigen::VectorXd& x) {
  const Eigen::VectorXd normal = model.input_gradient(baseline);
  const Eigen::VectorXd to_x = x - baseline;
  const double denom = normal.norm() * to_x.norm();
  return denom > 0.0 ? normal.dot(to_x) / denom : 0.0;
}

std::vector<int> top_features_by_magnitude(const Eigen::VectorXd& values, int k) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(values(a)) > std::abs(values(b));
  });
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(k)));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!known_presets().count(preset))
    throw config_error("unknown preset '" + preset + "'");
  if (hidden.empty()) throw config_error("need at least one hidden layer");
  for (int h : hidden)
    if (h < 1) throw config_error("hidden layer sizes must be positive");
  train.validate();
  search.validate();
  if (n_boundary_samples < 1)
    throw config_error("n_boundary_samples must be positive");
  if (attribution.steps < 1)
    throw config_error("attribution steps must be positive");
  if (!known_modes().count(attribution.mode))
    throw config_error("unknown attribution mode '" + attribution.mode + "'");
  if (attribution.mode == "custom-point" && attribution.custom_point.empty())
    throw config_error("custom-point mode needs a point");
  for (int id : attribution.sample_ids)
    if (id < 0) throw config_error("sample ids must be non-negative");
}

ExperimentConfig default_config(const std::string& preset) {
  if (!known_presets().count(preset))
    throw config_error("unknown preset '" + preset + "'");
  ExperimentConfig config;
  config.preset = preset;
  // Weight decay keeps the fitted boundary gentle enough that midpoint
  // quadrature of the path gradient stays accurate at a few hundred steps;
  // epochs compensate for the slower effective learning under decay.
  if (preset == "custom") {
    config.train.epochs = 150;
    config.train.weight_decay = 0.15;
  } else if (preset == "three-feature") {
    config.train.epochs = 400;
    config.train.weight_decay = 0.07;
  } else if (preset == "spiral") {
    config.train.epochs = 1200;
    config.train.weight_decay = 0.006;
  } else {  // brain
    config.train.epochs = 25;
    config.train.weight_decay = 0.3;
    config.n_boundary_samples = 200;
  }
  return config;
}

StageSeeds stage_seeds(std::uint64_t global_seed) {
  return {derive_seed(global_seed, 1), derive_seed(global_seed, 2),
          derive_seed(global_seed, 3), derive_seed(global_seed, 4)};
}

PresetData make_preset_data(const std::string& preset,
                            const DatasetOverrides& ov, std::uint64_t data_seed) {
  PresetData out;
  if (preset == "custom" || preset == "three-feature") {
    const int dim = preset == "custom" ? 2 : 3;
    const double sep = preset == "custom" ? 2.0 : 2.3;
    out.dataset = generate_hypercube(
        ov.n_samples.value_or(2000), ov.n_features.value_or(dim),
        ov.n_informative.value_or(dim), ov.clusters_per_class.value_or(2),
        ov.class_sep.value_or(sep), data_seed);
  } else if (preset == "spiral") {
    out.dataset =
        generate_spiral(ov.n_samples.value_or(2000), ov.noise_sigma.value_or(0.05),
                        ov.turns.value_or(1.5), data_seed);
  } else if (preset == "brain") {
    BrainData brain = generate_brain(
        ov.n_samples.value_or(2500), data_seed, ov.smoothing_sigma.value_or(2.0),
        ov.class_shift.value_or(1.2));
    out.dataset = std::move(brain.dataset);
    out.layout = std::move(brain.layout);
  } else {
    throw config_error("unknown preset '" + preset + "'");
  }
  out.dataset.name = preset;
  return out;
}

namespace {

json overrides_to_json(const DatasetOverrides& ov) {
  json j = json::object();
  if (ov.n_samples) j["n_samples"] = *ov.n_samples;
  if (ov.n_features) j["n_features"] = *ov.n_features;
  if (ov.n_informative) j["n_informative"] = *ov.n_informative;
  if (ov.clusters_per_class) j["clusters_per_class"] = *ov.clusters_per_class;
  if (ov.class_sep) j["class_sep"] = *ov.class_sep;
  if (ov.noise_sigma) j["noise_sigma"] = *ov.noise_sigma;
  if (ov.turns) j["turns"] = *ov.turns;
  if (ov.smoothing_sigma) j["smoothing_sigma"] = *ov.smoothing_sigma;
  if (ov.class_shift) j["class_shift"] = *ov.class_shift;
  return j;
}

void overrides_from_json(const json& j, DatasetOverrides& ov) {
  for (const auto& [key, value] : j.items()) {
    if (key == "n_samples") ov.n_samples = value.get<int>();
    else if (key == "n_features") ov.n_features = value.get<int>();
    else if (key == "n_informative") ov.n_informative = value.get<int>();
    else if (key == "clusters_per_class") ov.clusters_per_class = value.get<int>();
    else if (key == "class_sep") ov.class_sep = value.get<double>();
    else if (key == "noise_sigma") ov.noise_sigma = value.get<double>();
    else if (key == "turns") ov.turns = value.get<double>();
    else if (key == "smoothing_sigma") ov.smoothing_sigma = value.get<double>();
    else if (key == "class_shift") ov.class_shift = value.get<double>();
    else throw config_error("unknown dataset override '" + key + "'");
  }
}

}  // namespace

void save_experiment_config(const std::filesystem::path& path,
                            const ExperimentConfig& config) {
  json j;
  j["preset"] = config.preset;
  j["seed"] = config.seed;
  j["dataset"] = overrides_to_json(config.dataset);
  j["hidden"] = config.hidden;
  j["train"] = {{"learning_rate", config.train.learning_rate},
                {"epochs", config.train.epochs},
                {"batch_size", config.train.batch_size},
                {"weight_decay", config.train.weight_decay},
                {"split_fraction", config.train.split_fraction}};
  j["search"] = {
      {"epsilon", config.search.epsilon},
      {"max_steps", config.search.max_steps},
      {"gamma", config.search.gamma},
      {"pool_mode", config.search.pool_mode == SearchConfig::PoolMode::subsample
                        ? "subsample"
                        : "full_class"},
      {"subsample_k", config.search.subsample_k}};
  j["n_boundary_samples"] = config.n_boundary_samples;
  json attr;
  attr["steps"] = config.attribution.steps;
  attr["mode"] = config.attribution.mode;
  attr["sample_ids"] = config.attribution.sample_ids;
  if (!config.attribution.custom_point.empty())
    attr["custom_point"] = config.attribution.custom_point;
  j["attribution"] = std::move(attr);

  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw io_error("write failed for " + path.string());
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw parse_error(path.string() + ": " + e.what());
  }

  ExperimentConfig config;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "preset") {
        config.preset = value.get<std::string>();
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "dataset") {
        overrides_from_json(value, config.dataset);
      } else if (key == "hidden") {
        config.hidden = value.get<std::vector<int>>();
      } else if (key == "train") {
        for (const auto& [k2, v2] : value.items()) {
          if (k2 == "learning_rate") config.train.learning_rate = v2.get<double>();
          else if (k2 == "epochs") config.train.epochs = v2.get<int>();
          else if (k2 == "batch_size") config.train.batch_size = v2.get<int>();
          else if (k2 == "weight_decay") config.train.weight_decay = v2.get<double>();
          else if (k2 == "split_fraction") config.train.split_fraction = v2.get<double>();
          else throw config_error("unknown train option '" + k2 + "'");
        }
      } else if (key == "search") {
        for (const auto& [k2, v2] : value.items()) {
          if (k2 == "epsilon") config.search.epsilon = v2.get<double>();
          else if (k2 == "max_steps") config.search.max_steps = v2.get<int>();
          else if (k2 == "gamma") config.search.gamma = v2.get<double>();
          else if (k2 == "pool_mode")
            config.search.pool_mode = v2.get<std::string>() == "subsample"
                                          ? SearchConfig::PoolMode::subsample
                                          : SearchConfig::PoolMode::full_class;
          else if (k2 == "subsample_k") config.search.subsample_k = v2.get<int>();
          else throw config_error("unknown search option '" + k2 + "'");
        }
      } else if (key == "n_boundary_samples") {
        config.n_boundary_samples = value.get<int>();
      } else if (key == "attribution") {
        for (const auto& [k2, v2] : value.items()) {
          if (k2 == "steps") config.attribution.steps = v2.get<int>();
          else if (k2 == "mode") config.attribution.mode = v2.get<std::string>();
          else if (k2 == "sample_ids")
            config.attribution.sample_ids = v2.get<std::vector<int>>();
          else if (k2 == "custom_point")
            config.attribution.custom_point = v2.get<std::vector<double>>();
          else throw config_error("unknown attribution option '" + k2 + "'");
        }
      } else {
        throw config_error("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw parse_error(path.string() + ": " + e.what());
  }
  config.validate();
  return config;
}

ExperimentReport run_report(const ExperimentConfig& config) {
  config.validate();
  if (config.out_dir.empty()) throw config_error("output directory not set");
  std::filesystem::create_directories(config.out_dir);
  const StageSeeds seeds = stage_seeds(config.seed);

  ExperimentReport report;
  auto out_path = [&](const std::string& name) {
    report.files.push_back(name);
    return config.out_dir / name;
  };

  save_experiment_config(out_path("config.json"), config);

  // Data.
  PresetData data = make_preset_data(config.preset, config.dataset, seeds.data);
  const Dataset& dataset = data.dataset;
  write_dataset_csv(out_path("dataset.csv"), dataset);
  if (data.layout)
    write_brain_layout(out_path("brain_mask.pgm"), out_path("brain_layout.json"),
                       *data.layout);

  // Model.
  TrainConfig tc = config.train;
  tc.seed = seeds.train;
  const NetworkSpec spec = NetworkSpec::mlp(dataset.n_features(), config.hidden);
  TrainResult trained = train(spec, dataset, tc);
  const TrainedModel& model = trained.model;
  write_model_json(out_path("model.json"), model);
  report.accuracy = trained.metrics.accuracy;
  report.f1 = trained.metrics.f1;

  const Split split =
      train_test_split(dataset.n_samples(), tc.split_fraction, tc.seed);
  const Dataset train_set = dataset.subset(split.train);

  // Boundary sampling.
  SearchConfig sc = config.search;
  sc.pool_seed = seeds.pool;
  const BoundarySampleSet boundary =
      sample_boundary(model, train_set, config.n_boundary_samples, sc);
  write_boundary_csv(out_path("boundary.csv"), boundary, sc);
  report.convergence_rate =
      boundary.n_requested > 0
          ? 1.0 - static_cast<double>(boundary.n_failed) / boundary.n_requested
          : 0.0;
  if (boundary.samples.empty())
    throw data_error("no boundary search converged; cannot attribute");

  const ManifoldReport manifold =
      manifold_closeness(boundary.points(), train_set.features);
  report.manifold_fraction = manifold.fraction_within;
  report.manifold_threshold = manifold.threshold;

  // Attribution targets: positions into the held-out split.
  std::vector<int> ids = config.attribution.sample_ids;
  if (ids.empty()) {
    const int n_default = std::min<int>(8, static_cast<int>(split.test.size()));
    for (int i = 0; i < n_default; ++i) ids.push_back(i);
  }
  for (int id : ids)
    if (id >= static_cast<int>(split.test.size()))
      throw config_error("unknown sample id " + std::to_string(id));

  std::mt19937_64 noise_rng(derive_seed(seeds.noise, 0));
  std::normal_distribution<double> gauss(0.0, 1.0);

  json sample_records = json::array();
  long consistent = 0, informative_total = 0;
  std::vector<int> histogram;

  struct FirstSample {
    Eigen::VectorXd x, baseline;
    Attribution attribution;
    CrossingReport crossings;
  };
  std::optional<FirstSample> first;

  for (int id : ids) {
    const int row = split.test[id];
    const Eigen::VectorXd x = dataset.features.row(row).transpose();
    const int label = dataset.labels(row);

    Eigen::VectorXd baseline;
    int source_index = -1;
    if (config.attribution.mode == "optimal") {
      const BaselineSelection sel =
          select_optimal_baseline(x, boundary.samples, model);
      baseline = sel.baseline;
      source_index = sel.selected_index;
    } else if (config.attribution.mode == "random-db") {
      // Deliberately faulty baseline: the farthest converged boundary sample.
      int far = 0;
      double far_d2 = (x - boundary.samples[0].point).squaredNorm();
      for (int i = 1; i < static_cast<int>(boundary.samples.size()); ++i) {
        const double d2 = (x - boundary.samples[i].point).squaredNorm();
        if (d2 > far_d2) {
          far_d2 = d2;
          far = i;
        }
      }
      baseline = boundary.samples[far].point;
      source_index = far;
    } else if (config.attribution.mode == "zero") {
      baseline = Eigen::VectorXd::Zero(dataset.n_features());
    } else if (config.attribution.mode == "noise") {
      baseline.resize(dataset.n_features());
      for (Eigen::Index d = 0; d < baseline.size(); ++d)
        baseline(d) = gauss(noise_rng);
    } else {  // custom-point
      if (static_cast<int>(config.attribution.custom_point.size()) !=
          dataset.n_features())
        throw config_error("custom point dimension does not match the dataset");
      baseline = Eigen::Map<const Eigen::VectorXd>(
          config.attribution.custom_point.data(),
          config.attribution.custom_point.size());
    }

    const Attribution attribution = integrated_gradients(
        model, x, baseline, config.attribution.steps, label);
    write_attribution_csv(
        out_path("attribution_" + std::to_string(id) + ".csv"), attribution);

    const CrossingReport crossings = count_crossings(model, baseline, x);
    if (static_cast<int>(histogram.size()) <= crossings.count)
      histogram.resize(crossings.count + 1, 0);
    ++histogram[crossings.count];

    for (int d : dataset.informative_indices) {
      ++informative_total;
      if (attribution.delta(d) * attribution.cumulated_gradients(d) >= 0.0)
        ++consistent;
    }
    report.max_completeness_residual = std::max(
        report.max_completeness_residual, attribution.completeness_residual);

    json record;
    record["sample_id"] = id;
    record["dataset_row"] = row;
    record["target_class"] = label;
    record["mode"] = config.attribution.mode;
    record["baseline_index"] = source_index;
    record["baseline_distance"] = (x - baseline).norm();
    record["baseline_prediction"] = model.predict_proba(baseline);
    record["sample_prediction"] = model.predict_proba(x);
    record["orthogonality"] = cosine_to_gradient(model, baseline, x);
    record["crossings"] = crossings.count;
    record["completeness_residual"] = attribution.completeness_residual;
    record["attribution_sum"] = attribution.values.sum();
    sample_records.push_back(std::move(record));

    if (!first) first = FirstSample{x, baseline, attribution, crossings};
  }
  report.sign_consistency_rate =
      informative_total > 0
          ? static_cast<double>(consistent) / static_cast<double>(informative_total)
          : 1.0;
  report.crossing_histogram = histogram;

  // Figures for the first analyzed sample.
  if (dataset.n_features() >= 2) {
    Figure fig(dataset.name + ": data and sampled boundary", "x0", "x1");
    fig.add_scatter(rows_of_class(dataset, 0, 1500).leftCols(2), kClass0Color,
                    "class 0");
    fig.add_scatter(rows_of_class(dataset, 1, 1500).leftCols(2), kClass1Color,
                    "class 1");
    fig.add_scatter(boundary.points().leftCols(2), kBoundaryColor,
                    "boundary samples", 2.0);
    if (first) {
      Eigen::MatrixXd pt(1, 2);
      pt << first->x(0), first->x(1);
      fig.add_scatter(pt, kSampleColor, "analyzed sample", 4.0);
      pt << first->baseline(0), first->baseline(1);
      fig.add_scatter(pt, kBaselineColor, "baseline", 4.0);
    }
    fig.write(out_path("figure_data_boundary.svg"));
  }

  if (first) {
    const PathTrace trace = gradient_along_path(
        model, first->baseline, first->x, 201, first->attribution.target_class);
    Figure fig("gradients along the baseline-to-sample path", "t",
               "gradient / prediction");
    const std::vector<int> shown =
        top_features_by_magnitude(first->attribution.values, 8);
    std::vector<double> ts(trace.t_values.data(),
                           trace.t_values.data() + trace.t_values.size());
    const std::vector<std::string> palette = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                              "#d62728", "#9467bd", "#8c564b",
                                              "#e377c2", "#7f7f7f"};
    for (std::size_t i = 0; i < shown.size(); ++i) {
      std::vector<double> ys(ts.size());
      for (std::size_t k = 0; k < ts.size(); ++k)
        ys[k] = trace.gradients(shown[i], static_cast<Eigen::Index>(k));
      fig.add_line(ts, ys, palette[i % palette.size()],
                   "d f / d x" + std::to_string(shown[i]));
    }
    std::vector<double> preds(trace.predictions.data(),
                              trace.predictions.data() + trace.predictions.size());
    fig.add_line(ts, preds, kPredictionColor, "prediction", 2.0);
    fig.add_hline(0.5, kCrossingColor);
    for (double t : first->crossings.crossing_ts)
      fig.add_vline(t, kCrossingColor);
    fig.write(out_path("figure_path_gradients.svg"));

    const std::vector<int> bar_features =
        top_features_by_magnitude(first->attribution.values, 20);
    std::vector<BarGroup> groups;
    for (int d : bar_features)
      groups.push_back({"x" + std::to_string(d),
                        {first->attribution.values(d), first->attribution.delta(d),
                         first->attribution.cumulated_gradients(d)}});
    write_bar_chart(out_path("figure_attribution_bars.svg"),
                    "attribution factors per feature",
                    {"integrated gradients", "delta", "cumulated gradients"},
                    {"#1f77b4", "#ff7f0e", "#2ca02c"}, groups);
  }

  // Report file.
  json j;
  j["preset"] = config.preset;
  j["seed"] = config.seed;
  j["metrics"] = {{"accuracy", trained.metrics.accuracy},
                  {"f1", trained.metrics.f1},
                  {"initial_loss", trained.metrics.initial_loss},
                  {"final_loss", trained.metrics.final_loss}};
  j["boundary"] = {{"n_requested", boundary.n_requested},
                   {"n_converged", static_cast<int>(boundary.samples.size())},
                   {"n_failed", boundary.n_failed},
                   {"convergence_rate", report.convergence_rate},
                   {"manifold_fraction", report.manifold_fraction},
                   {"manifold_threshold", report.manifold_threshold}};
  j["attribution"] = {{"mode", config.attribution.mode},
                      {"steps", config.attribution.steps},
                      {"sign_consistency_rate", report.sign_consistency_rate},
                      {"max_completeness_residual", report.max_completeness_residual},
                      {"crossing_histogram", report.crossing_histogram},
                      {"samples", std::move(sample_records)}};

  const std::filesystem::path report_path = out_path("report.json");
  j["files"] = report.files;
  std::ofstream out(report_path, std::ios::binary);
  if (!out) throw io_error("cannot open " + report_path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw io_error("write failed for " + report_path.string());
  return report;
}

}  // namespace ibs
