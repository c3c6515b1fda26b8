#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ibs/datagen.hpp"
#include "ibs/dataset.hpp"
#include "ibs/network.hpp"
#include "ibs/search.hpp"

namespace ibs {

// Optional per-preset generator knobs; unset fields keep preset defaults.
struct DatasetOverrides {
  std::optional<int> n_samples;
  std::optional<int> n_features;
  std::optional<int> n_informative;
  std::optional<int> clusters_per_class;
  std::optional<double> class_sep;
  std::optional<double> noise_sigma;
  std::optional<double> turns;
  std::optional<double> smoothing_sigma;
  std::optional<double> class_shift;
};

struct AttributionSettings {
  int steps = 128;
  std::vector<int> sample_ids;  // test-split positions; empty = first 8
  std::string mode = "optimal"; // optimal | random-db | zero | noise | custom-point
  std::vector<double> custom_point;
};

struct ExperimentConfig {
  std::string preset = "custom";
  std::uint64_t seed = 42;
  std::filesystem::path out_dir;

  DatasetOverrides dataset;
  std::vector<int> hidden = {10, 10, 10, 10, 10};
  TrainConfig train;
  SearchConfig search;
  int n_boundary_samples = 500;
  AttributionSettings attribution;

  void validate() const;
};

// Preset defaults (generator parameters, epochs, boundary-sample counts)
// for custom | spiral | three-feature | brain.
ExperimentConfig default_config(const std::string& preset);

ExperimentConfig load_experiment_config(const std::filesystem::path& path);
void save_experiment_config(const std::filesystem::path& path,
                            const ExperimentConfig& config);

struct PresetData {
  Dataset dataset;
  std::optional<BrainLayout> layout;  // brain preset only
};

// Deterministic dataset construction for a preset with overrides applied.
PresetData make_preset_data(const std::string& preset,
                            const DatasetOverrides& overrides,
                            std::uint64_t data_seed);

// Stage seeds fanned out from the experiment's global seed.
struct StageSeeds {
  std::uint64_t data;
  std::uint64_t train;
  std::uint64_t pool;
  std::uint64_t noise;
};
StageSeeds stage_seeds(std::uint64_t global_seed);

struct ExperimentReport {
  double accuracy = 0.0;
  double f1 = 0.0;
  double convergence_rate = 0.0;
  double manifold_fraction = 0.0;
  double manifold_threshold = 0.0;
  double sign_consistency_rate = 0.0;
  double max_completeness_residual = 0.0;
  std::vector<int> crossing_histogram;  // index = crossing count
  std::vector<std::string> files;       // written files, relative to out_dir
};

// Full pipeline: generate, train, boundary sampling, attribution, figures,
// report.json. Every produced file lands under config.out_dir.
ExperimentReport run_report(const ExperimentConfig& config);

}  // namespace ibs
