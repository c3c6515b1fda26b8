#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ibs/attribution.hpp"
#include "ibs/boundary_oracle.hpp"
#include "ibs/datagen.hpp"
#include "ibs/error.hpp"
#include "ibs/experiment.hpp"
#include "ibs/io.hpp"
#include "ibs/network.hpp"
#include "ibs/rng.hpp"
#include "ibs/search.hpp"
#include "ibs/stats.hpp"
#include "ibs/svg.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Relative output paths land under IBS_OUTPUT_ROOT when it is set.
fs::path resolve_out(const fs::path& path) {
  if (path.is_absolute()) return path;
  const char* root = std::getenv("IBS_OUTPUT_ROOT");
  if (root && *root) return fs::path(root) / path;
  return path;
}

void add_override_flags(CLI::App* cmd, ibs::DatasetOverrides& ov) {
  cmd->add_option("--n-samples", ov.n_samples, "sample count");
  cmd->add_option("--n-features", ov.n_features, "feature count (hypercube)");
  cmd->add_option("--n-informative", ov.n_informative,
                  "informative feature count (hypercube)");
  cmd->add_option("--clusters-per-class", ov.clusters_per_class,
                  "clusters per class (hypercube)");
  cmd->add_option("--class-sep", ov.class_sep, "cluster separation (hypercube)");
  cmd->add_option("--noise-sigma", ov.noise_sigma, "positional noise (spiral)");
  cmd->add_option("--turns", ov.turns, "spiral revolutions");
  cmd->add_option("--smoothing-sigma", ov.smoothing_sigma,
                  "Gaussian smoothing sigma (brain)");
  cmd->add_option("--class-shift", ov.class_shift,
                  "informative-pixel class shift (brain)");
}

// generate ------------------------------------------------------------------

struct GenerateOptions {
  std::string preset = "custom";
  std::uint64_t seed = 42;
  std::string out = "dataset.csv";
  ibs::DatasetOverrides overrides;
};

int cmd_generate(const GenerateOptions& opt) {
  const fs::path out = resolve_out(opt.out);
  ibs::PresetData data =
      ibs::make_preset_data(opt.preset, opt.overrides, opt.seed);
  ibs::write_dataset_csv(out, data.dataset);
  if (data.layout) {
    fs::path mask = out;
    mask.replace_filename(out.stem().string() + "_mask.pgm");
    fs::path sidecar = out;
    sidecar.replace_filename(out.stem().string() + "_layout.json");
    ibs::write_brain_layout(mask, sidecar, *data.layout);
    std::cout << "layout -> " << mask.string() << ", " << sidecar.string()
              << "\n";
  }
  std::cout << "generated " << data.dataset.n_samples() << " samples x "
            << data.dataset.n_features() << " features (" << opt.preset
            << ") -> " << out.string() << "\n";
  return 0;
}

// train ---------------------------------------------------------------------

struct TrainOptions {
  std::string dataset;
  std::string out = "model.json";
  std::vector<int> hidden = {10, 10, 10, 10, 10};
  ibs::TrainConfig config;
};

int cmd_train(const TrainOptions& opt) {
  const ibs::Dataset dataset = ibs::read_dataset_csv(resolve_out(opt.dataset));
  const ibs::NetworkSpec spec =
      ibs::NetworkSpec::mlp(dataset.n_features(), opt.hidden);
  const ibs::TrainResult result = ibs::train(spec, dataset, opt.config);
  const fs::path out = resolve_out(opt.out);
  ibs::write_model_json(out, result.model);
  std::cout << "accuracy " << result.metrics.accuracy << ", f1 "
            << result.metrics.f1 << ", train loss "
            << result.metrics.initial_loss << " -> "
            << result.metrics.final_loss << "\n";
  std::cout << "model -> " << out.string() << "\n";
  return 0;
}

// boundary ------------------------------------------------------------------

struct BoundaryOptions {
  std::string model;
  std::string dataset;
  std::string out = "boundary.csv";
  int n = 500;
  ibs::SearchConfig config;
  std::string pool_mode = "full_class";
};

int cmd_boundary(BoundaryOptions opt) {
  const ibs::TrainedModel model = ibs::read_model_json(resolve_out(opt.model));
  const ibs::Dataset dataset = ibs::read_dataset_csv(resolve_out(opt.dataset));
  if (dataset.n_features() != model.input_dim())
    throw ibs::shape_error("dataset features do not match the model input");
  if (opt.pool_mode == "subsample")
    opt.config.pool_mode = ibs::SearchConfig::PoolMode::subsample;
  else if (opt.pool_mode != "full_class")
    throw ibs::config_error("pool mode must be full_class or subsample");

  const ibs::BoundarySampleSet set =
      ibs::sample_boundary(model, dataset, opt.n, opt.config);
  const fs::path out = resolve_out(opt.out);
  ibs::write_boundary_csv(out, set, opt.config);

  std::cout << "converged " << set.samples.size() << "/" << set.n_requested
            << " searches\n";
  if (!set.samples.empty()) {
    const ibs::ManifoldReport manifold =
        ibs::manifold_closeness(set.points(), dataset.features);
    std::cout << "manifold: " << 100.0 * manifold.fraction_within
              << "% of samples within the p99 neighbor radius "
              << manifold.threshold << "\n";
  }
  std::cout << "boundary -> " << out.string() << "\n";
  return 0;
}

// attribute -----------------------------------------------------------------

struct AttributeOptions {
  std::string model;
  std::string dataset;
  std::string boundary;
  std::string out = "attributions";
  std::vector<int> ids = {0};
  std::string mode = "optimal";
  int steps = 128;
  std::uint64_t seed = 0;
  std::vector<double> custom_point;
};

int cmd_attribute(const AttributeOptions& opt) {
  const ibs::TrainedModel model = ibs::read_model_json(resolve_out(opt.model));
  const ibs::Dataset dataset = ibs::read_dataset_csv(resolve_out(opt.dataset));
  const ibs::BoundarySampleSet boundary =
      ibs::read_boundary_csv(resolve_out(opt.boundary));
  if (dataset.n_features() != model.input_dim())
    throw ibs::shape_error("dataset features do not match the model input");

  const bool needs_pool = opt.mode == "optimal" || opt.mode == "random-db";
  if (needs_pool && boundary.samples.empty())
    throw ibs::data_error("boundary file has no converged samples");

  const fs::path out_dir = resolve_out(opt.out);
  fs::create_directories(out_dir);

  std::mt19937_64 noise_rng(ibs::derive_seed(opt.seed, 4));
  std::normal_distribution<double> gauss(0.0, 1.0);

  json records = json::array();
  bool first = true;
  for (int id : opt.ids) {
    if (id < 0 || id >= dataset.n_samples())
      throw ibs::config_error("unknown sample id " + std::to_string(id));
    const Eigen::VectorXd x = dataset.features.row(id).transpose();
    const int label = dataset.labels(id);

    Eigen::VectorXd baseline;
    int source_index = -1;
    if (opt.mode == "optimal") {
      const ibs::BaselineSelection sel =
          ibs::select_optimal_baseline(x, boundary.samples, model);
      baseline = sel.baseline;
      source_index = sel.selected_index;
    } else if (opt.mode == "random-db") {
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
    } else if (opt.mode == "zero") {
      baseline = Eigen::VectorXd::Zero(dataset.n_features());
    } else if (opt.mode == "noise") {
      baseline.resize(dataset.n_features());
      for (Eigen::Index d = 0; d < baseline.size(); ++d)
        baseline(d) = gauss(noise_rng);
    } else if (opt.mode == "custom-point") {
      if (static_cast<int>(opt.custom_point.size()) != dataset.n_features())
        throw ibs::config_error("custom point dimension does not match the dataset");
      baseline = Eigen::Map<const Eigen::VectorXd>(opt.custom_point.data(),
                                                   opt.custom_point.size());
    } else {
      throw ibs::config_error("unknown attribution mode '" + opt.mode + "'");
    }

    const ibs::Attribution attribution =
        ibs::integrated_gradients(model, x, baseline, opt.steps, label);
    ibs::write_attribution_csv(
        out_dir / ("attribution_" + std::to_string(id) + ".csv"), attribution);
    const ibs::CrossingReport crossings =
        ibs::count_crossings(model, baseline, x);

    json record;
    record["sample_id"] = id;
    record["target_class"] = label;
    record["mode"] = opt.mode;
    record["baseline_index"] = source_index;
    record["baseline_distance"] = (x - baseline).norm();
    record["baseline_prediction"] = model.predict_proba(baseline);
    record["sample_prediction"] = model.predict_proba(x);
    record["crossings"] = crossings.count;
    record["completeness_residual"] = attribution.completeness_residual;
    record["attribution_sum"] = attribution.values.sum();
    records.push_back(std::move(record));

    if (first) {
      first = false;
      // Fig.-style companions for the first sample: gradients along the
      // path and the factor bar chart.
      const ibs::PathTrace trace =
          ibs::gradient_along_path(model, baseline, x, 201, label);
      ibs::Figure fig("gradients along the baseline-to-sample path", "t",
                      "gradient / prediction");
      std::vector<double> ts(trace.t_values.data(),
                             trace.t_values.data() + trace.t_values.size());
      const std::vector<std::string> palette = {
          "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
      std::vector<int> shown(dataset.n_features());
      std::iota(shown.begin(), shown.end(), 0);
      std::stable_sort(shown.begin(), shown.end(), [&](int a, int b) {
        return std::abs(attribution.values(a)) > std::abs(attribution.values(b));
      });
      shown.resize(std::min<std::size_t>(shown.size(), 8));
      std::sort(shown.begin(), shown.end());
      for (std::size_t i = 0; i < shown.size(); ++i) {
        std::vector<double> ys(ts.size());
        for (std::size_t k = 0; k < ts.size(); ++k)
          ys[k] = trace.gradients(shown[i], static_cast<Eigen::Index>(k));
        fig.add_line(ts, ys, palette[i % palette.size()],
                     "d f / d x" + std::to_string(shown[i]));
      }
      std::vector<double> preds(
          trace.predictions.data(),
          trace.predictions.data() + trace.predictions.size());
      fig.add_line(ts, preds, "#111111", "prediction", 2.0);
      fig.add_hline(0.5, "#d62728");
      for (double t : crossings.crossing_ts) fig.add_vline(t, "#d62728");
      fig.write(out_dir / "figure_path_gradients.svg");

      std::vector<int> bars = shown;
      std::vector<ibs::BarGroup> groups;
      for (int d : bars)
        groups.push_back(
            {"x" + std::to_string(d),
             {attribution.values(d), attribution.delta(d),
              attribution.cumulated_gradients(d)}});
      ibs::write_bar_chart(out_dir / "figure_attribution_bars.svg",
                           "attribution factors per feature",
                           {"integrated gradients", "delta", "cumulated gradients"},
                           {"#1f77b4", "#ff7f0e", "#2ca02c"}, groups);
    }
  }

  std::ofstream out(out_dir / "records.json", std::ios::binary);
  if (!out)
    throw ibs::io_error("cannot open " + (out_dir / "records.json").string());
  out << records.dump(2) << "\n";
  std::cout << "attributed " << opt.ids.size() << " sample(s) (" << opt.mode
            << ") -> " << out_dir.string() << "\n";
  return 0;
}

// validate ------------------------------------------------------------------

struct ValidateOptions {
  std::string model;
  std::string boundary;
  std::string dataset;  // optional
  int resolution = 0;   // 0 = default per dimension
};

int cmd_validate(const ValidateOptions& opt) {
  const ibs::TrainedModel model = ibs::read_model_json(resolve_out(opt.model));
  ibs::SearchConfig config;
  const ibs::BoundarySampleSet set =
      ibs::read_boundary_csv(resolve_out(opt.boundary), &config);

  std::vector<ibs::BoundarySample> converged;
  for (const ibs::BoundarySample& b : set.samples)
    if (b.converged) converged.push_back(b);

  bool failed = false;
  auto verdict = [&](const std::string& name, bool pass, const std::string& extra) {
    std::cout << name << ": " << (pass ? "PASS" : "FAIL")
              << (extra.empty() ? "" : " (" + extra + ")") << "\n";
    if (!pass) failed = true;
  };

  // Neutrality: every stored point still sits on the boundary per the
  // tolerance it was found with.
  if (converged.empty()) {
    verdict("neutrality", false, "no converged samples");
  } else {
    double worst = 0.0;
    for (const ibs::BoundarySample& b : converged)
      worst = std::max(worst,
                       std::abs(model.predict_proba(b.point) - 0.5));
    verdict("neutrality", worst <= config.epsilon,
            "max |f - 0.5| = " + ibs::format_double(worst) + ", epsilon = " +
                ibs::format_double(config.epsilon));
  }

  const int dim = model.input_dim();
  if (dim == 2 || dim == 3) {
    if (converged.empty()) {
      verdict("grid agreement", false, "no converged samples");
    } else {
      std::vector<std::pair<double, double>> bounds;
      Eigen::MatrixXd reference;
      if (!opt.dataset.empty()) {
        const ibs::Dataset dataset =
            ibs::read_dataset_csv(resolve_out(opt.dataset));
        bounds = ibs::default_bounds(dataset);
        reference = dataset.features;
      } else {
        for (int d = 0; d < dim; ++d) {
          double lo = converged[0].point(d), hi = lo;
          for (const ibs::BoundarySample& b : converged) {
            lo = std::min(lo, b.point(d));
            hi = std::max(hi, b.point(d));
          }
          const double pad = 0.1 * std::max(hi - lo, 1e-9);
          bounds.emplace_back(lo - pad, hi + pad);
        }
      }
      const int res = opt.resolution > 0 ? opt.resolution : (dim == 2 ? 512 : 96);
      const ibs::GridOracle oracle = ibs::grid_boundary(model, bounds, res);
      if (oracle.boundary_points.empty()) {
        verdict("grid agreement", false, "oracle found no boundary in bounds");
      } else {
        Eigen::MatrixXd oracle_rows(oracle.boundary_points.size(), dim);
        for (std::size_t i = 0; i < oracle.boundary_points.size(); ++i)
          oracle_rows.row(static_cast<Eigen::Index>(i)) =
              oracle.boundary_points[i].transpose();
        Eigen::MatrixXd points(converged.size(), dim);
        for (std::size_t i = 0; i < converged.size(); ++i)
          points.row(static_cast<Eigen::Index>(i)) = converged[i].point.transpose();
        const Eigen::VectorXd dist =
            ibs::nearest_neighbor_distances(points, oracle_rows);
        const double worst = dist.maxCoeff();
        const double tolerance = 2.0 * oracle.cell_diagonal();
        verdict("grid agreement", worst <= tolerance,
                "max distance " + ibs::format_double(worst) + ", tolerance " +
                    ibs::format_double(tolerance));
      }
    }
  } else {
    std::cout << "grid agreement: SKIPPED (dimension " << dim << " > 3)\n";
  }

  if (opt.dataset.empty()) {
    std::cout << "manifold closeness: SKIPPED (no dataset given)\n";
  } else if (converged.empty()) {
    verdict("manifold closeness", false, "no converged samples");
  } else {
    const ibs::Dataset dataset = ibs::read_dataset_csv(resolve_out(opt.dataset));
    Eigen::MatrixXd points(converged.size(), dim);
    for (std::size_t i = 0; i < converged.size(); ++i)
      points.row(static_cast<Eigen::Index>(i)) = converged[i].point.transpose();
    const ibs::ManifoldReport manifold =
        ibs::manifold_closeness(points, dataset.features);
    verdict("manifold closeness", manifold.fraction_within >= 0.95,
            ibs::format_double(100.0 * manifold.fraction_within) +
                "% within radius " + ibs::format_double(manifold.threshold));
  }

  return failed ? 3 : 0;
}

// report --------------------------------------------------------------------

struct ReportOptions {
  std::string preset = "custom";
  std::string config_file;
  std::string out = "report";
  std::uint64_t seed = 0;
  bool seed_set = false;
  ibs::DatasetOverrides overrides;
};

int cmd_report(const ReportOptions& opt) {
  ibs::ExperimentConfig config;
  if (!opt.config_file.empty())
    config = ibs::load_experiment_config(resolve_out(opt.config_file));
  else
    config = ibs::default_config(opt.preset);
  if (opt.config_file.empty()) config.preset = opt.preset;
  if (opt.seed_set) config.seed = opt.seed;

  // CLI overrides win over the config file.
  auto merge = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  merge(config.dataset.n_samples, opt.overrides.n_samples);
  merge(config.dataset.n_features, opt.overrides.n_features);
  merge(config.dataset.n_informative, opt.overrides.n_informative);
  merge(config.dataset.clusters_per_class, opt.overrides.clusters_per_class);
  merge(config.dataset.class_sep, opt.overrides.class_sep);
  merge(config.dataset.noise_sigma, opt.overrides.noise_sigma);
  merge(config.dataset.turns, opt.overrides.turns);
  merge(config.dataset.smoothing_sigma, opt.overrides.smoothing_sigma);
  merge(config.dataset.class_shift, opt.overrides.class_shift);

  config.out_dir = resolve_out(opt.out);
  const ibs::ExperimentReport report = ibs::run_report(config);
  std::cout << "accuracy " << report.accuracy << ", f1 " << report.f1 << "\n";
  std::cout << "boundary convergence " << 100.0 * report.convergence_rate
            << "%, manifold " << 100.0 * report.manifold_fraction << "%\n";
  std::cout << "sign consistency " << 100.0 * report.sign_consistency_rate
            << "%, max completeness residual "
            << report.max_completeness_residual << "\n";
  std::cout << "report -> " << (config.out_dir / "report.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decision-boundary baseline sampling for integrated gradients"};
  app.require_subcommand(1);

  GenerateOptions gen;
  CLI::App* generate = app.add_subcommand("generate", "write a synthetic dataset");
  generate->add_option("--preset", gen.preset,
                       "custom | spiral | three-feature | brain");
  generate->add_option("--seed", gen.seed, "generator seed");
  generate->add_option("--out", gen.out, "output CSV path");
  add_override_flags(generate, gen.overrides);

  TrainOptions tr;
  CLI::App* train = app.add_subcommand("train", "train a classifier on a dataset");
  train->add_option("--dataset", tr.dataset, "dataset CSV")->required();
  train->add_option("--out", tr.out, "output model path");
  train->add_option("--hidden", tr.hidden, "hidden layer sizes");
  train->add_option("--learning-rate", tr.config.learning_rate, "Adam step size");
  train->add_option("--epochs", tr.config.epochs, "training epochs");
  train->add_option("--batch-size", tr.config.batch_size, "minibatch size");
  train->add_option("--weight-decay", tr.config.weight_decay, "L2 penalty");
  train->add_option("--split-fraction", tr.config.split_fraction,
                    "training fraction of the data");
  train->add_option("--seed", tr.config.seed, "training seed");

  BoundaryOptions bo;
  CLI::App* boundary =
      app.add_subcommand("boundary", "sample the decision boundary");
  boundary->add_option("--model", bo.model, "model file")->required();
  boundary->add_option("--dataset", bo.dataset, "dataset CSV")->required();
  boundary->add_option("--out", bo.out, "output boundary CSV");
  boundary->add_option("--n", bo.n, "number of searches");
  boundary->add_option("--epsilon", bo.config.epsilon, "halting tolerance");
  boundary->add_option("--max-steps", bo.config.max_steps, "step limit");
  boundary->add_option("--gamma", bo.config.gamma, "step scaling base");
  boundary->add_option("--pool-seed", bo.config.pool_seed, "target-draw seed");
  boundary->add_option("--pool-mode", bo.pool_mode, "full_class | subsample");
  boundary->add_option("--subsample-k", bo.config.subsample_k,
                       "per-class pool size in subsample mode");

  AttributeOptions at;
  CLI::App* attribute =
      app.add_subcommand("attribute", "integrated gradients for chosen samples");
  attribute->add_option("--model", at.model, "model file")->required();
  attribute->add_option("--dataset", at.dataset, "dataset CSV")->required();
  attribute->add_option("--boundary", at.boundary, "boundary CSV")->required();
  attribute->add_option("--out", at.out, "output directory");
  attribute->add_option("--ids", at.ids, "dataset row ids to explain");
  attribute->add_option("--mode", at.mode,
                        "optimal | random-db | zero | noise | custom-point");
  attribute->add_option("--steps", at.steps, "quadrature steps");
  attribute->add_option("--seed", at.seed, "noise-baseline seed");
  attribute->add_option("--custom-point", at.custom_point,
                        "baseline coordinates for custom-point mode");

  ValidateOptions va;
  CLI::App* validate =
      app.add_subcommand("validate", "check a boundary file against oracles");
  validate->add_option("--model", va.model, "model file")->required();
  validate->add_option("--boundary", va.boundary, "boundary CSV")->required();
  validate->add_option("--dataset", va.dataset,
                       "dataset CSV for bounds and manifold check");
  validate->add_option("--resolution", va.resolution, "grid resolution");

  ReportOptions re;
  CLI::App* report =
      app.add_subcommand("report", "full pipeline into an output directory");
  report->add_option("--preset", re.preset,
                     "custom | spiral | three-feature | brain");
  report->add_option("--config", re.config_file, "experiment config JSON");
  report->add_option("--out", re.out, "output directory");
  report->add_option("--seed", re.seed, "global experiment seed")
      ->each([&](const std::string&) { re.seed_set = true; });
  add_override_flags(report, re.overrides);

  try {
    app.parse(argc, argv);
    if (*generate) return cmd_generate(gen);
    if (*train) return cmd_train(tr);
    if (*boundary) return cmd_boundary(bo);
    if (*attribute) return cmd_attribute(at);
    if (*validate) return cmd_validate(va);
    if (*report) return cmd_report(re);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const ibs::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ibs::unsupported_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ibs::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ibs::data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ibs::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ibs::shape_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
