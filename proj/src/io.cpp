#include "ibs/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "ibs/error.hpp"

namespace ibs {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  return in;
}

double parse_field_double(const std::string& field, int line) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw parse_error("bad numeric field '" + field + "'", line);
  return v;
}

long parse_field_int(const std::string& field, int line) {
  long v = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw parse_error("bad integer field '" + field + "'", line);
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

// Reads the "# {...}" metadata comment expected as the first line.
json read_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw parse_error(path.string() + ": missing metadata header line", 1);
  try {
    return json::parse(line.substr(2));
  } catch (const json::exception& e) {
    throw parse_error(path.string() + ": bad metadata header: " + e.what(), 1);
  }
}

json model_to_json(const TrainedModel& model) {
  json j;
  j["format"] = "ibs-model";
  j["version"] = 1;
  j["layer_sizes"] = model.spec.layer_sizes;
  j["hidden_activation"] = "relu";
  j["output_activation"] = "sigmoid";
  j["train_seed"] = model.train_seed;
  json weights = json::array();
  for (const Eigen::MatrixXd& w : model.weights) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < w.cols(); ++c) row.push_back(w(r, c));
      rows.push_back(std::move(row));
    }
    weights.push_back(std::move(rows));
  }
  j["weights"] = std::move(weights);
  json biases = json::array();
  for (const Eigen::VectorXd& b : model.biases) {
    json vec = json::array();
    for (Eigen::Index i = 0; i < b.size(); ++i) vec.push_back(b(i));
    biases.push_back(std::move(vec));
  }
  j["biases"] = std::move(biases);
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw io_error("double formatting failed");
  return std::string(buf, ptr);
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset) {
  dataset.validate();
  std::ofstream out = open_out(path);
  json meta;
  meta["name"] = dataset.name;
  meta["seed"] = dataset.seed;
  meta["informative_indices"] = dataset.informative_indices;
  out << "# " << meta.dump() << "\n";
  for (int i = 0; i < dataset.n_samples(); ++i) {
    for (int d = 0; d < dataset.n_features(); ++d)
      out << format_double(dataset.features(i, d)) << ',';
    out << dataset.labels(i) << "\n";
  }
  if (!out) throw io_error("write failed for " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  const json meta = read_header(in, path);

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  int line_no = 1;
  std::size_t n_fields = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() < 2)
      throw parse_error(path.string() + ": expected features and a label", line_no);
    if (n_fields == 0)
      n_fields = fields.size();
    else if (fields.size() != n_fields)
      throw parse_error(path.string() + ": inconsistent column count", line_no);
    std::vector<double> row(fields.size() - 1);
    for (std::size_t d = 0; d + 1 < fields.size(); ++d)
      row[d] = parse_field_double(fields[d], line_no);
    const long label = parse_field_int(fields.back(), line_no);
    if (label != 0 && label != 1)
      throw parse_error(path.string() + ": label must be 0 or 1", line_no);
    rows.push_back(std::move(row));
    labels.push_back(static_cast<int>(label));
  }
  if (rows.empty()) throw parse_error(path.string() + ": no data rows", line_no);

  Dataset dataset;
  dataset.features.resize(rows.size(), n_fields - 1);
  dataset.labels.resize(labels.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t d = 0; d < n_fields - 1; ++d)
      dataset.features(i, d) = rows[i][d];
    dataset.labels(static_cast<Eigen::Index>(i)) = labels[i];
  }
  try {
    dataset.name = meta.at("name").get<std::string>();
    dataset.seed = meta.at("seed").get<std::uint64_t>();
    dataset.informative_indices = meta.at("informative_indices").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw parse_error(path.string() + ": bad metadata header: " + e.what(), 1);
  }
  dataset.validate();
  return dataset;
}

void write_model_json(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out = open_out(path);
  out << model_to_json(model).dump(2) << "\n";
  if (!out) throw io_error("write failed for " + path.string());
}

TrainedModel read_model_json(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw parse_error(path.string() + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "ibs-model")
      throw parse_error(path.string() + ": not a model file");
    if (j.at("version").get<int>() != 1)
      throw parse_error(path.string() + ": unsupported model version");
    NetworkSpec spec;
    spec.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    for (const json& rows : j.at("weights")) {
      const auto mat = rows.get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd w(mat.size(), mat.empty() ? 0 : mat[0].size());
      for (std::size_t r = 0; r < mat.size(); ++r) {
        if (mat[r].size() != static_cast<std::size_t>(w.cols()))
          throw parse_error(path.string() + ": ragged weight matrix");
        for (std::size_t c = 0; c < mat[r].size(); ++c) w(r, c) = mat[r][c];
      }
      weights.push_back(std::move(w));
    }
    for (const json& vec : j.at("biases")) {
      const auto v = vec.get<std::vector<double>>();
      biases.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
    }
    return TrainedModel::from_weights(std::move(spec), std::move(weights),
                                      std::move(biases),
                                      j.at("train_seed").get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw parse_error(path.string() + ": " + e.what());
  }
}

void write_boundary_csv(const std::filesystem::path& path,
                        const BoundarySampleSet& set, const SearchConfig& config) {
  std::ofstream out = open_out(path);
  json meta;
  meta["epsilon"] = config.epsilon;
  meta["max_steps"] = config.max_steps;
  meta["gamma"] = config.gamma;
  meta["pool_seed"] = config.pool_seed;
  meta["pool_mode"] = config.pool_mode == SearchConfig::PoolMode::full_class
                          ? "full_class"
                          : "subsample";
  meta["subsample_k"] = config.subsample_k;
  meta["n_requested"] = set.n_requested;
  meta["n_failed"] = set.n_failed;
  out << "# " << meta.dump() << "\n";
  for (const BoundarySample& b : set.samples) {
    for (Eigen::Index d = 0; d < b.point.size(); ++d)
      out << format_double(b.point(d)) << ',';
    out << format_double(b.prediction) << ',' << b.steps_taken << ','
        << (b.converged ? 1 : 0) << "\n";
  }
  if (!out) throw io_error("write failed for " + path.string());
}

BoundarySampleSet read_boundary_csv(const std::filesystem::path& path,
                                    SearchConfig* config_out) {
  std::ifstream in = open_in(path);
  const json meta = read_header(in, path);

  BoundarySampleSet set;
  SearchConfig config;
  try {
    config.epsilon = meta.at("epsilon").get<double>();
    config.max_steps = meta.at("max_steps").get<int>();
    config.gamma = meta.at("gamma").get<double>();
    config.pool_seed = meta.at("pool_seed").get<std::uint64_t>();
    config.pool_mode = meta.at("pool_mode").get<std::string>() == "subsample"
                           ? SearchConfig::PoolMode::subsample
                           : SearchConfig::PoolMode::full_class;
    config.subsample_k = meta.at("subsample_k").get<int>();
    set.n_requested = meta.at("n_requested").get<int>();
    set.n_failed = meta.at("n_failed").get<int>();
  } catch (const json::exception& e) {
    throw parse_error(path.string() + ": bad metadata header: " + e.what(), 1);
  }

  std::string line;
  int line_no = 1;
  std::size_t n_fields = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() < 4)
      throw parse_error(path.string() + ": boundary row needs point, prediction, steps, converged",
                        line_no);
    if (n_fields == 0)
      n_fields = fields.size();
    else if (fields.size() != n_fields)
      throw parse_error(path.string() + ": inconsistent column count", line_no);

    BoundarySample b;
    const std::size_t dim = fields.size() - 3;
    b.point.resize(dim);
    for (std::size_t d = 0; d < dim; ++d)
      b.point(static_cast<Eigen::Index>(d)) = parse_field_double(fields[d], line_no);
    b.prediction = parse_field_double(fields[dim], line_no);
    b.steps_taken = static_cast<int>(parse_field_int(fields[dim + 1], line_no));
    const long flag = parse_field_int(fields[dim + 2], line_no);
    if (flag != 0 && flag != 1)
      throw parse_error(path.string() + ": converged flag must be 0 or 1", line_no);
    b.converged = flag == 1;
    set.samples.push_back(std::move(b));
  }
  if (config_out) *config_out = config;
  return set;
}

void write_attribution_csv(const std::filesystem::path& path, const Attribution& a) {
  std::ofstream out = open_out(path);
  out << "feature,delta,cumulated_gradient,value\n";
  for (Eigen::Index i = 0; i < a.values.size(); ++i)
    out << i << ',' << format_double(a.delta(i)) << ','
        << format_double(a.cumulated_gradients(i)) << ','
        << format_double(a.values(i)) << "\n";
  if (!out) throw io_error("write failed for " + path.string());
}

void write_brain_layout(const std::filesystem::path& pgm_path,
                        const std::filesystem::path& json_path,
                        const BrainLayout& layout) {
  layout.validate();
  std::ofstream pgm = open_out(pgm_path);
  pgm << "P2\n" << layout.width << " " << layout.height << "\n255\n";
  for (int r = 0; r < layout.height; ++r) {
    for (int c = 0; c < layout.width; ++c) {
      pgm << (layout.mask[r * layout.width + c] ? 255 : 0);
      pgm << (c + 1 < layout.width ? ' ' : '\n');
    }
  }
  if (!pgm) throw io_error("write failed for " + pgm_path.string());

  std::ofstream meta = open_out(json_path);
  json j;
  j["height"] = layout.height;
  j["width"] = layout.width;
  j["smoothing_sigma"] = layout.smoothing_sigma;
  j["masked_pixel_count"] = layout.masked_pixel_count();
  j["informative_pixels"] = layout.informative_pixels;
  meta << j.dump(2) << "\n";
  if (!meta) throw io_error("write failed for " + json_path.string());
}

BrainLayout read_brain_layout(const std::filesystem::path& pgm_path,
                              const std::filesystem::path& json_path) {
  std::ifstream meta_in = open_in(json_path);
  json j;
  try {
    j = json::parse(meta_in);
  } catch (const json::exception& e) {
    throw parse_error(json_path.string() + ": " + e.what());
  }

  BrainLayout layout;
  try {
    layout.height = j.at("height").get<int>();
    layout.width = j.at("width").get<int>();
    layout.smoothing_sigma = j.at("smoothing_sigma").get<double>();
    layout.informative_pixels = j.at("informative_pixels").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw parse_error(json_path.string() + ": " + e.what());
  }

  std::ifstream pgm = open_in(pgm_path);
  std::string magic;
  pgm >> magic;
  if (magic != "P2") throw parse_error(pgm_path.string() + ": expected ascii PGM");
  int width = 0, height = 0, maxval = 0;
  pgm >> width >> height >> maxval;
  if (!pgm || width != layout.width || height != layout.height)
    throw parse_error(pgm_path.string() + ": image size does not match sidecar");
  layout.mask.assign(static_cast<std::size_t>(width) * height, 0);
  for (std::size_t i = 0; i < layout.mask.size(); ++i) {
    int v = 0;
    if (!(pgm >> v)) throw parse_error(pgm_path.string() + ": truncated pixel data");
    layout.mask[i] = v > 0 ? 1 : 0;
  }
  layout.validate();
  return layout;
}

}  // namespace ibs
