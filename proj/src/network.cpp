#include "ibs/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ibs/error.hpp"
#include "ibs/rng.hpp"

namespace ibs {

namespace {

constexpr std::uint64_t kInitStream = 101;
constexpr std::uint64_t kShuffleStream = 102;
constexpr std::uint64_t kSplitStream = 103;

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Per-sample binary cross entropy from the logit; stable for large |z|.
double bce_from_logit(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

void check_input_dim(const NetworkSpec& spec, Eigen::Index rows) {
  if (rows != spec.input_dim())
    throw shape_error("input has dimension " + std::to_string(rows) +
                      ", model expects " + std::to_string(spec.input_dim()));
}

// Forward pass over a column batch keeping pre-activations for backprop.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;   // pre[l]: sizes[l+1] x batch
  std::vector<Eigen::MatrixXd> post;  // post[l]: activation inputs to layer l
};

void forward_batch(const TrainedModel& m, const Eigen::MatrixXd& X,
                   ForwardCache& cache, bool keep_post) {
  const int L = m.spec.n_affine_layers();
  cache.pre.resize(L);
  if (keep_post) cache.post.resize(L);
  Eigen::MatrixXd a = X;
  for (int l = 0; l < L; ++l) {
    if (keep_post) cache.post[l] = a;
    cache.pre[l] = (m.weights[l] * a).colwise() + m.biases[l];
    if (l + 1 < L) a = cache.pre[l].cwiseMax(0.0);
  }
}

Eigen::VectorXd logits_of(const ForwardCache& cache) {
  return cache.pre.back().row(0).transpose();
}

// Backprop of d(output)/d(input) through the ReLU stack. `seed` is the
// derivative of the target (sigmoid' for probability, 1 for logit) per
// column.
Eigen::MatrixXd input_gradient_from_cache(const TrainedModel& m,
                                          const ForwardCache& cache,
                                          const Eigen::VectorXd& seed) {
  const int L = m.spec.n_affine_layers();
  Eigen::MatrixXd delta = seed.transpose();  // 1 x batch
  for (int l = L - 1; l >= 1; --l) {
    Eigen::MatrixXd g = m.weights[l].transpose() * delta;
    delta = g.cwiseProduct(
        (cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return m.weights[0].transpose() * delta;
}

double mean_bce(const Eigen::VectorXd& logits, const Eigen::VectorXd& y) {
  double s = 0.0;
  for (int i = 0; i < logits.size(); ++i) s += bce_from_logit(logits(i), y(i));
  return s / static_cast<double>(logits.size());
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

NetworkSpec NetworkSpec::mlp(int input_dim, std::vector<int> hidden) {
  NetworkSpec spec;
  spec.layer_sizes.push_back(input_dim);
  spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
  spec.layer_sizes.push_back(1);
  spec.validate();
  return spec;
}

void NetworkSpec::validate() const {
  if (layer_sizes.size() < 2)
    throw config_error("layer_sizes needs at least input and output entries");
  for (int s : layer_sizes)
    if (s < 1) throw config_error("all layer sizes must be >= 1");
  if (layer_sizes.back() != 1)
    throw config_error("output layer size must be exactly 1");
}

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw config_error("learning_rate must be positive");
  if (epochs < 0) throw config_error("epochs must be non-negative");
  if (batch_size < 1) throw config_error("batch_size must be positive");
  if (weight_decay < 0.0) throw config_error("weight_decay must be non-negative");
  if (!(split_fraction > 0.0 && split_fraction < 1.0))
    throw config_error("split_fraction must lie in (0, 1)");
}

TrainedModel TrainedModel::from_weights(NetworkSpec spec,
                                        std::vector<Eigen::MatrixXd> weights,
                                        std::vector<Eigen::VectorXd> biases,
                                        std::uint64_t train_seed) {
  spec.validate();
  const int L = spec.n_affine_layers();
  if (static_cast<int>(weights.size()) != L ||
      static_cast<int>(biases.size()) != L)
    throw shape_error("layer count does not match spec");
  for (int l = 0; l < L; ++l) {
    if (weights[l].rows() != spec.layer_sizes[l + 1] ||
        weights[l].cols() != spec.layer_sizes[l])
      throw shape_error("weight matrix shape mismatch at layer " + std::to_string(l));
    if (biases[l].size() != spec.layer_sizes[l + 1])
      throw shape_error("bias shape mismatch at layer " + std::to_string(l));
  }
  TrainedModel m;
  m.spec = std::move(spec);
  m.weights = std::move(weights);
  m.biases = std::move(biases);
  m.train_seed = train_seed;
  return m;
}

double TrainedModel::predict_logit(const Eigen::VectorXd& x) const {
  check_input_dim(spec, x.size());
  const int L = spec.n_affine_layers();
  Eigen::VectorXd a = x;
  for (int l = 0; l < L; ++l) {
    Eigen::VectorXd z = weights[l] * a + biases[l];
    a = (l + 1 < L) ? z.cwiseMax(0.0).eval() : std::move(z);
  }
  return a(0);
}

double TrainedModel::predict_proba(const Eigen::VectorXd& x) const {
  return sigmoid(predict_logit(x));
}

Eigen::VectorXd TrainedModel::input_gradient(const Eigen::VectorXd& x) const {
  check_input_dim(spec, x.size());
  ForwardCache cache;
  forward_batch(*this, x, cache, false);
  const double z = cache.pre.back()(0, 0);
  const double s = sigmoid(z);
  Eigen::VectorXd seed(1);
  seed(0) = s * (1.0 - s);
  return input_gradient_from_cache(*this, cache, seed).col(0);
}

Eigen::VectorXd TrainedModel::input_gradient_logit(const Eigen::VectorXd& x) const {
  check_input_dim(spec, x.size());
  ForwardCache cache;
  forward_batch(*this, x, cache, false);
  Eigen::VectorXd seed = Eigen::VectorXd::Ones(1);
  return input_gradient_from_cache(*this, cache, seed).col(0);
}

Eigen::VectorXd TrainedModel::predict_logit_batch(const Eigen::MatrixXd& X) const {
  check_input_dim(spec, X.rows());
  ForwardCache cache;
  forward_batch(*this, X, cache, false);
  return logits_of(cache);
}

Eigen::VectorXd TrainedModel::predict_proba_batch(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd z = predict_logit_batch(X);
  for (int i = 0; i < z.size(); ++i) z(i) = sigmoid(z(i));
  return z;
}

Eigen::MatrixXd TrainedModel::input_gradient_batch(const Eigen::MatrixXd& X,
                                                   bool logit_target) const {
  check_input_dim(spec, X.rows());
  ForwardCache cache;
  forward_batch(*this, X, cache, false);
  Eigen::VectorXd seed(X.cols());
  if (logit_target) {
    seed.setOnes();
  } else {
    const Eigen::VectorXd z = logits_of(cache);
    for (int i = 0; i < seed.size(); ++i) {
      const double s = sigmoid(z(i));
      seed(i) = s * (1.0 - s);
    }
  }
  return input_gradient_from_cache(*this, cache, seed);
}

Split train_test_split(int n, double fraction, std::uint64_t seed) {
  if (n < 2) throw config_error("need at least two samples to split");
  if (!(fraction > 0.0 && fraction < 1.0))
    throw config_error("split fraction must lie in (0, 1)");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, kSplitStream));
  std::shuffle(order.begin(), order.end(), rng);
  int n_train = static_cast<int>(std::llround(fraction * n));
  n_train = std::clamp(n_train, 1, n - 1);
  Split split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.test.assign(order.begin() + n_train, order.end());
  return split;
}

TrainResult train(const NetworkSpec& spec, const Dataset& dataset,
                  const TrainConfig& config) {
  spec.validate();
  config.validate();
  dataset.validate();
  check_input_dim(spec, dataset.n_features());

  TrainedModel model;
  model.spec = spec;
  model.train_seed = config.seed;

  // He-style uniform fan-in initialization, zero biases.
  const int L = spec.n_affine_layers();
  std::mt19937_64 init_rng(derive_seed(config.seed, kInitStream));
  for (int l = 0; l < L; ++l) {
    const int rows = spec.layer_sizes[l + 1];
    const int cols = spec.layer_sizes[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) w(r, c) = dist(init_rng);
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(rows));
  }

  const Split split =
      train_test_split(dataset.n_samples(), config.split_fraction, config.seed);
  const int n_train = static_cast<int>(split.train.size());

  Eigen::MatrixXd x_train(dataset.n_features(), n_train);
  Eigen::VectorXd y_train(n_train);
  for (int i = 0; i < n_train; ++i) {
    x_train.col(i) = dataset.features.row(split.train[i]).transpose();
    y_train(i) = static_cast<double>(dataset.labels(split.train[i]));
  }

  TrainMetrics metrics;
  metrics.initial_loss = mean_bce(model.predict_logit_batch(x_train), y_train);

  // Adam state.
  std::vector<Eigen::MatrixXd> mw(L), vw(L);
  std::vector<Eigen::VectorXd> mb(L), vb(L);
  for (int l = 0; l < L; ++l) {
    mw[l] = Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
    vw[l] = mw[l];
    mb[l] = Eigen::VectorXd::Zero(model.biases[l].size());
    vb[l] = mb[l];
  }

  std::mt19937_64 shuffle_rng(derive_seed(config.seed, kShuffleStream));
  std::vector<int> order(n_train);
  std::iota(order.begin(), order.end(), 0);

  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (int begin = 0; begin < n_train; begin += config.batch_size) {
      const int b = std::min(config.batch_size, n_train - begin);
      Eigen::MatrixXd xb(dataset.n_features(), b);
      Eigen::VectorXd yb(b);
      for (int i = 0; i < b; ++i) {
        xb.col(i) = x_train.col(order[begin + i]);
        yb(i) = y_train(order[begin + i]);
      }

      ForwardCache cache;
      forward_batch(model, xb, cache, true);

      // Output delta of mean BCE w.r.t. the logit row.
      Eigen::MatrixXd delta(1, b);
      for (int i = 0; i < b; ++i)
        delta(0, i) = (sigmoid(cache.pre.back()(0, i)) - yb(i)) / b;

      ++step;
      const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));

      for (int l = L - 1; l >= 0; --l) {
        Eigen::MatrixXd gw = delta * cache.post[l].transpose();
        if (config.weight_decay > 0.0) gw += config.weight_decay * model.weights[l];
        Eigen::VectorXd gb = delta.rowwise().sum();

        if (l > 0) {
          Eigen::MatrixXd g = model.weights[l].transpose() * delta;
          delta = g.cwiseProduct(
              (cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
        }

        mw[l] = kAdamBeta1 * mw[l] + (1.0 - kAdamBeta1) * gw;
        vw[l] = kAdamBeta2 * vw[l] + (1.0 - kAdamBeta2) * gw.cwiseProduct(gw);
        mb[l] = kAdamBeta1 * mb[l] + (1.0 - kAdamBeta1) * gb;
        vb[l] = kAdamBeta2 * vb[l] + (1.0 - kAdamBeta2) * gb.cwiseProduct(gb);

        model.weights[l] -=
            (config.learning_rate / bc1) *
            (mw[l].array() / ((vw[l].array() / bc2).sqrt() + kAdamEps)).matrix();
        model.biases[l] -=
            (config.learning_rate / bc1) *
            (mb[l].array() / ((vb[l].array() / bc2).sqrt() + kAdamEps)).matrix();
      }
    }
  }

  metrics.final_loss = mean_bce(model.predict_logit_batch(x_train), y_train);

  // Held-out metrics.
  const int n_test = static_cast<int>(split.test.size());
  Eigen::MatrixXd x_test(dataset.n_features(), n_test);
  for (int i = 0; i < n_test; ++i)
    x_test.col(i) = dataset.features.row(split.test[i]).transpose();
  const Eigen::VectorXd p = model.predict_proba_batch(x_test);

  int correct = 0, tp = 0, fp = 0, fn = 0;
  for (int i = 0; i < n_test; ++i) {
    const int pred = p(i) > 0.5 ? 1 : 0;
    const int truth = dataset.labels(split.test[i]);
    if (pred == truth) ++correct;
    if (pred == 1 && truth == 1) ++tp;
    if (pred == 1 && truth == 0) ++fp;
    if (pred == 0 && truth == 1) ++fn;
  }
  metrics.accuracy = static_cast<double>(correct) / std::max(n_test, 1);
  metrics.f1 = (2 * tp + fp + fn) > 0
                   ? 2.0 * tp / static_cast<double>(2 * tp + fp + fn)
                   : 0.0;

  return TrainResult{std::move(model), metrics};
}

}  // namespace ibs
