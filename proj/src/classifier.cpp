#include "fedsynth/classifier.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "fedsynth/error.hpp"
#include "fedsynth/rng.hpp"

namespace fedsynth {

namespace {

// Class probabilities for one row, written into p (size K).
void probabilities(const Matrix& w, std::span<const double> x, std::span<double> p) {
  const std::size_t K = w.rows();
  const std::size_t d = x.size();
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    const auto wk = w.row(k);
    double z = wk[d];
    for (std::size_t j = 0; j < d; ++j) z += wk[j] * x[j];
    p[k] = z;
    top = std::max(top, z);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    p[k] = std::exp(p[k] - top);
    sum += p[k];
  }
  for (std::size_t k = 0; k < K; ++k) p[k] /= sum;
}

// grad += d(-log p_y)/dw for one row.
void accumulate_gradient(const Matrix& w, std::span<const double> x, int y, std::span<double> p,
                         Matrix& grad) {
  probabilities(w, x, p);
  const std::size_t d = x.size();
  for (std::size_t k = 0; k < w.rows(); ++k) {
    const double g = p[k] - (static_cast<int>(k) == y ? 1.0 : 0.0);
    auto gk = grad.row(k);
    for (std::size_t j = 0; j < d; ++j) gk[j] += g * x[j];
    gk[d] += g;
  }
}

void check_dims(const ClassifierWeights& weights, const Dataset& data) {
  if (weights.dim() != data.dim()) {
    throw ConfigError("classifier expects " + std::to_string(weights.dim()) + " features, data has " +
                      std::to_string(data.dim()));
  }
  for (int y : data.labels) {
    if (y < 0 || y >= weights.num_classes()) {
      throw ConfigError("label " + std::to_string(y) + " outside the classifier's " +
                        std::to_string(weights.num_classes()) + " classes");
    }
  }
}

}  // namespace

int ClassifierWeights::predict(std::span<const double> x) const {
  const std::size_t d = x.size();
  int best = 0;
  double best_z = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < w.rows(); ++k) {
    const auto wk = w.row(k);
    double z = wk[d];
    for (std::size_t j = 0; j < d; ++j) z += wk[j] * x[j];
    if (z > best_z) {
      best_z = z;
      best = static_cast<int>(k);
    }
  }
  return best;
}

double softmax_loss(const ClassifierWeights& weights, const Dataset& data) {
  check_dims(weights, data);
  if (data.size() == 0) return 0.0;
  std::vector<double> p(static_cast<std::size_t>(weights.num_classes()));
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    probabilities(weights.w, data.features.row(i), p);
    loss -= std::log(std::max(p[static_cast<std::size_t>(data.labels[i])], 1e-300));
  }
  return loss / static_cast<double>(data.size());
}

Matrix softmax_gradient(const ClassifierWeights& weights, const Dataset& data) {
  check_dims(weights, data);
  Matrix grad(weights.w.rows(), weights.w.cols());
  if (data.size() == 0) return grad;
  std::vector<double> p(static_cast<std::size_t>(weights.num_classes()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    accumulate_gradient(weights.w, data.features.row(i), data.labels[i], p, grad);
  }
  const double inv = 1.0 / static_cast<double>(data.size());
  for (double& v : grad.values()) v *= inv;
  return grad;
}

ClassifierWeights train_softmax(const Dataset& train, const TrainOptions& options) {
  train.validate();
  if (options.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(options.learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (options.batch_size == 0) throw ConfigError("batch size must be >= 1");
  const auto counts = train.class_counts();
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2) {
    throw ConfigError("degenerate training set: fewer than two classes present");
  }

  const auto K = static_cast<std::size_t>(train.num_classes);
  const std::size_t d = train.dim();
  ClassifierWeights weights{Matrix(K, d + 1)};
  Matrix grad(K, d + 1);
  std::vector<double> p(K);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    Stream stream(StreamKey{options.seed, kServerClient, static_cast<std::uint64_t>(epoch),
                            StreamRole::kEvalShuffle});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(stream.uniform_index(i))]);
    }
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      std::fill(grad.values().begin(), grad.values().end(), 0.0);
      for (std::size_t i = begin; i < end; ++i) {
        accumulate_gradient(weights.w, train.features.row(order[i]), train.labels[order[i]], p, grad);
      }
      const double step = options.learning_rate / static_cast<double>(end - begin);
      auto& w = weights.w.values();
      const auto& g = grad.values();
      for (std::size_t j = 0; j < w.size(); ++j) w[j] -= step * g[j];
    }
  }
  return weights;
}

ClassifierWeights train_softmax(const SyntheticDataset& train, const TrainOptions& options) {
  return train_softmax(train.as_dataset(), options);
}

double evaluate_accuracy(const ClassifierWeights& weights, const Dataset& test) {
  check_dims(weights, test);
  if (test.size() == 0) throw ConfigError("empty test set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (weights.predict(test.features.row(i)) == test.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

double utility_ratio(double acc_synth, double acc_real) {
  if (!(acc_real > 0)) throw ConfigError("utility ratio undefined: real-data accuracy is 0");
  return acc_synth / acc_real;
}

}  // namespace fedsynth
