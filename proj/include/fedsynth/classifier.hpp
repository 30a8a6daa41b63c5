#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "fedsynth/dataset.hpp"
#include "fedsynth/matrix.hpp"

namespace fedsynth {

/// Multinomial logistic regression: K x (d+1) weights, bias in the last
/// column.
struct ClassifierWeights {
  Matrix w;

  int num_classes() const noexcept { return static_cast<int>(w.rows()); }
  std::size_t dim() const noexcept { return w.cols() == 0 ? 0 : w.cols() - 1; }
  int predict(std::span<const double> x) const;
};

struct TrainOptions {
  int epochs = 50;
  double learning_rate = 0.05;
  std::size_t batch_size = 128;
  std::uint64_t seed = 42;
};

/// Mean cross-entropy over the dataset.
double softmax_loss(const ClassifierWeights& weights, const Dataset& data);
/// Gradient of softmax_loss, same shape as the weights.
Matrix softmax_gradient(const ClassifierWeights& weights, const Dataset& data);

/// Mini-batch gradient descent from zero weights; batch order per epoch comes
/// from the EVAL_SHUFFLE stream keyed by (seed, epoch). Throws ConfigError if
/// fewer than two classes occur in the labels.
ClassifierWeights train_softmax(const Dataset& train, const TrainOptions& options);
ClassifierWeights train_softmax(const SyntheticDataset& train, const TrainOptions& options);

/// Fraction of rows whose argmax prediction equals the label.
double evaluate_accuracy(const ClassifierWeights& weights, const Dataset& test);

/// acc_synth / acc_real; ConfigError when acc_real <= 0.
double utility_ratio(double acc_synth, double acc_real);

}  // namespace fedsynth
