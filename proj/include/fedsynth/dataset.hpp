#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fedsynth/matrix.hpp"

namespace fedsynth {

/// Labelled feature matrix: N rows of d_x features, labels in {0..K-1}.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }

  /// Throws ContractError unless row count, label range and d_x >= 1 hold.
  void validate() const;

  /// Row counts per class.
  std::vector<std::size_t> class_counts() const;

  Dataset select(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SyntheticRecord {
  std::vector<double> features;
  std::vector<double> soft_label;

  friend bool operator==(const SyntheticRecord&, const SyntheticRecord&) = default;
};

struct SyntheticDataset {
  std::size_t dim = 0;
  int num_classes = 0;
  std::vector<SyntheticRecord> records;
  std::optional<std::vector<int>> decoded_labels;

  std::size_t size() const noexcept { return records.size(); }
  void validate() const;

  /// Features as a matrix paired with decoded labels, for training.
  Dataset as_dataset() const;

  friend bool operator==(const SyntheticDataset&, const SyntheticDataset&) = default;
};

}  // namespace fedsynth
