#include "fedsynth/dataset.hpp"

#include <algorithm>
#include <string>

#include "fedsynth/error.hpp"

namespace fedsynth {

void Dataset::validate() const {
  if (num_classes < 1) throw ContractError("dataset needs at least one class");
  if (features.cols() < 1) throw ContractError("dataset needs d_x >= 1");
  if (features.rows() != labels.size()) {
    throw ContractError("feature rows (" + std::to_string(features.rows()) +
                        ") != label count (" + std::to_string(labels.size()) + ")");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw ContractError("label " + std::to_string(labels[i]) + " at row " +
                          std::to_string(i) + " outside [0," +
                          std::to_string(num_classes) + ")");
    }
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(num_classes, 0)), 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features = features.select_rows(indices);
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(labels[i]);
  out.num_classes = num_classes;
  return out;
}

void SyntheticDataset::validate() const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].features.size() != dim ||
        records[i].soft_label.size() != static_cast<std::size_t>(num_classes)) {
      throw ContractError("synthetic record " + std::to_string(i) +
                          " has inconsistent dimensions");
    }
  }
  if (decoded_labels && decoded_labels->size() != records.size()) {
    throw ContractError("decoded label count differs from record count");
  }
}

Dataset SyntheticDataset::as_dataset() const {
  if (!decoded_labels) throw ContractError("synthetic dataset has no decoded labels");
  Dataset out;
  out.features = Matrix(records.size(), dim);
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::copy(records[i].features.begin(), records[i].features.end(),
              out.features.row(i).begin());
  }
  out.labels = *decoded_labels;
  out.num_classes = num_classes;
  return out;
}

}  // namespace fedsynth
