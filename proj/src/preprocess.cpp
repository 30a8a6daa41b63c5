#include "fedsynth/preprocess.hpp"

#include <cmath>
#include <string>

#include "fedsynth/error.hpp"

namespace fedsynth {

ColumnStats zscore_fit(const Matrix& features) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (n == 0 || d == 0) throw ContractError("zscore_fit: empty matrix");
  ColumnStats stats{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = features.row(i);
    for (std::size_t j = 0; j < d; ++j) stats.means[j] += row[j];
  }
  for (auto& m : stats.means) m /= static_cast<double>(n);
  // Two-pass variance.
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = features.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = row[j] - stats.means[j];
      stats.stds[j] += dev * dev;
    }
  }
  for (auto& s : stats.stds) s = std::sqrt(s / static_cast<double>(n));
  return stats;
}

Matrix zscore_apply(const Matrix& features, const ColumnStats& stats) {
  const std::size_t d = features.cols();
  if (stats.means.size() != d || stats.stds.size() != d) {
    throw ContractError("zscore_apply: stats have " + std::to_string(stats.means.size()) +
                        " columns, matrix has " + std::to_string(d));
  }
  Matrix out(features.rows(), d);
  std::vector<double> inv(d);
  for (std::size_t j = 0; j < d; ++j) inv[j] = 1.0 / std::max(stats.stds[j], kSigmaFloor);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto src = features.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      // Constant columns (σ below the floor) are exactly zero after centering
      // up to rounding; force it so the result does not depend on 1/floor.
      dst[j] = stats.stds[j] > kSigmaFloor ? (src[j] - stats.means[j]) * inv[j] : 0.0;
    }
  }
  return out;
}

void clip_l2_inplace(std::span<double> x, double c) {
  if (!(c > 0)) throw ContractError("clip_l2: threshold must be positive");
  double sq = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw ContractError("clip_l2: non-finite input");
    sq += v * v;
  }
  const double norm = std::sqrt(sq);
  const double scale = std::max(1.0, norm / c);
  if (scale > 1.0) {
    for (auto& v : x) v /= scale;
  }
}

std::vector<double> clip_l2(std::span<const double> x, double c) {
  std::vector<double> out(x.begin(), x.end());
  clip_l2_inplace(out, c);
  return out;
}

void clip_rows_serial(Matrix& features, double c) {
  for (std::size_t i = 0; i < features.rows(); ++i) clip_l2_inplace(features.row(i), c);
}

void clip_rows(Matrix& features, double c) {
  if (!(c > 0)) throw ContractError("clip_l2: threshold must be positive");
  const auto n = static_cast<std::ptrdiff_t>(features.rows());
  bool bad = false;
#pragma omp parallel for schedule(static) reduction(|| : bad)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      clip_l2_inplace(features.row(static_cast<std::size_t>(i)), c);
    } catch (const ContractError&) {
      bad = true;
    }
  }
  if (bad) throw ContractError("clip_l2: non-finite input");
}

Dataset preprocess_client(const Dataset& shard, double c) {
  if (shard.size() == 0) throw ContractError("preprocess_client: empty shard");
  return preprocess_with(shard, zscore_fit(shard.features), c);
}

Dataset preprocess_with(const Dataset& data, const ColumnStats& stats, double c) {
  Dataset out;
  out.features = zscore_apply(data.features, stats);
  clip_rows(out.features, c);
  out.labels = data.labels;
  out.num_classes = data.num_classes;
  return out;
}

}  // namespace fedsynth
