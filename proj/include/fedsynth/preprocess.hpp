#pragma once

#include <span>
#include <vector>

#include "fedsynth/dataset.hpp"
#include "fedsynth/matrix.hpp"

namespace fedsynth {

/// Constant columns are divided by this floor instead of zero.
inline constexpr double kSigmaFloor = 1e-12;

struct ColumnStats {
  std::vector<double> means;
  std::vector<double> stds;  // population std (divide by N)
};

ColumnStats zscore_fit(const Matrix& features);
Matrix zscore_apply(const Matrix& features, const ColumnStats& stats);

/// x / max(1, ||x||_2 / c).
std::vector<double> clip_l2(std::span<const double> x, double c);
void clip_l2_inplace(std::span<double> x, double c);

/// Row-wise clip of a whole matrix. The serial version is the reference for
/// the OpenMP one; both produce identical bits.
void clip_rows(Matrix& features, double c);
void clip_rows_serial(Matrix& features, double c);

/// Local preprocessing of one client shard: z-score with the shard's own
/// statistics, then clip every row to norm c. Labels pass through.
Dataset preprocess_client(const Dataset& shard, double c);

/// Applies train-set statistics to another split (e.g. real test data) and
/// clips, so evaluation data lives in the same space as synthetic data.
Dataset preprocess_with(const Dataset& data, const ColumnStats& stats, double c);

}  // namespace fedsynth
