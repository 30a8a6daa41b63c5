#pragma once

#include <cstddef>
#include <cstdint>

#include "fedsynth/dataset.hpp"

namespace fedsynth {

struct BlobParams {
  int num_classes = 10;
  std::size_t per_class = 500;
  std::size_t dim = 20;
  double cluster_spread = 0.5;  // per-coordinate std around each center
  double center_scale = 5.0;    // centers uniform in [-scale, scale]^dim
  std::uint64_t seed = 42;
};

/// K isotropic Gaussian clusters, rows ordered class-major. Pure function of
/// its arguments.
Dataset make_blobs(const BlobParams& params);

/// Same cluster centers as make_blobs(params) but fresh samples drawn from
/// an independent stream: a held-out test split for the same distribution.
Dataset make_blobs_split(const BlobParams& params, std::size_t per_class, std::uint32_t split_id);

}  // namespace fedsynth
