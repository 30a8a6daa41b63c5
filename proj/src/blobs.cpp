#include "fedsynth/blobs.hpp"

#include <vector>

#include "fedsynth/error.hpp"
#include "fedsynth/rng.hpp"

namespace fedsynth {

namespace {

void validate(const BlobParams& p) {
  if (p.num_classes < 1 || p.per_class < 1 || p.dim < 1 || !(p.cluster_spread >= 0) ||
      !(p.center_scale > 0)) {
    throw ConfigError("make_blobs: K, per_class, d_x and center_scale must be positive, spread >= 0");
  }
}

std::vector<double> centers(const BlobParams& p) {
  Stream s({p.seed, kServerClient, 0, StreamRole::kBlobs});
  std::vector<double> c(static_cast<std::size_t>(p.num_classes) * p.dim);
  for (auto& v : c) v = p.center_scale * (2.0 * s.uniform() - 1.0);
  return c;
}

Dataset sample(const BlobParams& p, const std::vector<double>& c, std::size_t per_class,
               std::uint32_t stream_client) {
  const auto k = static_cast<std::size_t>(p.num_classes);
  Dataset ds;
  ds.num_classes = p.num_classes;
  ds.features = Matrix(k * per_class, p.dim);
  ds.labels.resize(k * per_class);
  for (std::size_t cls = 0; cls < k; ++cls) {
    Stream s({p.seed, stream_client, cls + 1, StreamRole::kBlobs});
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t r = cls * per_class + i;
      auto row = ds.features.row(r);
      for (std::size_t j = 0; j < p.dim; ++j) {
        row[j] = c[cls * p.dim + j] + p.cluster_spread * s.gaussian();
      }
      ds.labels[r] = static_cast<int>(cls);
    }
  }
  return ds;
}

}  // namespace

Dataset make_blobs(const BlobParams& params) {
  validate(params);
  return sample(params, centers(params), params.per_class, 0);
}

Dataset make_blobs_split(const BlobParams& params, std::size_t per_class, std::uint32_t split_id) {
  validate(params);
  if (per_class < 1) throw ConfigError("make_blobs: per_class must be positive");
  return sample(params, centers(params), per_class, split_id + 1);
}

}  // namespace fedsynth
