#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedsynth/matrix.hpp"
#include "fedsynth/rng.hpp"

namespace fedsynth {

/// dim i.i.d. N(0, tau²) entries from the stream `key`. tau = 0 gives zeros
/// without touching the stream.
std::vector<double> draw_gaussian(const StreamKey& key, std::size_t dim, double tau);

/// out += N(0, tau² I) drawn from `key`; same values as draw_gaussian.
void add_gaussian(const StreamKey& key, std::span<double> out, double tau);

/// S vectors e_s with Σ_s e_s = 0 and every coordinate marginally
/// N(0, tau_e²): z_s ~ N(0, tau_e²·S/(S-1)) drawn from (seed, client s, t,
/// role), then centered. S = 1 requires tau_e = 0.
std::vector<std::vector<double>> draw_zero_sum(std::uint64_t master_seed, std::uint64_t t,
                                               StreamRole role, int S, std::size_t dim,
                                               double tau_e);

/// Correlated noise for one client over slots [t_begin, t_begin + count):
/// row i holds e_s for slot t_begin + i.
struct CorrelatedSlices {
  std::uint64_t t_begin = 0;
  std::size_t count = 0;
  Matrix features;  // count x d_x
  Matrix labels;    // count x K

  bool covers(std::uint64_t t) const noexcept { return t >= t_begin && t - t_begin < count; }
};

/// Trusted dealer for a block of slots: one CorrelatedSlices per client,
/// features from FEATURE_CORR streams and labels from LABEL_CORR streams.
std::vector<CorrelatedSlices> deal_block(std::uint64_t master_seed, std::uint64_t t_begin,
                                         std::size_t count, int S, std::size_t dim_x, int K,
                                         double tau_e);
/// Reference implementation without the parallel slot loop.
std::vector<CorrelatedSlices> deal_block_serial(std::uint64_t master_seed, std::uint64_t t_begin,
                                                std::size_t count, int S, std::size_t dim_x,
                                                int K, double tau_e);

}  // namespace fedsynth
