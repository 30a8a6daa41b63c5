#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace fedsynth {

/// Purpose of a random stream. Each role gets its own counter space so that
/// e.g. local and correlated noise for the same (client, slot) never overlap.
enum class StreamRole : std::uint8_t {
  kFeatureLocal = 0,
  kLabelLocal = 1,
  kFeatureCorr = 2,
  kLabelCorr = 3,
  kPartition = 4,
  kMixSelect = 5,
  kEvalShuffle = 6,
  kBlobs = 7,
};

/// Client id used for streams that belong to the server / dealer.
inline constexpr std::uint32_t kServerClient = 0xFFFFFFu;
inline constexpr std::uint32_t kMaxClients = 0xFFFFFFu;

struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint32_t client_id = 0;  // 24 bits; kServerClient for server streams
  std::uint64_t index = 0;      // sample slot t (or epoch, ...)
  StreamRole role = StreamRole::kFeatureLocal;
};

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based random stream. The key maps injectively onto the Philox key
/// and the upper three counter words, so distinct keys never share a block;
/// the low counter word enumerates blocks within the stream.
///
/// Satisfies UniformRandomBitGenerator, so standard and Boost distributions
/// can draw from it.
///
/// Not thread-safe; derive one stream per (client, slot, role) instead.
class Stream {
 public:
  using result_type = std::uint64_t;
  /// Counter blocks generated per refill.
  static constexpr int kLanes = 8;
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  explicit Stream(const StreamKey& key) noexcept;

  result_type operator()() noexcept { return next_u64(); }
  std::uint64_t next_u64() noexcept {
    if (used_ > static_cast<int>(block_.size()) - 2) refill();
    const std::uint64_t v = (static_cast<std::uint64_t>(block_[used_]) << 32) | block_[used_ + 1];
    used_ += 2;
    return v;
  }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_pos() noexcept { return 1.0 - uniform(); }
  /// Uniform integer in [0, n); n > 0.
  std::uint64_t uniform_index(std::uint64_t n) noexcept;
  /// Standard normal (ziggurat).
  double gaussian() noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4 * kLanes> block_{};
  int used_ = 4 * kLanes;  // 32-bit words consumed from block_
};

}  // namespace fedsynth
