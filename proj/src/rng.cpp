#include "fedsynth/rng.hpp"

#include <boost/random/normal_distribution.hpp>

#if defined(__GNUC__) && defined(__x86_64__)
#include <immintrin.h>
#endif

namespace fedsynth {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                    std::uint32_t& hi) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

__extension__ typedef unsigned __int128 u128;

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
  std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
  std::uint32_t k0 = key[0], k1 = key[1];
#pragma GCC unroll 10
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, c0, lo0, hi0);
    mulhilo(kPhiloxM1, c2, lo1, hi1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return {c0, c1, c2, c3};
}

namespace {

// kLanes consecutive counter blocks at once; the independent lanes hide the
// multiply latency of the round chain. Same output as kLanes single calls.
using Lanes = std::array<std::uint32_t, 4 * Stream::kLanes>;

#if defined(__GNUC__) && defined(__x86_64__)
// One block per 64-bit half of a vector register. mul_epu32 multiplies the
// low 32 bits of each half, which is exactly the Philox mulhilo; the high
// halves may hold garbage between rounds since only low words are read.
#define FEDSYNTH_PHILOX_SIMD(NAME, TARGET, VEC, SET1, SETCTR, MUL, SRL, XOR, STORE, WIDTH)                   \
  __attribute__((target(TARGET))) void NAME(const std::array<std::uint32_t, 4>& ctr,                        \
                                            const std::array<std::uint32_t, 2>& key, Lanes& out) noexcept { \
    constexpr int r = Stream::kLanes / WIDTH;                                                               \
    VEC c0[r], c1[r], c2[r], c3[r];                                                                         \
    for (int i = 0; i < r; ++i) {                                                                           \
      c0[i] = SETCTR(ctr[0] + static_cast<std::uint32_t>(WIDTH * i));                                       \
      c1[i] = SET1(ctr[1]);                                                                                 \
      c2[i] = SET1(ctr[2]);                                                                                 \
      c3[i] = SET1(ctr[3]);                                                                                 \
    }                                                                                                       \
    const VEC m0 = SET1(kPhiloxM0);                                                                         \
    const VEC m1 = SET1(kPhiloxM1);                                                                         \
    std::uint32_t k0 = key[0], k1 = key[1];                                                                 \
    for (int round = 0; round < 10; ++round) {                                                              \
      const VEC vk0 = SET1(k0);                                                                             \
      const VEC vk1 = SET1(k1);                                                                             \
      for (int i = 0; i < r; ++i) {                                                                         \
        const VEC p0 = MUL(c0[i], m0);                                                                      \
        const VEC p1 = MUL(c2[i], m1);                                                                      \
        c0[i] = XOR(XOR(SRL(p1, 32), c1[i]), vk0);                                                          \
        c1[i] = p1;                                                                                         \
        c2[i] = XOR(XOR(SRL(p0, 32), c3[i]), vk1);                                                          \
        c3[i] = p0;                                                                                         \
      }                                                                                                     \
      k0 += kPhiloxW0;                                                                                      \
      k1 += kPhiloxW1;                                                                                      \
    }                                                                                                       \
    for (int i = 0; i < r; ++i) {                                                                           \
      alignas(64) std::uint64_t w[4][WIDTH];                                                                \
      STORE(w[0], c0[i]);                                                                                   \
      STORE(w[1], c1[i]);                                                                                   \
      STORE(w[2], c2[i]);                                                                                   \
      STORE(w[3], c3[i]);                                                                                   \
      for (int h = 0; h < WIDTH; ++h) {                                                                     \
        for (int k = 0; k < 4; ++k) out[4 * (WIDTH * i + h) + k] = static_cast<std::uint32_t>(w[k][h]);    \
      }                                                                                                     \
    }                                                                                                       \
  }

#define FEDSYNTH_SSE_SET1(x) _mm_set1_epi64x(static_cast<long long>(x))
#define FEDSYNTH_SSE_CTR(c) _mm_set_epi64x(static_cast<std::uint32_t>((c) + 1), static_cast<std::uint32_t>(c))
#define FEDSYNTH_SSE_STORE(p, v) _mm_store_si128(reinterpret_cast<__m128i*>(p), v)
FEDSYNTH_PHILOX_SIMD(philox_lanes_sse2, "sse2", __m128i, FEDSYNTH_SSE_SET1, FEDSYNTH_SSE_CTR, _mm_mul_epu32,
                     _mm_srli_epi64, _mm_xor_si128, FEDSYNTH_SSE_STORE, 2)

#define FEDSYNTH_AVX_SET1(x) _mm256_set1_epi64x(static_cast<long long>(x))
#define FEDSYNTH_AVX_CTR(c)                                                                            \
  _mm256_set_epi64x(static_cast<std::uint32_t>((c) + 3), static_cast<std::uint32_t>((c) + 2),          \
                    static_cast<std::uint32_t>((c) + 1), static_cast<std::uint32_t>(c))
#define FEDSYNTH_AVX_STORE(p, v) _mm256_store_si256(reinterpret_cast<__m256i*>(p), v)
FEDSYNTH_PHILOX_SIMD(philox_lanes_avx2, "avx2", __m256i, FEDSYNTH_AVX_SET1, FEDSYNTH_AVX_CTR, _mm256_mul_epu32,
                     _mm256_srli_epi64, _mm256_xor_si256, FEDSYNTH_AVX_STORE, 4)

using LanesFn = void (*)(const std::array<std::uint32_t, 4>&, const std::array<std::uint32_t, 2>&, Lanes&) noexcept;

LanesFn select_lanes() noexcept {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") ? philox_lanes_avx2 : philox_lanes_sse2;
}
#else
void philox_lanes_scalar(const std::array<std::uint32_t, 4>& ctr, const std::array<std::uint32_t, 2>& key,
                         Lanes& out) noexcept {
  for (int i = 0; i < Stream::kLanes; ++i) {
    const auto block = philox4x32_10({ctr[0] + static_cast<std::uint32_t>(i), ctr[1], ctr[2], ctr[3]}, key);
    for (int w = 0; w < 4; ++w) out[4 * i + w] = block[w];
  }
}

using LanesFn = void (*)(const std::array<std::uint32_t, 4>&, const std::array<std::uint32_t, 2>&, Lanes&) noexcept;
LanesFn select_lanes() noexcept { return philox_lanes_scalar; }
#endif

// kLanes consecutive counter blocks per call; every variant produces the
// same words as kLanes single-block calls.
void philox_lanes(const std::array<std::uint32_t, 4>& ctr, const std::array<std::uint32_t, 2>& key,
                  Lanes& out) noexcept {
  static const LanesFn fn = select_lanes();
  fn(ctr, key, out);
}

}  // namespace

Stream::Stream(const StreamKey& k) noexcept {
  key_ = {static_cast<std::uint32_t>(k.master_seed),
          static_cast<std::uint32_t>(k.master_seed >> 32)};
  counter_ = {0u,
              (k.client_id & 0xFFFFFFu) | (static_cast<std::uint32_t>(k.role) << 24),
              static_cast<std::uint32_t>(k.index),
              static_cast<std::uint32_t>(k.index >> 32)};
}

void Stream::refill() noexcept {
  philox_lanes(counter_, key_, block_);
  counter_[0] += kLanes;
  used_ = 0;
}

std::uint64_t Stream::uniform_index(std::uint64_t n) noexcept {
  // Lemire's multiply-shift with rejection: exact uniformity.
  std::uint64_t x = next_u64();
  u128 m = static_cast<u128>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<u128>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Stream::gaussian() noexcept {
  // Stateless: the ziggurat draws everything it needs on each call.
  boost::random::normal_distribution<double> normal;
  return normal(*this);
}

}  // namespace fedsynth
