#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "fedsynth/error.hpp"
#include "fedsynth/noise.hpp"
#include "fedsynth/parallel.hpp"
#include "fedsynth/rng.hpp"

using namespace fedsynth;

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(Philox, KnownAnswers) {
  using W = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (W{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (W{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (W{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(StreamTest, SameKeySameSequence) {
  const StreamKey key{7, 3, 11, StreamRole::kMixSelect};
  Stream a(key), b(key);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(StreamTest, KeyFieldsSeparateStreams) {
  const StreamKey base{7, 3, 11, StreamRole::kMixSelect};
  std::vector<StreamKey> keys{base};
  keys.push_back({8, 3, 11, StreamRole::kMixSelect});
  keys.push_back({7, 4, 11, StreamRole::kMixSelect});
  keys.push_back({7, 3, 12, StreamRole::kMixSelect});
  keys.push_back({7, 3, 11, StreamRole::kFeatureLocal});
  keys.push_back({7, 3, 11ull << 32, StreamRole::kMixSelect});
  std::vector<std::uint64_t> first;
  for (const auto& k : keys) first.push_back(Stream(k).next_u64());
  for (std::size_t i = 0; i < first.size(); ++i) {
    for (std::size_t j = i + 1; j < first.size(); ++j) EXPECT_NE(first[i], first[j]) << i << "," << j;
  }
}

TEST(StreamTest, UniformRanges) {
  Stream s({1, 0, 0, StreamRole::kPartition});
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = s.uniform_pos();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_LT(s.uniform_index(7), 7u);
  }
}

TEST(StreamTest, UniformIndexIsUnbiased) {
  Stream s({2, 0, 0, StreamRole::kPartition});
  std::vector<int> counts(6, 0);
  const int n = 600000;
  for (int i = 0; i < n; ++i) ++counts[s.uniform_index(6)];
  for (int c : counts) EXPECT_NEAR(c, n / 6.0, 5 * std::sqrt(n / 6.0));
}

TEST(Noise, GaussianVarianceOverMillionDraws) {
  const auto x = draw_gaussian({5, 1, 0, StreamRole::kFeatureLocal}, 1000000, 2.0);
  double m = 0, v = 0;
  for (double e : x) m += e;
  m /= static_cast<double>(x.size());
  for (double e : x) v += (e - m) * (e - m);
  v /= static_cast<double>(x.size());
  EXPECT_NEAR(m, 0.0, 0.01);
  EXPECT_GE(v, 3.97);
  EXPECT_LE(v, 4.03);
}

TEST(Noise, ZeroTauLeavesInputUntouched) {
  std::vector<double> x{1.0, 2.0};
  add_gaussian({1, 0, 0, StreamRole::kFeatureLocal}, x, 0.0);
  EXPECT_EQ(x, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(draw_gaussian({1, 0, 0, StreamRole::kFeatureLocal}, 3, 0.0), std::vector<double>(3, 0.0));
}

TEST(Noise, AddMatchesDraw) {
  const StreamKey key{9, 2, 5, StreamRole::kLabelLocal};
  const auto d = draw_gaussian(key, 17, 0.7);
  std::vector<double> x(17, 1.0);
  add_gaussian(key, x, 0.7);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i], 1.0 + d[i]);
}

TEST(Noise, RolesAreIndependent) {
  const std::size_t n = 200000;
  const auto a = draw_gaussian({3, 1, 4, StreamRole::kFeatureLocal}, n, 1.0);
  const auto b = draw_gaussian({3, 1, 4, StreamRole::kFeatureCorr}, n, 1.0);
  const auto c = draw_gaussian({3, 1, 4, StreamRole::kLabelLocal}, n, 1.0);
  EXPECT_LT(std::abs(correlation(a, b)), 0.01);
  EXPECT_LT(std::abs(correlation(a, c)), 0.01);
  EXPECT_LT(std::abs(correlation(b, c)), 0.01);
}

TEST(ZeroSum, SumsToZero) {
  for (int S : {2, 3, 10, 64}) {
    const auto e = draw_zero_sum(11, 3, StreamRole::kFeatureCorr, S, 50, 1.5);
    ASSERT_EQ(e.size(), static_cast<std::size_t>(S));
    for (std::size_t j = 0; j < 50; ++j) {
      double sum = 0, abs_sum = 0;
      for (const auto& v : e) {
        sum += v[j];
        abs_sum += std::abs(v[j]);
      }
      EXPECT_LE(std::abs(sum), 1e-12 * std::max(1.0, abs_sum)) << "S=" << S;
    }
  }
}

TEST(ZeroSum, MarginalVarianceAndCovariance) {
  const int S = 5;
  const double tau = 2.0;
  const std::size_t dim = 20;
  const int slots = 4000;
  double var0 = 0, cov01 = 0;
  for (int t = 0; t < slots; ++t) {
    const auto e = draw_zero_sum(21, static_cast<std::uint64_t>(t), StreamRole::kLabelCorr, S, dim, tau);
    for (std::size_t j = 0; j < dim; ++j) {
      var0 += e[0][j] * e[0][j];
      cov01 += e[0][j] * e[1][j];
    }
  }
  const double n = static_cast<double>(slots) * dim;
  EXPECT_NEAR(var0 / n, tau * tau, 0.05 * tau * tau);
  EXPECT_NEAR(cov01 / n, -tau * tau / (S - 1), 0.05 * tau * tau);
}

TEST(ZeroSum, SingleClientNeedsZeroNoise) {
  EXPECT_THROW(draw_zero_sum(1, 0, StreamRole::kFeatureCorr, 1, 4, 1.0), ContractError);
  const auto e = draw_zero_sum(1, 0, StreamRole::kFeatureCorr, 1, 4, 0.0);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0], std::vector<double>(4, 0.0));
}

TEST(Dealer, SlicesMatchDirectDraws) {
  const auto slices = deal_block(13, 100, 8, 4, 6, 3, 0.9);
  ASSERT_EQ(slices.size(), 4u);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto f = draw_zero_sum(13, 100 + i, StreamRole::kFeatureCorr, 4, 6, 0.9);
    const auto y = draw_zero_sum(13, 100 + i, StreamRole::kLabelCorr, 4, 3, 0.9);
    for (int s = 0; s < 4; ++s) {
      const auto fr = slices[s].features.row(i);
      const auto yr = slices[s].labels.row(i);
      EXPECT_EQ(std::vector<double>(fr.begin(), fr.end()), f[s]);
      EXPECT_EQ(std::vector<double>(yr.begin(), yr.end()), y[s]);
    }
  }
  EXPECT_TRUE(slices[0].covers(100));
  EXPECT_TRUE(slices[0].covers(107));
  EXPECT_FALSE(slices[0].covers(108));
  EXPECT_FALSE(slices[0].covers(99));
}

TEST(Dealer, ParallelMatchesSerialForAnyThreadCount) {
  const auto ref = deal_block_serial(17, 0, 300, 6, 12, 10, 1.3);
  for (int threads : {1, 2, 7}) {
    set_threads(threads);
    const auto got = deal_block(17, 0, 300, 6, 12, 10, 1.3);
    ASSERT_EQ(got.size(), ref.size());
    for (std::size_t s = 0; s < ref.size(); ++s) {
      EXPECT_EQ(got[s].features, ref[s].features) << threads;
      EXPECT_EQ(got[s].labels, ref[s].labels) << threads;
    }
  }
  set_threads(0);
}

TEST(Dealer, BlockBoundariesDoNotChangeValues) {
  const auto whole = deal_block_serial(5, 0, 10, 3, 4, 2, 1.0);
  const auto tail = deal_block_serial(5, 6, 4, 3, 4, 2, 1.0);
  for (int s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(whole[s].features(6 + i, j), tail[s].features(i, j));
    }
  }
}

TEST(Parallel, LowestIndexErrorWins) {
  set_threads(4);
  try {
    parallel_for(100, [](std::int64_t i) {
      if (i % 10 == 3) throw ConfigError("index " + std::to_string(i));
    });
    FAIL() << "no exception";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("index 3"), std::string::npos) << e.what();
  }
  set_threads(0);
}
