#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fedsynth/accountant.hpp"
#include "fedsynth/dataset.hpp"
#include "fedsynth/noise.hpp"
#include "fedsynth/rng.hpp"

namespace fedsynth {

/// One client's (preprocessed) local data with rows grouped by class.
struct ClientShard {
  std::uint32_t client_id = 0;
  Dataset data;
  std::vector<std::vector<std::size_t>> class_index;  // k -> row indices

  /// Builds the class index; every row appears exactly once.
  static ClientShard build(std::uint32_t client_id, Dataset data);
};

struct SynthesisConfig {
  int l = 1;               // order of mixture
  std::int64_t T_s = 0;    // records per client
  int K = 0;
  bool with_replacement = false;  // force sampling with replacement
  NoiseScales scales;

  /// Throws ConfigError unless l >= 1, T_s >= 1, K >= 1 and K | T_s.
  void validate() const;
};

/// Uniformly random disjoint equal shards (PARTITION stream of the server).
/// Throws ConfigError unless S divides N.
std::vector<Dataset> partition_dataset(const Dataset& ds, int S, std::uint64_t master_seed);

/// Noiseless mix of l random rows of class k: mean features and the one-hot
/// of k. Selection is without replacement when the class has >= l rows (and
/// with_replacement is false), with replacement otherwise.
SyntheticRecord mix_once(const ClientShard& shard, int k, int l, const StreamKey& key,
                         bool with_replacement = false);

/// Records for slots [t_begin, t_begin + count): slot t mixes class t mod K
/// and adds the correlated slice for t plus fresh local noise. `correlated`
/// may be null only when scales.tau_e = 0.
std::vector<SyntheticRecord> synthesize_range(const ClientShard& shard, const SynthesisConfig& cfg,
                                              const CorrelatedSlices* correlated,
                                              std::uint64_t master_seed, std::uint64_t t_begin,
                                              std::size_t count);
/// Reference implementation without the parallel slot loop.
std::vector<SyntheticRecord> synthesize_range_serial(const ClientShard& shard,
                                                     const SynthesisConfig& cfg,
                                                     const CorrelatedSlices* correlated,
                                                     std::uint64_t master_seed,
                                                     std::uint64_t t_begin, std::size_t count);

/// All T_s records of a client.
std::vector<SyntheticRecord> synthesize_local(const ClientShard& shard, const SynthesisConfig& cfg,
                                              const CorrelatedSlices* correlated,
                                              std::uint64_t master_seed);
std::vector<SyntheticRecord> synthesize_local_serial(const ClientShard& shard,
                                                     const SynthesisConfig& cfg,
                                                     const CorrelatedSlices* correlated,
                                                     std::uint64_t master_seed);

}  // namespace fedsynth
