#include "fedsynth/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <string>

#include "fedsynth/error.hpp"
#include "fedsynth/parallel.hpp"

namespace fedsynth {

namespace {

std::string where(std::uint32_t client, int k) {
  return "client " + std::to_string(client) + ", class " + std::to_string(k);
}

// Per-thread scratch for Floyd's sampler: marks[i] flags a chosen position.
struct Scratch {
  std::vector<char> marks;
  std::vector<std::size_t> picks;
};

void mix_into(const ClientShard& shard, int k, int l, Stream& stream, bool with_replacement,
              Scratch& scratch, SyntheticRecord& out) {
  if (k < 0 || static_cast<std::size_t>(k) >= shard.class_index.size()) {
    throw ContractError("class out of range (" + where(shard.client_id, k) + ")");
  }
  const auto& members = shard.class_index[static_cast<std::size_t>(k)];
  const std::size_t n = members.size();
  if (n == 0) throw ConfigError("empty class set (" + where(shard.client_id, k) + ")");
  if (l < 1) throw ContractError("l must be >= 1");
  const auto ll = static_cast<std::size_t>(l);

  auto& picks = scratch.picks;
  picks.clear();
  if (with_replacement || n < ll) {
    for (std::size_t j = 0; j < ll; ++j) picks.push_back(static_cast<std::size_t>(stream.uniform_index(n)));
  } else {
    // Floyd: l distinct positions out of n with l draws.
    auto& marks = scratch.marks;
    if (marks.size() < n) marks.assign(n, 0);
    for (std::size_t j = n - ll; j < n; ++j) {
      const auto r = static_cast<std::size_t>(stream.uniform_index(j + 1));
      const std::size_t pick = marks[r] ? j : r;
      marks[pick] = 1;
      picks.push_back(pick);
    }
    for (std::size_t p : picks) marks[p] = 0;
  }

  const std::size_t d = shard.data.dim();
  out.features.assign(d, 0.0);
  for (std::size_t p : picks) {
    const auto row = shard.data.features.row(members[p]);
    for (std::size_t j = 0; j < d; ++j) out.features[j] += row[j];
  }
  const double inv = 1.0 / static_cast<double>(l);
  for (double& v : out.features) v *= inv;
  out.soft_label.assign(static_cast<std::size_t>(shard.data.num_classes), 0.0);
  out.soft_label[static_cast<std::size_t>(k)] = 1.0;
}

void synthesize_slot(const ClientShard& shard, const SynthesisConfig& cfg,
                     const CorrelatedSlices* correlated, std::uint64_t seed, std::uint64_t t,
                     Scratch& scratch, SyntheticRecord& rec) {
  const int k = static_cast<int>(t % static_cast<std::uint64_t>(cfg.K));
  const std::uint32_t id = shard.client_id;
  Stream select(StreamKey{seed, id, t, StreamRole::kMixSelect});
  mix_into(shard, k, cfg.l, select, cfg.with_replacement, scratch, rec);
  if (cfg.scales.tau_e > 0) {
    const auto i = static_cast<std::size_t>(t - correlated->t_begin);
    const auto ex = correlated->features.row(i);
    const auto ey = correlated->labels.row(i);
    for (std::size_t j = 0; j < rec.features.size(); ++j) rec.features[j] += ex[j];
    for (std::size_t j = 0; j < rec.soft_label.size(); ++j) rec.soft_label[j] += ey[j];
  }
  add_gaussian(StreamKey{seed, id, t, StreamRole::kFeatureLocal}, rec.features, cfg.scales.tau_g);
  add_gaussian(StreamKey{seed, id, t, StreamRole::kLabelLocal}, rec.soft_label, cfg.scales.tau_g);
}

void check_range(const ClientShard& shard, const SynthesisConfig& cfg,
                 const CorrelatedSlices* correlated, std::uint64_t t_begin, std::size_t count) {
  cfg.validate();
  if (shard.data.num_classes != cfg.K) {
    throw ContractError("shard has " + std::to_string(shard.data.num_classes) +
                        " classes, config has " + std::to_string(cfg.K));
  }
  if (t_begin + count > static_cast<std::uint64_t>(cfg.T_s)) {
    throw ContractError("slot range beyond T_s");
  }
  if (cfg.scales.tau_e > 0 && count > 0) {
    if (!correlated || !correlated->covers(t_begin) || !correlated->covers(t_begin + count - 1)) {
      throw ContractError("missing correlated slice for client " + std::to_string(shard.client_id) +
                          " in slots [" + std::to_string(t_begin) + ", " +
                          std::to_string(t_begin + count) + ")");
    }
    if (correlated->features.cols() != shard.data.dim() ||
        correlated->labels.cols() != static_cast<std::size_t>(cfg.K)) {
      throw ContractError("correlated slice dimensions do not match the shard");
    }
  }
}

}  // namespace

ClientShard ClientShard::build(std::uint32_t client_id, Dataset data) {
  data.validate();
  ClientShard shard;
  shard.client_id = client_id;
  shard.class_index.resize(static_cast<std::size_t>(data.num_classes));
  for (std::size_t i = 0; i < data.size(); ++i) {
    shard.class_index[static_cast<std::size_t>(data.labels[i])].push_back(i);
  }
  shard.data = std::move(data);
  return shard;
}

void SynthesisConfig::validate() const {
  if (l < 1) throw ConfigError("l must be >= 1");
  if (T_s < 1) throw ConfigError("T must be >= 1");
  if (K < 1) throw ConfigError("K must be >= 1");
  if (T_s % K != 0) {
    throw ConfigError("K=" + std::to_string(K) + " must divide T=" + std::to_string(T_s));
  }
  if (!(scales.tau_g >= 0) || !(scales.tau_e >= 0) || !std::isfinite(scales.tau_g) ||
      !std::isfinite(scales.tau_e)) {
    throw ConfigError("noise scales must be finite and >= 0");
  }
}

std::vector<Dataset> partition_dataset(const Dataset& ds, int S, std::uint64_t master_seed) {
  if (S < 1) throw ConfigError("S must be >= 1");
  if (static_cast<std::uint64_t>(S) > kMaxClients) throw ConfigError("S too large");
  const std::size_t n = ds.size();
  if (n % static_cast<std::size_t>(S) != 0) {
    throw ConfigError("S=" + std::to_string(S) + " does not divide N=" + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Stream stream(StreamKey{master_seed, kServerClient, 0, StreamRole::kPartition});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.uniform_index(i));
    std::swap(order[i - 1], order[j]);
  }
  const std::size_t per = n / static_cast<std::size_t>(S);
  std::vector<Dataset> shards;
  shards.reserve(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) {
    std::span<const std::size_t> idx(order.data() + static_cast<std::size_t>(s) * per, per);
    shards.push_back(ds.select(idx));
  }
  return shards;
}

SyntheticRecord mix_once(const ClientShard& shard, int k, int l, const StreamKey& key,
                         bool with_replacement) {
  Stream stream(key);
  Scratch scratch;
  SyntheticRecord rec;
  mix_into(shard, k, l, stream, with_replacement, scratch, rec);
  return rec;
}

std::vector<SyntheticRecord> synthesize_range(const ClientShard& shard, const SynthesisConfig& cfg,
                                              const CorrelatedSlices* correlated,
                                              std::uint64_t master_seed, std::uint64_t t_begin,
                                              std::size_t count) {
  check_range(shard, cfg, correlated, t_begin, count);
  std::vector<SyntheticRecord> out(count);
  std::exception_ptr first;
  std::int64_t first_index = std::numeric_limits<std::int64_t>::max();
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel
  {
    Scratch scratch;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        synthesize_slot(shard, cfg, correlated, master_seed, t_begin + static_cast<std::uint64_t>(i),
                        scratch, out[static_cast<std::size_t>(i)]);
      } catch (...) {
#pragma omp critical(fedsynth_synthesis)
        {
          if (i < first_index) {
            first_index = i;
            first = std::current_exception();
          }
        }
      }
    }
  }
  if (first) std::rethrow_exception(first);
  return out;
}

std::vector<SyntheticRecord> synthesize_range_serial(const ClientShard& shard,
                                                     const SynthesisConfig& cfg,
                                                     const CorrelatedSlices* correlated,
                                                     std::uint64_t master_seed,
                                                     std::uint64_t t_begin, std::size_t count) {
  check_range(shard, cfg, correlated, t_begin, count);
  std::vector<SyntheticRecord> out(count);
  Scratch scratch;
  for (std::size_t i = 0; i < count; ++i) {
    synthesize_slot(shard, cfg, correlated, master_seed, t_begin + i, scratch, out[i]);
  }
  return out;
}

std::vector<SyntheticRecord> synthesize_local(const ClientShard& shard, const SynthesisConfig& cfg,
                                              const CorrelatedSlices* correlated,
                                              std::uint64_t master_seed) {
  return synthesize_range(shard, cfg, correlated, master_seed, 0, static_cast<std::size_t>(cfg.T_s));
}

std::vector<SyntheticRecord> synthesize_local_serial(const ClientShard& shard,
                                                     const SynthesisConfig& cfg,
                                                     const CorrelatedSlices* correlated,
                                                     std::uint64_t master_seed) {
  return synthesize_range_serial(shard, cfg, correlated, master_seed, 0,
                                 static_cast<std::size_t>(cfg.T_s));
}

}  // namespace fedsynth
