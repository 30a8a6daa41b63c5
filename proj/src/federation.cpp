#include "fedsynth/federation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fedsynth/error.hpp"
#include "fedsynth/noise.hpp"
#include "fedsynth/parallel.hpp"
#include "fedsynth/preprocess.hpp"
#include "fedsynth/synthesis.hpp"

namespace fedsynth {

SyntheticRecord aggregate_slot(std::uint64_t t, std::span<const SyntheticRecord* const> records) {
  if (records.empty()) throw ContractError("no client records for slot " + std::to_string(t));
  for (std::size_t s = 0; s < records.size(); ++s) {
    if (!records[s]) {
      throw ContractError("slot " + std::to_string(t) + ": missing record from client " + std::to_string(s));
    }
  }
  const std::size_t d = records[0]->features.size();
  const std::size_t k = records[0]->soft_label.size();
  SyntheticRecord out;
  out.features.assign(d, 0.0);
  out.soft_label.assign(k, 0.0);
  for (std::size_t s = 0; s < records.size(); ++s) {
    const SyntheticRecord& r = *records[s];
    if (r.features.size() != d || r.soft_label.size() != k) {
      throw ContractError("slot " + std::to_string(t) + ": client " + std::to_string(s) +
                          " record has inconsistent dimensions");
    }
    for (std::size_t j = 0; j < d; ++j) out.features[j] += r.features[j];
    for (std::size_t j = 0; j < k; ++j) out.soft_label[j] += r.soft_label[j];
  }
  const auto S = static_cast<double>(records.size());
  for (double& v : out.features) v /= S;
  for (double& v : out.soft_label) v /= S;
  return out;
}

int decode_label(std::span<const double> soft) {
  if (soft.empty()) throw ContractError("decode_label: empty soft label");
  std::size_t best = 0;
  for (std::size_t i = 0; i < soft.size(); ++i) {
    if (!std::isfinite(soft[i])) throw ContractError("decode_label: non-finite entry");
    if (soft[i] > soft[best]) best = i;
  }
  return static_cast<int>(best);
}

namespace {

PipelineResult run(const Dataset& ds, const RunConfig& cfg, bool parallel) {
  const std::string ctx = "mode=" + std::string(mode_name(cfg.mode));
  try {
    ds.validate();
    if (cfg.block_slots == 0) throw ConfigError("block_slots must be >= 1");
    PrivacyParams params = cfg.privacy;
    params.N = static_cast<std::int64_t>(ds.size());
    params.K = ds.num_classes;
    const int S = cfg.mode == Mode::kCentralized ? 1 : params.S;
    params.S = S;
    params.validate();

    PipelineResult result;
    result.clients = S;
    if (cfg.mode == Mode::kNonPrivate) {
      result.report.delta = params.delta;
      result.report.T = params.T;
    } else if (cfg.tau_central) {
      const double tau = *cfg.tau_central;
      if (!(tau >= 0) || !std::isfinite(tau)) throw ConfigError("tau_g must be finite and >= 0");
      result.tau_central = tau;
      result.report.delta = params.delta;
      result.report.T = params.T;
      if (tau > 0) {
        try {
          result.report = parallel ? total_epsilon(params, tau) : total_epsilon_serial(params, tau);
        } catch (const AccountingError&) {
          result.report.tau_g = tau;  // below the accountable range: ε stays inf
        }
      }
    } else {
      Calibration cal = calibrate_tau(params);
      result.tau_central = cal.tau_central;
      result.report = std::move(cal.report);
    }
    result.client_scales = client_noise(cfg.mode, result.tau_central, S);
    result.report.tau_e = result.client_scales.tau_e;
    if (result.tau_central > 0) add_local_sampling_diagnostic(result.report, params);

    SynthesisConfig syn;
    syn.l = params.l;
    syn.T_s = params.T;
    syn.K = params.K;
    syn.with_replacement = cfg.with_replacement;
    syn.scales = result.client_scales;
    syn.validate();

    std::vector<ClientShard> shards;
    {
      auto parts = partition_dataset(ds, S, cfg.master_seed);
      shards.resize(parts.size());
      auto prep = [&](std::int64_t s) {
        const auto u = static_cast<std::size_t>(s);
        shards[u] = ClientShard::build(static_cast<std::uint32_t>(s), preprocess_client(parts[u], params.c));
      };
      if (parallel) {
        parallel_for(S, prep);
      } else {
        for (int s = 0; s < S; ++s) prep(s);
      }
    }

    const auto T = static_cast<std::size_t>(params.T);
    const std::size_t d = ds.dim();
    result.data.dim = d;
    result.data.num_classes = params.K;
    result.data.records.resize(T);
    std::vector<std::vector<SyntheticRecord>> local(static_cast<std::size_t>(S));
    std::vector<CorrelatedSlices> slices;
    for (std::size_t begin = 0; begin < T; begin += cfg.block_slots) {
      const std::size_t count = std::min(cfg.block_slots, T - begin);
      const double tau_e = syn.scales.tau_e;
      if (tau_e > 0) {
        slices = parallel ? deal_block(cfg.master_seed, begin, count, S, d, params.K, tau_e)
                          : deal_block_serial(cfg.master_seed, begin, count, S, d, params.K, tau_e);
      }
      for (int s = 0; s < S; ++s) {
        const auto u = static_cast<std::size_t>(s);
        const CorrelatedSlices* corr = tau_e > 0 ? &slices[u] : nullptr;
        try {
          local[u] = parallel ? synthesize_range(shards[u], syn, corr, cfg.master_seed, begin, count)
                              : synthesize_range_serial(shards[u], syn, corr, cfg.master_seed, begin, count);
        } catch (const Error& e) {
          rethrow_with_context(e, "client " + std::to_string(s) + ", slots [" + std::to_string(begin) +
                                      ", " + std::to_string(begin + count) + ")");
        }
      }
      auto agg = [&](std::int64_t i) {
        const auto u = static_cast<std::size_t>(i);
        std::vector<const SyntheticRecord*> recs(static_cast<std::size_t>(S));
        for (std::size_t s = 0; s < recs.size(); ++s) recs[s] = &local[s][u];
        result.data.records[begin + u] = aggregate_slot(begin + u, recs);
      };
      if (parallel) {
        parallel_for(static_cast<std::int64_t>(count), agg);
      } else {
        for (std::size_t i = 0; i < count; ++i) agg(static_cast<std::int64_t>(i));
      }
    }

    std::vector<int> labels(T);
    for (std::size_t t = 0; t < T; ++t) labels[t] = decode_label(result.data.records[t].soft_label);
    result.data.decoded_labels = std::move(labels);
    return result;
  } catch (const Error& e) {
    rethrow_with_context(e, ctx);
  }
}

}  // namespace

PipelineResult run_pipeline(const Dataset& ds, const RunConfig& cfg) { return run(ds, cfg, true); }

PipelineResult run_pipeline_serial(const Dataset& ds, const RunConfig& cfg) {
  return run(ds, cfg, false);
}

}  // namespace fedsynth
