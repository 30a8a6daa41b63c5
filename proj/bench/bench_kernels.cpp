// Serial reference vs OpenMP versions of the hot kernels.

#include <benchmark/benchmark.h>

#include <vector>

#include "fedsynth/accountant.hpp"
#include "fedsynth/blobs.hpp"
#include "fedsynth/federation.hpp"
#include "fedsynth/noise.hpp"
#include "fedsynth/preprocess.hpp"
#include "fedsynth/synthesis.hpp"

using namespace fedsynth;

namespace {

const ClientShard& shard() {
  static const ClientShard s = [] {
    BlobParams p;
    p.num_classes = 10;
    p.per_class = 600;
    p.dim = 784;
    return ClientShard::build(0, preprocess_client(make_blobs(p), 1.0));
  }();
  return s;
}

SynthesisConfig synth_config(int l) {
  SynthesisConfig cfg;
  cfg.l = l;
  cfg.T_s = 2000;
  cfg.K = 10;
  cfg.scales = {1.0, 0.0};
  return cfg;
}

void BM_SynthesisSerial(benchmark::State& state) {
  const auto cfg = synth_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_local_serial(shard(), cfg, nullptr, 1));
  state.SetItemsProcessed(state.iterations() * cfg.T_s);
}
BENCHMARK(BM_SynthesisSerial)->Arg(1)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SynthesisParallel(benchmark::State& state) {
  const auto cfg = synth_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_local(shard(), cfg, nullptr, 1));
  state.SetItemsProcessed(state.iterations() * cfg.T_s);
}
BENCHMARK(BM_SynthesisParallel)->Arg(1)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DealerSerial(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(deal_block_serial(1, 0, 512, S, 784, 10, 1.0));
}
BENCHMARK(BM_DealerSerial)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_DealerParallel(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(deal_block(1, 0, 512, S, 784, 10, 1.0));
}
BENCHMARK(BM_DealerParallel)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Aggregate(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  std::vector<SyntheticRecord> recs(static_cast<std::size_t>(S),
                                    SyntheticRecord{std::vector<double>(784, 0.5), std::vector<double>(10, 0.1)});
  std::vector<const SyntheticRecord*> ptrs;
  for (const auto& r : recs) ptrs.push_back(&r);
  for (auto _ : state) benchmark::DoNotOptimize(aggregate_slot(0, ptrs));
}
BENCHMARK(BM_Aggregate)->Arg(5)->Arg(20);

PrivacyParams mnist() {
  PrivacyParams p;
  p.l = 4;
  p.N = 60000;
  p.K = 10;
  p.T = 60000;
  return p;
}

void BM_AlphaGridSerial(benchmark::State& state) {
  const auto p = mnist();
  for (auto _ : state) benchmark::DoNotOptimize(total_epsilon_serial(p, 3.0));
}
BENCHMARK(BM_AlphaGridSerial)->Unit(benchmark::kMillisecond);

void BM_AlphaGridParallel(benchmark::State& state) {
  const auto p = mnist();
  for (auto _ : state) benchmark::DoNotOptimize(total_epsilon(p, 3.0));
}
BENCHMARK(BM_AlphaGridParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
