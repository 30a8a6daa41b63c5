#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "fedsynth/accountant.hpp"
#include "fedsynth/dataset.hpp"
#include "fedsynth/mode.hpp"

namespace fedsynth {

struct RunConfig {
  Mode mode = Mode::kFedCape;
  /// epsilon_target, delta, l, c, T, S, alpha_max are read from here; N and
  /// K are overwritten from the dataset.
  PrivacyParams privacy;
  bool with_replacement = false;
  std::uint64_t master_seed = 42;
  /// Accounted noise level; when set, calibration is skipped and the report
  /// is the forward accounting of this value.
  std::optional<double> tau_central;
  /// Slots processed per dealer/synthesis/aggregation round. Affects memory
  /// only, never the output.
  std::size_t block_slots = 512;
};

struct PipelineResult {
  SyntheticDataset data;
  AccountingReport report;
  double tau_central = 0.0;
  NoiseScales client_scales;  // what every client actually used
  int clients = 1;
};

/// Coordinate-wise mean of the S client records for slot t. A null entry is
/// a missing client and raises a ContractError naming t and the client.
SyntheticRecord aggregate_slot(std::uint64_t t, std::span<const SyntheticRecord* const> records);

/// argmax with ties to the lowest index.
int decode_label(std::span<const double> soft);

/// Full run: accounting / calibration, partition, per-client preprocessing,
/// zero-sum dealing, local synthesis, slot aggregation, label decoding.
PipelineResult run_pipeline(const Dataset& ds, const RunConfig& cfg);
/// Same output computed without any parallel loop.
PipelineResult run_pipeline_serial(const Dataset& ds, const RunConfig& cfg);

}  // namespace fedsynth
