#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedsynth/classifier.hpp"
#include "fedsynth/dataset.hpp"
#include "fedsynth/mode.hpp"
#include "fedsynth/preprocess.hpp"

namespace fedsynth {

/// Real train/test pair in the space synthetic data lives in: both are
/// z-scored with the train statistics and clipped to norm c.
struct EvalData {
  Dataset train;
  Dataset test;
  ColumnStats stats;
};
EvalData prepare_eval_data(const Dataset& train, const Dataset& test, double c);

/// Accuracy of a classifier trained on the real (prepared) training data.
double baseline_accuracy(const EvalData& data, const TrainOptions& options);

struct SweepGrid {
  std::vector<Mode> modes;
  std::vector<int> ls;
  std::vector<int> Ss;
  std::vector<double> epsilons;
  std::vector<std::uint64_t> seeds;

  std::size_t size() const noexcept {
    return modes.size() * ls.size() * Ss.size() * epsilons.size() * seeds.size();
  }
};

struct SweepSettings {
  double c = 1.0;
  double delta = 1e-5;
  std::int64_t T = 0;
  int alpha_max = 200;
  bool with_replacement = false;
  TrainOptions train;
};

struct SweepRow {
  Mode mode = Mode::kFedCape;
  int l = 1;
  int S = 1;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> accuracy;
  std::optional<double> baseline;
  std::optional<double> utility_ratio;
  std::string error;  // empty on success
};

inline constexpr const char* kSweepHeader = "mode,l,S,epsilon,seed,accuracy,baseline,utility_ratio,error";

std::string format_sweep_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

struct SweepOutcome {
  std::vector<SweepRow> rows;  // grid order, then rows only present in the old file
  std::size_t computed = 0;    // grid points run in this call
};

/// One pipeline run and evaluation per grid point. Rows already present in
/// `out` (matched on mode,l,S,epsilon,seed) are kept and not recomputed.
/// Points run in parallel; the file is written atomically in grid order.
/// A failing point records its message in the error column.
SweepOutcome run_sweep(const Dataset& train, const Dataset& test, const SweepGrid& grid,
                       const SweepSettings& settings,
                       const std::optional<std::filesystem::path>& out = std::nullopt);

}  // namespace fedsynth
