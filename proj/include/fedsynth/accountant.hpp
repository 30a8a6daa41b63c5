#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "fedsynth/mode.hpp"

namespace fedsynth {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Largest exponent accepted for e^{(i-1)ε(i)} before the order is treated
/// as overflowing.
inline constexpr double kMaxExponent = 709.0;

struct PrivacyParams {
  double epsilon_target = kInf;
  double delta = 1e-5;
  int l = 1;             // order of mixture
  double c = 1.0;        // clipping threshold
  std::int64_t T = 0;    // released records
  std::int64_t N = 0;    // global dataset size
  int K = 0;             // classes
  int S = 1;             // clients
  int alpha_max = 200;

  /// p = lK/N, always with the global N.
  double sampling_rate() const noexcept;
  /// Throws ConfigError when an invariant fails (p in (0,1], K | T, S | N, ...).
  void validate() const;
};

struct NoiseScales {
  double tau_g = 0.0;  // independent local noise std
  double tau_e = 0.0;  // zero-sum correlated noise std

  friend bool operator==(const NoiseScales&, const NoiseScales&) = default;
};

struct AccountingReport {
  double epsilon_achieved = kInf;
  int alpha_star = 0;
  /// (α, ε'(α)) for α = 3..alpha_max; skipped orders carry +inf.
  std::vector<std::pair<int, double>> rdp_curve;
  double tau_g = 0.0;  // noise std the curve was evaluated at
  double tau_e = 0.0;
  double delta = 0.0;
  std::int64_t T = 0;
  /// Same accounting with p = lK/N_s, for comparison only.
  std::optional<double> epsilon_local_p;
  /// (τ, ε(τ)) pairs visited by calibration.
  std::vector<std::pair<double, double>> calibration_trace;
};

// ---------------------------------------------------------------------------
// Building blocks. ε(α) below is the per-record RDP of the mixed feature and
// label release; with sensitivities Δx = 2c/l and Δy = √2/l it is linear in α.

/// α·Δ²/(2σ²). σ = 0 with Δ > 0 is an infinite cost.
double gaussian_rdp(double alpha, double sigma, double sensitivity);

/// (α/l²)·(2c² + 1)/τ_g².
double per_sample_rdp(double alpha, int l, double c, double tau_g);

/// B(m) = Σ_{i=0}^{m} (-1)^i C(m,i) e^{(i-1)ε(i)}. Throws AccountingOverflow
/// when e^{(m-1)ε(m)} exceeds e^709.
double b_term(int m, int l, double c, double tau_g);

/// G(α) = Σ_{j=3}^{α} p^j C(α,j) √(B(2⌊j/2⌋)·B(⌈j/2⌉)), negative products
/// clamped to zero. May return +inf when the sum leaves the double range.
double g_term(int alpha, double p, int l, double c, double tau_g);

/// ε'(α) for the subsampled mechanism, α ≥ 3.
double subsampled_rdp(int alpha, const PrivacyParams& params, double tau_g);
double subsampled_rdp(int alpha, double p, int l, double c, double tau_g);

/// The smaller branch of min{4(e^{ε(2)}-1), 2e^{ε(2)}}; true when the first
/// is selected.
bool selects_expm1_branch(double eps2) noexcept;

/// Evaluates ε'(α) for all orders at one noise level. B(m) is tabulated once
/// in 50-digit arithmetic because the alternating sum cancels catastrophically
/// in double precision.
class SubsampledRdp {
 public:
  /// `rate` is ε(1): ε(i) = rate·i. `max_order` bounds the α grid.
  SubsampledRdp(double rate, double p, int max_order);

  /// Signed B(m); throws AccountingOverflow if m is beyond the overflow limit.
  double b(int m) const;
  /// log G(α); -inf when G = 0.
  double log_g(int alpha) const;
  /// ε'(α), or nullopt when α overflows or is numerically unreliable.
  std::optional<double> epsilon_prime(int alpha) const;

  int max_valid_order() const noexcept { return max_valid_m_; }

 private:
  struct Entry {
    int sign = 0;              // -1, 0, +1
    double log_abs = -kInf;    // log |B(m)|
    double log_err = -kInf;    // log of the rounding-error bound
  };
  double log_g_impl(int alpha, double* log_err) const;

  double rate_;
  double p_;
  int max_order_;
  int max_valid_m_;
  std::vector<Entry> table_;
};

/// min over α ∈ {3..alpha_max} of T·ε'(α) + ln(1/δ)/(α-1). Orders that
/// overflow are skipped; throws AccountingError if all are.
AccountingReport total_epsilon(const PrivacyParams& params, double tau_g);
/// Reference implementation of total_epsilon without the parallel α loop.
AccountingReport total_epsilon_serial(const PrivacyParams& params, double tau_g);

/// Adds the p = lK/N_s diagnostic to a report.
void add_local_sampling_diagnostic(AccountingReport& report, const PrivacyParams& params);

// ---------------------------------------------------------------------------
// CAPE variance calculus.

/// (1/N)·√(2 ln(1.25/δ)).
double pooled_tau(std::int64_t N, double delta);

/// √S·τ.
double conventional_local_tau(double tau_central, int S);

/// (τ_g, τ_g·√(S-1)): τ_e² + τ_g² = S·τ_g².
NoiseScales cape_split(double tau_g, int S);

/// Per-client scales for a mode given the calibrated aggregate-level noise
/// τ_central. Each federated client's independent noise is √S·τ_central so
/// the S-average carries variance τ_central² like the centralized release.
/// CAPE adds the zero-sum component on top; conventional clients instead
/// scale their independent noise by another √S.
NoiseScales client_noise(Mode mode, double tau_central, int S);

struct Calibration {
  double tau_central = 0.0;
  NoiseScales scales;  // FED_CAPE client scales for params.S
  AccountingReport report;
};

/// Smallest τ (to 1e-3 relative) whose total ε is ≤ epsilon_target, by
/// geometric bisection starting from [1e-4, 1e4]. ε = inf gives τ = 0.
Calibration calibrate_tau(const PrivacyParams& params);

}  // namespace fedsynth
