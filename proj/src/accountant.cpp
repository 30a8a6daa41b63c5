#include "fedsynth/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fedsynth/error.hpp"

namespace fedsynth {

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

double log_add_exp(double a, double b) noexcept {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log(e^a - e^b) for a >= b.
double log_sub_exp(double a, double b) noexcept {
  if (b == -kInf) return a;
  if (b >= a) return -kInf;
  return a + std::log1p(-std::exp(b - a));
}

double log_choose(int n, int k) noexcept {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log(e^x - 1) for x > 0.
double log_expm1(double x) noexcept {
  return x > 40.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x));
}

// log(1 + e^lx).
double log1p_exp(double lx) noexcept {
  if (lx == -kInf) return 0.0;
  return lx < 0.0 ? std::log1p(std::exp(lx)) : lx + std::log1p(std::exp(-lx));
}

void require_order(int alpha, int max_order) {
  if (alpha < 3) throw ContractError("Rényi order must be an integer >= 3, got " + std::to_string(alpha));
  if (alpha > max_order) {
    throw ContractError("Rényi order " + std::to_string(alpha) + " beyond table size " +
                        std::to_string(max_order));
  }
}

}  // namespace

// ------------------------------------------------------------------ params

double PrivacyParams::sampling_rate() const noexcept {
  return static_cast<double>(l) * static_cast<double>(K) / static_cast<double>(N);
}

void PrivacyParams::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (std::isnan(epsilon_target) || epsilon_target <= 0) fail("epsilon must be positive or inf");
  if (!(delta > 0 && delta < 1)) fail("delta must lie in (0,1)");
  if (l < 1) fail("l must be >= 1");
  if (!(c > 0) || !std::isfinite(c)) fail("c must be positive");
  if (T < 1) fail("T must be >= 1");
  if (N < 1) fail("N must be >= 1");
  if (K < 1) fail("K must be >= 1");
  if (S < 1) fail("S must be >= 1");
  if (alpha_max < 3) fail("alpha_max must be >= 3");
  if (T % K != 0) fail("K=" + std::to_string(K) + " must divide T=" + std::to_string(T));
  if (N % S != 0) fail("S=" + std::to_string(S) + " must divide N=" + std::to_string(N));
  const double p = sampling_rate();
  if (!(p > 0 && p <= 1)) {
    fail("sampling rate p = lK/N = " + std::to_string(p) + " outside (0,1]");
  }
}

// ------------------------------------------------------------ RDP pieces

double gaussian_rdp(double alpha, double sigma, double sensitivity) {
  if (alpha < 0 || sigma < 0 || sensitivity < 0 || std::isnan(sigma)) {
    throw ContractError("gaussian_rdp: arguments must be non-negative");
  }
  if (sensitivity == 0) return 0.0;
  if (sigma == 0) return kInf;
  return alpha * sensitivity * sensitivity / (2.0 * sigma * sigma);
}

double per_sample_rdp(double alpha, int l, double c, double tau_g) {
  if (l < 1) throw ContractError("per_sample_rdp: l must be >= 1");
  if (alpha < 0 || tau_g < 0 || !(c > 0)) throw ContractError("per_sample_rdp: invalid argument");
  if (alpha == 0) return 0.0;
  if (tau_g == 0) return kInf;
  const double ll = static_cast<double>(l);
  return alpha / (ll * ll) * (2.0 * c * c + 1.0) / (tau_g * tau_g);
}

bool selects_expm1_branch(double eps2) noexcept {
  return 4.0 * std::expm1(eps2) < 2.0 * std::exp(eps2);
}

SubsampledRdp::SubsampledRdp(double rate, double p, int max_order)
    : rate_(rate), p_(p), max_order_(max_order) {
  if (!(rate >= 0)) throw ContractError("SubsampledRdp: rate must be >= 0");
  if (!(p >= 0 && p <= 1)) throw ContractError("SubsampledRdp: p must lie in [0,1]");
  if (max_order < 2) throw ContractError("SubsampledRdp: max_order must be >= 2");

  // Largest m whose top exponent (m-1)·m·rate stays representable.
  max_valid_m_ = 1;
  for (int m = 2; m <= max_order; ++m) {
    if (static_cast<double>(m - 1) * m * rate > kMaxExponent) break;
    max_valid_m_ = m;
  }
  table_.assign(static_cast<std::size_t>(max_valid_m_) + 1, Entry{});
  table_[0] = Entry{1, 0.0, -kInf};
  if (rate == 0.0) {
    // Σ (-1)^i C(m,i) = 0 exactly for m >= 1.
    for (int m = 1; m <= max_valid_m_; ++m) table_[static_cast<std::size_t>(m)] = Entry{0, -kInf, -kInf};
    return;
  }

  const int top = max_valid_m_;
  std::vector<Big> f(static_cast<std::size_t>(top) + 1);
  for (int i = 0; i <= top; ++i) {
    f[static_cast<std::size_t>(i)] = exp(Big(rate) * (static_cast<double>(i) * (i - 1)));
  }
  const Big ulp = std::numeric_limits<Big>::epsilon();
  for (int m = 1; m <= top; ++m) {
    Big binom = 1;
    Big sum = 0, comp = 0, abs_sum = 0, max_term = 0;
    for (int i = 0; i <= m; ++i) {
      if (i > 0) binom = binom * (m - i + 1) / i;
      Big term = binom * f[static_cast<std::size_t>(i)];
      if (i & 1) term = -term;
      // Neumaier compensated summation.
      const Big t = sum + term;
      if (abs(sum) >= abs(term)) {
        comp += (sum - t) + term;
      } else {
        comp += (term - t) + sum;
      }
      sum = t;
      const Big a = abs(term);
      abs_sum += a;
      if (a > max_term) max_term = a;
    }
    Big total = sum + comp;
    const Big err = abs_sum * ulp * (4 * (m + 2));
    Entry e;
    e.log_err = static_cast<double>(log(err));
    if (total < 0 && -total < max_term * Big(1e-12)) total = 0;
    if (total == 0) {
      e.sign = 0;
    } else {
      e.sign = total > 0 ? 1 : -1;
      e.log_abs = static_cast<double>(log(abs(total)));
    }
    table_[static_cast<std::size_t>(m)] = e;
  }
}

double SubsampledRdp::b(int m) const {
  if (m < 0) throw ContractError("b_term: m must be >= 0");
  if (m > max_order_) throw ContractError("b_term: m beyond table size");
  if (m > max_valid_m_) {
    throw AccountingOverflow("B(" + std::to_string(m) + ") overflows: order too large for this noise");
  }
  const Entry& e = table_[static_cast<std::size_t>(m)];
  if (e.sign == 0) return 0.0;
  const double v = std::exp(e.log_abs);
  if (!std::isfinite(v)) {
    throw AccountingOverflow("B(" + std::to_string(m) + ") exceeds the double range");
  }
  return e.sign * v;
}

double SubsampledRdp::log_g_impl(int alpha, double* log_err) const {
  double lg = -kInf;
  double le = -kInf;
  if (p_ == 0.0) {
    if (log_err) *log_err = -kInf;
    return lg;
  }
  const double log_p = std::log(p_);
  for (int j = 3; j <= alpha; ++j) {
    const int i1 = 2 * (j / 2);
    const int i2 = (j + 1) / 2;
    if (i1 > max_valid_m_) {
      throw AccountingOverflow("G(" + std::to_string(alpha) + ") needs B(" + std::to_string(i1) +
                               ") which overflows");
    }
    const Entry& b1 = table_[static_cast<std::size_t>(i1)];
    const Entry& b2 = table_[static_cast<std::size_t>(i2)];
    const double base = j * log_p + log_choose(alpha, j);
    // Negative products are clamped to zero.
    double value = -kInf;
    if (b1.sign * b2.sign > 0) {
      value = 0.5 * (b1.log_abs + b2.log_abs);
      lg = log_add_exp(lg, base + value);
    }
    if (log_err) {
      const double upper = 0.5 * (log_add_exp(b1.log_abs, b1.log_err) + log_add_exp(b2.log_abs, b2.log_err));
      const double lower = 0.5 * (log_sub_exp(b1.log_abs, b1.log_err) + log_sub_exp(b2.log_abs, b2.log_err));
      const double spread = std::isnan(lower) ? upper : log_sub_exp(upper, lower);
      le = log_add_exp(le, base + spread);
    }
  }
  if (log_err) *log_err = le;
  return lg;
}

double SubsampledRdp::log_g(int alpha) const {
  require_order(alpha, max_order_);
  return log_g_impl(alpha, nullptr);
}

std::optional<double> SubsampledRdp::epsilon_prime(int alpha) const {
  require_order(alpha, max_order_);
  if (2 * (alpha / 2) > max_valid_m_) return std::nullopt;
  if (p_ == 0.0 || rate_ == 0.0) return 0.0;

  const double eps2 = 2.0 * rate_;
  const double log_min = std::min(std::log(4.0) + log_expm1(eps2), std::log(2.0) + eps2);
  const double log_first = 2.0 * std::log(p_) + log_choose(alpha, 2) + log_min;
  double log_gerr = -kInf;
  const double lg = log_g_impl(alpha, &log_gerr);
  const double log4 = std::log(4.0);
  const double log_x = log_add_exp(log_first, log4 + lg);
  const double log_err = log4 + log_gerr;
  // Orders where the 50-digit tabulation cannot pin ε' to ~1e-10 relative
  // are dropped, like overflowing ones.
  if (log_err > log_x + std::log(1e-10)) return std::nullopt;
  return log1p_exp(log_x) / (alpha - 1);
}

double b_term(int m, int l, double c, double tau_g) {
  const double rate = per_sample_rdp(1.0, l, c, tau_g);
  if (m <= 1) return m == 0 ? 1.0 : 0.0;
  if (std::isinf(rate)) throw AccountingOverflow("B(m): infinite per-sample cost");
  return SubsampledRdp(rate, 0.0, m).b(m);
}

double g_term(int alpha, double p, int l, double c, double tau_g) {
  const double rate = per_sample_rdp(1.0, l, c, tau_g);
  if (std::isinf(rate)) throw AccountingOverflow("G: infinite per-sample cost");
  return std::exp(SubsampledRdp(rate, p, alpha).log_g(alpha));
}

double subsampled_rdp(int alpha, double p, int l, double c, double tau_g) {
  if (p == 0.0) return 0.0;  // no record is ever sampled
  const double rate = per_sample_rdp(1.0, l, c, tau_g);
  if (std::isinf(rate)) throw AccountingOverflow("ε': infinite per-sample cost");
  const auto v = SubsampledRdp(rate, p, alpha).epsilon_prime(alpha);
  if (!v) throw AccountingOverflow("ε'(" + std::to_string(alpha) + ") overflows for this noise");
  return *v;
}

double subsampled_rdp(int alpha, const PrivacyParams& params, double tau_g) {
  return subsampled_rdp(alpha, params.sampling_rate(), params.l, params.c, tau_g);
}

// ----------------------------------------------------------- composition

namespace {

AccountingReport total_epsilon_impl(const PrivacyParams& params, double tau_g, bool parallel) {
  params.validate();
  if (!(tau_g > 0)) {
    throw AccountingError("noise too small for accounting range (tau_g = " + std::to_string(tau_g) +
                          ", non-private)");
  }
  const double rate = per_sample_rdp(1.0, params.l, params.c, tau_g);
  const SubsampledRdp model(rate, params.sampling_rate(), params.alpha_max);

  const int n = params.alpha_max - 2;
  std::vector<double> curve(static_cast<std::size_t>(n), kInf);
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int k = 0; k < n; ++k) {
      const auto v = model.epsilon_prime(k + 3);
      curve[static_cast<std::size_t>(k)] = v.value_or(kInf);
    }
  } else {
    for (int k = 0; k < n; ++k) curve[static_cast<std::size_t>(k)] = model.epsilon_prime(k + 3).value_or(kInf);
  }

  AccountingReport report;
  report.tau_g = tau_g;
  report.delta = params.delta;
  report.T = params.T;
  report.rdp_curve.reserve(curve.size());
  const double log_inv_delta = -std::log(params.delta);
  const auto T = static_cast<double>(params.T);
  for (int k = 0; k < n; ++k) {
    const int alpha = k + 3;
    const double e = curve[static_cast<std::size_t>(k)];
    report.rdp_curve.emplace_back(alpha, e);
    if (std::isinf(e)) continue;
    const double total = T * e + log_inv_delta / (alpha - 1);
    if (total < report.epsilon_achieved) {
      report.epsilon_achieved = total;
      report.alpha_star = alpha;
    }
  }
  if (report.alpha_star == 0) {
    throw AccountingError("noise too small for accounting range (tau_g = " + std::to_string(tau_g) +
                          ", every order in 3.." + std::to_string(params.alpha_max) + " overflows)");
  }
  return report;
}

}  // namespace

AccountingReport total_epsilon(const PrivacyParams& params, double tau_g) {
  return total_epsilon_impl(params, tau_g, true);
}

AccountingReport total_epsilon_serial(const PrivacyParams& params, double tau_g) {
  return total_epsilon_impl(params, tau_g, false);
}

void add_local_sampling_diagnostic(AccountingReport& report, const PrivacyParams& params) {
  PrivacyParams local = params;
  local.N = params.N / params.S;
  local.S = 1;
  report.epsilon_local_p.reset();
  if (local.sampling_rate() > 1.0 || !(report.tau_g > 0)) return;
  try {
    report.epsilon_local_p = total_epsilon(local, report.tau_g).epsilon_achieved;
  } catch (const AccountingError&) {
    report.epsilon_local_p = kInf;
  }
}

// ------------------------------------------------------------------ CAPE

double pooled_tau(std::int64_t N, double delta) {
  if (N < 1) throw ConfigError("pooled_tau: N must be >= 1");
  if (!(delta > 0 && delta < 1)) throw ConfigError("pooled_tau: delta must lie in (0,1)");
  return std::sqrt(2.0 * std::log(1.25 / delta)) / static_cast<double>(N);
}

double conventional_local_tau(double tau_central, int S) {
  if (S < 1) throw ConfigError("S must be >= 1");
  return std::sqrt(static_cast<double>(S)) * tau_central;
}

NoiseScales cape_split(double tau_g, int S) {
  if (S < 1) throw ConfigError("S must be >= 1");
  return {tau_g, tau_g * std::sqrt(static_cast<double>(S - 1))};
}

NoiseScales client_noise(Mode mode, double tau_central, int S) {
  switch (mode) {
    case Mode::kNonPrivate: return {0.0, 0.0};
    case Mode::kCentralized: return {tau_central, 0.0};
    case Mode::kFedConventional:
      return {conventional_local_tau(conventional_local_tau(tau_central, S), S), 0.0};
    case Mode::kFedCape: return cape_split(conventional_local_tau(tau_central, S), S);
  }
  throw ContractError("unknown mode");
}

// ----------------------------------------------------------- calibration

Calibration calibrate_tau(const PrivacyParams& params) {
  params.validate();
  Calibration cal;
  if (std::isinf(params.epsilon_target)) {
    cal.report.delta = params.delta;
    cal.report.T = params.T;
    return cal;
  }
  const double target = params.epsilon_target;
  std::vector<std::pair<double, double>> trace;
  auto eps_at = [&](double tau) {
    double e = kInf;
    try {
      e = total_epsilon(params, tau).epsilon_achieved;
    } catch (const AccountingError&) {
    }
    trace.emplace_back(tau, e);
    return e;
  };

  double lo = 1e-4, hi = 1e4;
  double eps_hi = eps_at(hi);
  for (int i = 0; i < 10 && eps_hi > target; ++i) {
    lo = hi;
    hi *= 2.0;
    eps_hi = eps_at(hi);
  }
  if (eps_hi > target) {
    throw CalibrationError("target epsilon " + std::to_string(target) +
                           " unreachable: epsilon(" + std::to_string(hi) + ") = " +
                           std::to_string(eps_hi) + " > target within bracket [1e-4, " +
                           std::to_string(hi) + "]");
  }
  double eps_lo = eps_at(lo);
  for (int i = 0; i < 10 && eps_lo <= target; ++i) {
    hi = lo;
    lo *= 0.5;
    eps_lo = eps_at(lo);
  }
  if (eps_lo > target) {
    while (hi / lo > 1.0 + 1e-3) {
      const double mid = std::sqrt(lo * hi);
      if (eps_at(mid) <= target) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  } else {
    hi = lo;  // target met even at the bottom of the bracket
  }

  cal.tau_central = hi;
  cal.report = total_epsilon(params, hi);
  cal.report.calibration_trace = std::move(trace);
  cal.scales = client_noise(Mode::kFedCape, hi, params.S);
  return cal;
}

}  // namespace fedsynth
