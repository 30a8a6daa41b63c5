#include "fedsynth/noise.hpp"

#include <cmath>
#include <string>

#include "fedsynth/error.hpp"
#include "fedsynth/parallel.hpp"

namespace fedsynth {

namespace {

void check_tau(double tau, const char* what) {
  if (!(tau >= 0) || !std::isfinite(tau)) {
    throw ContractError(std::string(what) + " must be finite and >= 0");
  }
}

// Writes client s's centered vector for slot t into rows[s].
void zero_sum_into(std::uint64_t seed, std::uint64_t t, StreamRole role, int S, double sigma_z,
                   std::span<const std::span<double>> rows) {
  const std::size_t dim = rows.empty() ? 0 : rows[0].size();
  for (int s = 0; s < S; ++s) {
    Stream stream(StreamKey{seed, static_cast<std::uint32_t>(s), t, role});
    for (double& v : rows[static_cast<std::size_t>(s)]) v = sigma_z * stream.gaussian();
  }
  for (std::size_t j = 0; j < dim; ++j) {
    double sum = 0.0;
    for (int s = 0; s < S; ++s) sum += rows[static_cast<std::size_t>(s)][j];
    const double mean = sum / S;
    for (int s = 0; s < S; ++s) rows[static_cast<std::size_t>(s)][j] -= mean;
  }
}

void check_dealer(int S, double tau_e) {
  if (S < 1) throw ContractError("zero-sum noise needs S >= 1");
  if (S > static_cast<int>(kMaxClients)) throw ContractError("too many clients");
  check_tau(tau_e, "tau_e");
  if (S == 1 && tau_e > 0) {
    throw ContractError("zero-sum noise with S = 1 must have tau_e = 0");
  }
}

double inflated_sigma(int S, double tau_e) {
  return S == 1 ? 0.0 : tau_e * std::sqrt(static_cast<double>(S) / (S - 1));
}

void deal_slot(std::uint64_t seed, std::uint64_t t, std::size_t i, double sigma_z,
               std::vector<CorrelatedSlices>& out) {
  const int S = static_cast<int>(out.size());
  std::vector<std::span<double>> rows(out.size());
  for (int s = 0; s < S; ++s) rows[static_cast<std::size_t>(s)] = out[static_cast<std::size_t>(s)].features.row(i);
  zero_sum_into(seed, t, StreamRole::kFeatureCorr, S, sigma_z, rows);
  for (int s = 0; s < S; ++s) rows[static_cast<std::size_t>(s)] = out[static_cast<std::size_t>(s)].labels.row(i);
  zero_sum_into(seed, t, StreamRole::kLabelCorr, S, sigma_z, rows);
}

std::vector<CorrelatedSlices> make_slices(std::uint64_t t_begin, std::size_t count, int S,
                                          std::size_t dim_x, int K) {
  std::vector<CorrelatedSlices> out(static_cast<std::size_t>(S));
  for (auto& sl : out) {
    sl.t_begin = t_begin;
    sl.count = count;
    sl.features = Matrix(count, dim_x);
    sl.labels = Matrix(count, static_cast<std::size_t>(K));
  }
  return out;
}

}  // namespace

std::vector<double> draw_gaussian(const StreamKey& key, std::size_t dim, double tau) {
  std::vector<double> out(dim, 0.0);
  add_gaussian(key, out, tau);
  return out;
}

void add_gaussian(const StreamKey& key, std::span<double> out, double tau) {
  check_tau(tau, "tau");
  if (tau == 0.0) return;
  Stream stream(key);
  for (double& v : out) v += tau * stream.gaussian();
}

std::vector<std::vector<double>> draw_zero_sum(std::uint64_t master_seed, std::uint64_t t,
                                               StreamRole role, int S, std::size_t dim,
                                               double tau_e) {
  check_dealer(S, tau_e);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(S), std::vector<double>(dim, 0.0));
  if (tau_e == 0.0) return out;
  std::vector<std::span<double>> rows(out.begin(), out.end());
  zero_sum_into(master_seed, t, role, S, inflated_sigma(S, tau_e), rows);
  return out;
}

std::vector<CorrelatedSlices> deal_block(std::uint64_t master_seed, std::uint64_t t_begin,
                                         std::size_t count, int S, std::size_t dim_x, int K,
                                         double tau_e) {
  check_dealer(S, tau_e);
  auto out = make_slices(t_begin, count, S, dim_x, K);
  if (tau_e == 0.0) return out;
  const double sigma_z = inflated_sigma(S, tau_e);
  parallel_for(static_cast<std::int64_t>(count), [&](std::int64_t i) {
    deal_slot(master_seed, t_begin + static_cast<std::uint64_t>(i), static_cast<std::size_t>(i), sigma_z, out);
  });
  return out;
}

std::vector<CorrelatedSlices> deal_block_serial(std::uint64_t master_seed, std::uint64_t t_begin,
                                                std::size_t count, int S, std::size_t dim_x,
                                                int K, double tau_e) {
  check_dealer(S, tau_e);
  auto out = make_slices(t_begin, count, S, dim_x, K);
  if (tau_e == 0.0) return out;
  const double sigma_z = inflated_sigma(S, tau_e);
  for (std::size_t i = 0; i < count; ++i) deal_slot(master_seed, t_begin + i, i, sigma_z, out);
  return out;
}

}  // namespace fedsynth
