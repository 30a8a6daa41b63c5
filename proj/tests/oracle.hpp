#pragma once

// Reference evaluation of the subsampled mechanism's RDP bound in 100-digit
// decimal arithmetic with plain summation. Shares no code with the library.

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace oracle {

using Dec = boost::multiprecision::cpp_dec_float_100;

// ε(i) = a·i.
inline Dec binom(int n, int k) {
  Dec r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline Dec B(int m, const Dec& a) {
  Dec s = 0;
  for (int i = 0; i <= m; ++i) {
    const Dec term = binom(m, i) * exp(Dec(i - 1) * a * i);
    s += (i % 2 == 0) ? term : Dec(-term);
  }
  return s;
}

inline Dec G(int alpha, const Dec& p, const Dec& a) {
  Dec s = 0;
  for (int j = 3; j <= alpha; ++j) {
    const Dec prod = B(2 * (j / 2), a) * B((j + 1) / 2, a);
    if (prod > 0) s += pow(p, j) * binom(alpha, j) * sqrt(prod);
  }
  return s;
}

inline Dec eps_prime(int alpha, const Dec& p, const Dec& a) {
  const Dec e2 = 2 * a;
  const Dec first = 4 * (exp(e2) - 1);
  const Dec second = 2 * exp(e2);
  const Dec m = first < second ? first : second;
  return log(1 + p * p * binom(alpha, 2) * m + 4 * G(alpha, p, a)) / (alpha - 1);
}

/// min over α in [3, alpha_max] of T·ε'(α) + ln(1/δ)/(α-1).
inline double total(double T, double delta, int alpha_max, double p, double a) {
  Dec best = std::numeric_limits<double>::infinity();
  for (int alpha = 3; alpha <= alpha_max; ++alpha) {
    const Dec v = Dec(T) * eps_prime(alpha, p, a) + log(1 / Dec(delta)) / (alpha - 1);
    if (v < best) best = v;
  }
  return best.convert_to<double>();
}

/// ε(1) for the mixed feature/label release.
inline double rate(int l, double c, double tau) { return (2 * c * c + 1) / (double(l) * l * tau * tau); }

}  // namespace oracle
