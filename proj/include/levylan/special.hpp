#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "levylan/taylor.hpp"

namespace levylan {

/// Digamma function psi(x) for x > 0.
double digamma(double x);

/// Polygamma psi^(n)(x), n >= 0, x > 0 (n = 0 is digamma).
double polygamma(int n, double x);

/// ln Gamma on Taylor series; derivatives come from polygamma.
template <int N>
Taylor<N> lgamma(const Taylor<N>& a) {
  std::array<double, N + 1> d{};
  d[0] = std::lgamma(a.value());
  for (int j = 1; j <= N; ++j) d[static_cast<std::size_t>(j)] = polygamma(j - 1, a.value());
  return compose<N>(d, a);
}

inline double lgamma(double x) { return std::lgamma(x); }

/// Standard normal density.
inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Inverse of the standard normal CDF (Acklam's rational approximation
/// refined by one Halley step; accurate to ~1e-15).
double normal_quantile(double p);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

}  // namespace levylan
