#pragma once

// Rate matrices, information matrices and the tail weights psi used in the
// asymptotic expansions of the density.

#include <Eigen/Dense>
#include <array>

#include "levylan/convolution.hpp"
#include "levylan/simulate.hpp"

namespace levylan {

/// psi^(p)(y): 1 on |y| <= 1, (ln|y|)^p/|y|^(alpha+1) on |y| >= 3, and a
/// quintic Hermite bridge on (1, 3) matching value and two derivatives.
double psi(AlphaIndex alpha, int p, double y);

/// int_{|z|>1} D^k(phi)(y - z) psi^(l)(z) dz.
double I_cal(AlphaIndex alpha, int k, int l, double y);

/// int_{|y|>z} psi^(p)(y) dy for z >= 3, p <= 2.
double Psi_closed(AlphaIndex alpha, int p, double z);

/// Smallest n accepted by the rate machinery.
inline constexpr long kMinRateN = 16;

/// u_n(theta) = diag(n^-1/2, (ln n/n)^(alpha/4) v_n) with
/// v_n = [[1, -delta/(2 alpha) (ln n - ln ln n)], [0, 1]].
struct RateMatrix {
  long n;
  Theta theta;
  Eigen::Matrix3d M;

  Eigen::Matrix3d inverse() const;
  Eigen::Matrix3d transpose() const { return M.transpose(); }
};

/// Throws RateDegenerate for n < 16.
RateMatrix rate_matrix(const Theta& theta, long n);

struct InfoMatrix {
  enum class Kind { levy, sde, diagonal_singular };
  Eigen::Matrix3d M;
  Kind kind;
};

/// kappa_0 = 2 c_alpha/(alpha (2-alpha)^(alpha/2)) r^alpha and
/// kappa_1 = ln r + c_alpha'/c_alpha - ln(2-alpha)/2 - 1/alpha, with
/// r = delta/sigma (or delta c(x)/a(x, sigma) for the SDE).
double kappa0(AlphaIndex alpha, double ratio);
double kappa1(AlphaIndex alpha, double ratio);

InfoMatrix info_levy(const Theta& theta);

/// Riemann sums over X_{i/n}, i < n, of the SDE information entries.
InfoMatrix info_sde(const Theta& theta, const PathSample& path, const SdeModel& model);

/// Diagonal-rate information of (delta, alpha): kappa_0 times
/// [[alpha^2/delta^2, alpha/(2 delta)], [alpha/(2 delta), 1/4]], placed in the
/// lower block; the sigma entry is 2/sigma^2.
InfoMatrix info_diagonal_singular(double sigma, double delta, AlphaIndex alpha);

/// int h^2/f, int h l/f, int l^2/f at w_n(theta), each divided by its limit
/// alpha^2 k0/s_n, -alpha k0 k1/s_n, k0 (k1^2 + 1/alpha^2)/s_n with
/// s_n = n^(1-alpha/2) ln(n)^(alpha/2).
struct ToutCheck {
  std::array<double, 3> integral;
  std::array<double, 3> limit;
  std::array<double, 3> ratio;
};
ToutCheck prop_tout_check(const Theta& theta, long n);

}  // namespace levylan
