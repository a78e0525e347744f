#pragma once

// Symmetric alpha-stable density phi_alpha with characteristic function
// exp(-|u|^alpha): values, z-derivatives, alpha-derivatives and iterates of
// the operator D(f)(z) = f(z) + z f'(z).

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "levylan/errors.hpp"
#include "levylan/special.hpp"
#include "levylan/taylor.hpp"

namespace levylan {

inline constexpr double kAlphaMin = 0.05;
inline constexpr double kAlphaMax = 1.95;

/// Jump activity index restricted to the working compact [0.05, 1.95].
class AlphaIndex {
 public:
  explicit AlphaIndex(double alpha) : alpha_(alpha) {
    if (!(alpha >= kAlphaMin && alpha <= kAlphaMax))
      throw DomainError("alpha = " + std::to_string(alpha) + " outside [0.05, 1.95]");
  }
  double value() const { return alpha_; }
  operator double() const { return alpha_; }  // NOLINT

 private:
  double alpha_;
};

/// c_alpha = Gamma(1+alpha) sin(pi alpha/2)/pi, the tail constant of phi_alpha.
/// This reflection form equals -alpha(alpha-1)/(2 Gamma(2-alpha) cos(pi alpha/2))
/// and has no removable singularity at alpha = 1, so it is the one used on
/// Taylor arguments.
template <int N>
Taylor<N> c_alpha(const Taylor<N>& a) {
  return exp(lgamma(1.0 + a)) * sin(a * (0.5 * std::numbers::pi)) / std::numbers::pi;
}

double c_alpha(AlphaIndex alpha);
double d_alpha_c_alpha(AlphaIndex alpha);

/// Asymptotic (Bergstrom) expansion of phi_alpha for large |z|:
///   phi_alpha(z) = (1/pi) sum_k (-1)^(k+1) Gamma(alpha k + 1)/k! sin(pi alpha k/2) |z|^(-alpha k - 1).
/// Convergent for alpha < 1, asymptotic for alpha > 1 (summed up to the
/// smallest term). Coefficients are stored as alpha-jets of order 3.
class StableTail {
 public:
  static constexpr int kMaxTerms = 400;

  explicit StableTail(double alpha);

  double alpha() const { return alpha_; }

  /// All of d^s/dz^s D^l d^m/dalpha^m phi_alpha(z), l <= 2, m <= 3, s <= 3, z > 0.
  struct Block {
    double v[3][4][4];  // [l][m][s]
    double err;         // truncation plus rounding estimate, scaled for derivatives
  };
  Block eval(double z) const;

  /// Single entry, convenience wrapper around eval().
  double operator()(double z, int m, int s = 0, int l = 0) const;

  /// Mass of the tail beyond z: 2 int_z^inf phi_alpha (both sides).
  double two_sided_mass(double z) const;

  /// Smallest z (on a fine geometric scan) from which the truncated series
  /// is accurate to relative `rel` for every derivative column.
  double switch_point() const { return switch_; }

  /// Scan used to set switch_point().
  double find_switch(double rel) const;

 private:
  double alpha_;
  std::vector<Taylor<3>> logmag_;  // ln(Gamma(alpha k+1)/k!/pi)
  std::vector<Taylor<3>> trig_;    // (-1)^(k+1) sin(pi alpha k/2)
  double switch_ = 0.0;
};

/// Shared tail objects, cached per alpha value.
std::shared_ptr<const StableTail> stable_tail(double alpha);

/// z_switch for alpha: beyond it every evaluation uses the tail expansion.
double tail_switch(double alpha);

/// d^m/dalpha^m d^s/dz^s phi_alpha(z); m <= 3, s <= 3.
double stable_pdf(AlphaIndex alpha, double z, int m = 0, int s = 0);

/// D^(k)(d^m/dalpha^m phi_alpha)(z) expanded as sum_j a_{k,j} z^j f^(j);
/// k <= 2, m <= 3.
double D_iterate(AlphaIndex alpha, double z, int k, int m);

/// Same quantity computed on the Fourier side: the transform of
/// D^l d^m phi_alpha is d^m/dalpha^m G_l(|u|^alpha), with
/// G_0 = e^-t, G_1 = alpha t e^-t, G_2 = alpha^2 (t^2 - t) e^-t.
/// s adds z-derivatives. Used as an independent cross-check.
double stable_D_fourier(AlphaIndex alpha, double z, int l, int m, int s = 0);

/// Coefficients a_{k,j} with D^k f = sum_j a_{k,j} z^j f^(j).
std::vector<double> D_coefficients(int k);

/// Precomputed phi_alpha with cubic Hermite interpolation.
class StableTable {
 public:
  double alpha() const { return alpha_; }
  double z_max() const { return z_max_; }
  double z_switch() const { return z_switch_; }
  const std::vector<double>& grid() const { return grid_; }
  /// Tail constants (c_alpha, d c_alpha / d alpha).
  std::array<double, 2> tail_coeffs() const { return {c_, dc_}; }

  /// Interpolated d^m/dalpha^m d^s/dz^s phi_alpha(z); (m <= 3, s <= 1) or (m = 0, s = 2).
  double operator()(double z, int m = 0, int s = 0) const;

  /// Raw node value of column (m, s) at grid index i.
  double node(std::size_t i, int m, int s) const;

  /// Integral of phi_alpha over the real line: Hermite quadrature on the
  /// grid plus the analytic tail mass beyond Z_max.
  double mass() const;

  friend StableTable build_stable_table(AlphaIndex alpha, double z_max, int grid_size);

 private:
  static int column(int m, int s);
  double alpha_ = 1.0, z_max_ = 0.0, z_switch_ = 0.0, c_ = 0.0, dc_ = 0.0;
  std::vector<double> grid_;
  // Columns: (m, s) for m = 0..3, s = 0..2 at index 3m+s, then (0, 3) as
  // the Hermite slope of the (0, 2) column.
  std::vector<std::array<double, 13>> values_;
  std::shared_ptr<const StableTail> tail_;
};

StableTable build_stable_table(AlphaIndex alpha, double z_max = 50.0, int grid_size = 400);

}  // namespace levylan
