#pragma once

// Transition density of Y = sigma B + delta S^alpha over one step 1/n and the
// auxiliary functions
//   f^(k,l,m)(y, w) = int D^k(phi)(y - w z) D^l(d^m/dalpha^m phi_alpha)(z) dz.
//
// Evaluation goes through the Fourier side,
//   f^(k,l,m)(y, w) = (1/pi) int_0^inf cos(y u) A_k(u) B_{l,m}(w u) du,
// with A_k the transform of D^k(phi) and B_{l,m} that of D^l d^m phi_alpha.
// For |y| beyond the Gaussian range the integral is done in real space
// against the tail expansion of phi_alpha instead.

#include <Eigen/Core>
#include <array>
#include <memory>
#include <vector>

#include "levylan/stable.hpp"

namespace levylan {

/// Parameter triple (sigma, delta, alpha).
struct Theta {
  double sigma = 1.0, delta = 1.0, alpha = 1.0;

  Theta() = default;
  Theta(double s, double d, double a) : sigma(s), delta(d), alpha(a) {
    if (!(s > 0.0) || !(d > 0.0)) throw DomainError("Theta: sigma and delta must be positive");
    AlphaIndex{a};
  }
  Eigen::Vector3d vec() const { return {sigma, delta, alpha}; }
  static Theta from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

/// w_n(theta) = n^(1/2 - 1/alpha) delta / sigma inside the regime w <= 1/3.
struct WArg {
  double w;
  long n;
  Theta theta;
};

/// Exact w_n value, no regime check.
double w_value(const Theta& theta, long n);
double w_value(double sigma, double delta, double alpha, long n);

/// w_n with the regime check; throws OutOfRegime when w > 1/3.
WArg w_n(const Theta& theta, long n);

/// Index of the ten functions f^(k,l,m) used by the score and Hessian.
enum Fn : int { F000, F100, F010, F001, F200, F110, F101, F020, F011, F002, kNumFn };

inline constexpr std::array<std::array<int, 3>, kNumFn> kKlm = {{{0, 0, 0},
                                                                 {1, 0, 0},
                                                                 {0, 1, 0},
                                                                 {0, 0, 1},
                                                                 {2, 0, 0},
                                                                 {1, 1, 0},
                                                                 {1, 0, 1},
                                                                 {0, 2, 0},
                                                                 {0, 1, 1},
                                                                 {0, 0, 2}}};

/// D^k(phi)(y) = P_k(y) phi(y) for the standard normal phi, k <= 2, with
/// its first two y-derivatives.
std::array<double, 3> gaussian_D(int k, double y);

/// Direct evaluator of all ten f^(k,l,m)(Y, w) for fixed (alpha, w).
class ConvolutionKernel {
 public:
  struct Values {
    std::array<double, kNumFn> v{}, d1{}, d2{};  // value, d/dY, d^2/dY^2
  };

  ConvolutionKernel(double alpha, double w);

  double alpha() const { return alpha_; }
  double w() const { return w_; }
  /// |Y| from which the real-space route is used.
  double y_split() const { return y_split_; }

  Values eval(double y) const;

 private:
  Values eval_fourier(double y) const;
  Values eval_tail(double y) const;

  double alpha_, w_, y_split_;
  bool wide_ = false;  // u-grid cut at the stable decay, Gaussian not subtracted
  Eigen::VectorXd u_;
  Eigen::Matrix<double, kNumFn, Eigen::Dynamic> coef_;  // weight * A_k * B_lm / pi
  std::vector<double> gh_x_, gh_w_;
  std::shared_ptr<const StableTail> tail_;
};

/// ln f^(0,0,0) and the ratios f^(k,l,m)/f^(0,0,0) at one point.
struct KernelPoint {
  double logf;
  std::array<double, kNumFn> ratio;  // ratio[F000] == 1
};

KernelPoint to_point(const ConvolutionKernel::Values& v);

/// Quintic Hermite table of ln f and the ratios on s = asinh(|Y|) for fixed
/// (alpha, w). Step 0.01 for |Y| <= sinh(4) (Gaussian-to-tail transition),
/// 0.05 beyond, direct evaluation past y_max.
class ConvolutionTable {
 public:
  ConvolutionTable(double alpha, double w, double y_max = 1e6);

  double alpha() const { return kernel_.alpha(); }
  double w() const { return kernel_.w(); }
  const ConvolutionKernel& kernel() const { return kernel_; }

  KernelPoint operator()(double y) const;

 private:
  static constexpr int kCh = kNumFn;  // channel 0 = ln f, channels 1.. = ratios
  ConvolutionKernel kernel_;
  double s_mid_, s_max_, h1_, h2_;
  int n1_;
  // per node: value, d/ds, d^2/ds^2 of each channel
  std::vector<std::array<double, 3 * kCh>> nodes_;
};

/// Tables at Chebyshev nodes in ln w, for models where w varies per
/// observation (SDE quasi-likelihood). Queries interpolate barycentrically.
class ConvolutionSurface {
 public:
  ConvolutionSurface(double alpha, double w_min, double w_max, int nodes = 12, double y_max = 1e6);

  double alpha() const { return alpha_; }
  double w_min() const { return lo_; }
  double w_max() const { return hi_; }
  KernelPoint operator()(double y, double w) const;

 private:
  double alpha_, lo_, hi_;
  std::vector<double> x_;  // Chebyshev nodes in ln w
  std::vector<double> bw_;  // barycentric weights
  std::vector<std::unique_ptr<ConvolutionTable>> tables_;
};

/// Shared table cache keyed by (alpha, w).
std::shared_ptr<const ConvolutionTable> convolution_table(double alpha, double w);

/// f^(k,l,m)(y, w); k, l, m <= 2, k + l + m <= 4 (evaluated for the ten
/// combinations above plus any other through the kernel).
double f_klm(AlphaIndex alpha, int k, int l, int m, double y, double w);

/// p_{1/n}(y, theta) = (sqrt(n)/sigma) f_alpha(sqrt(n) y/sigma, w_n).
double p_density(double y, const Theta& theta, long n);
double log_p_density(double y, const Theta& theta, long n);

/// l = [(ln n - ln ln n)/(2 alpha) - ln n/alpha^2] h_alpha + k_alpha at
/// (sqrt(n) y/sigma, w_n); n >= 3.
double l_func(double y, const Theta& theta, long n);

/// ln p, its gradient and Hessian in theta from one kernel point.
struct LogDensityDerivs {
  double logp;
  Eigen::Vector3d grad;
  Eigen::Matrix3d hess;
};
LogDensityDerivs log_density_derivs(const KernelPoint& q, const Theta& theta, long n, bool hessian = true);

Eigen::Vector3d grad_log_p(double y, const Theta& theta, long n);
Eigen::Matrix3d hess_log_p(double y, const Theta& theta, long n);

}  // namespace levylan
