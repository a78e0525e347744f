#include "levylan/asymptotics.hpp"

#include <cmath>

#include "levylan/quadrature.hpp"

namespace levylan {

// ---------------------------------------------------------------------------
// psi and its integrals

namespace {

// (ln y)^p y^-(alpha+1) and its first two derivatives, y >= 3.
std::array<double, 3> tail_weight(double alpha, int p, double y) {
  const double L = std::log(y);
  auto lp = [&](int q) { return q < 0 ? 0.0 : std::pow(L, q); };
  const double u = lp(p);
  const double u1 = p * lp(p - 1) / y;
  const double u2 = (p * (p - 1) * lp(p - 2) - p * lp(p - 1)) / (y * y);
  const double v = std::pow(y, -alpha - 1.0);
  const double v1 = -(alpha + 1.0) * v / y;
  const double v2 = (alpha + 1.0) * (alpha + 2.0) * v / (y * y);
  return {u * v, u1 * v + u * v1, u2 * v + 2.0 * u1 * v1 + u * v2};
}

}  // namespace

double psi(AlphaIndex alpha, int p, double y) {
  if (p < 0 || p > 3) throw DomainError("psi: p must be in 0..3");
  const double ay = std::abs(y);
  if (ay <= 1.0) return 1.0;
  if (ay >= 3.0) return tail_weight(alpha, p, ay)[0];
  // quintic Hermite on [1, 3], h = 2: value 1 and flat at 1, tail jet at 3
  const auto g = tail_weight(alpha, p, 3.0);
  const double h = 2.0, t = (ay - 1.0) / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double H0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
  const double H3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
  const double H4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
  const double H5 = 0.5 * (t3 - 2.0 * t4 + t5);
  return H0 + g[0] * H3 + h * g[1] * H4 + h * h * g[2] * H5;
}

double I_cal(AlphaIndex alpha, int k, int l, double y) {
  if (k < 0 || k > 2 || l < 0 || l > 3) throw DomainError("I_cal: orders out of range");
  const double ay = std::abs(y);
  auto f = [&](double z) {
    return (gaussian_D(k, ay - z)[0] + gaussian_D(k, ay + z)[0]) * psi(alpha, l, z);
  };
  QuadOptions opt;
  opt.abs_tol = 1e-300;
  opt.rel_tol = 1e-12;
  // Beyond |z - |y|| = 14 the Gaussian factor is below 1e-42.
  std::vector<double> br{1.0, 3.0};
  const double lo = std::max(3.0, ay - 14.0), hi = ay + 14.0;
  if (lo > 3.0) br.push_back(lo);
  if (ay > lo && ay < hi) br.push_back(ay);
  if (hi > 3.0) br.push_back(hi);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    if (br[i] == 3.0 && br[i + 1] == lo && lo > 3.0) continue;  // Gaussian-negligible gap
    sum += integrate(f, br[i], br[i + 1], opt);
  }
  return sum;
}

double Psi_closed(AlphaIndex alpha, int p, double z) {
  if (!(z >= 3.0)) throw DomainError("Psi_closed: z must be at least 3");
  const double a = alpha, L = std::log(z), base = 1.0 / (a * std::pow(z, a));
  switch (p) {
    case 0: return 2.0 * base;
    case 1: return (2.0 * L + 2.0 / a) * base;
    case 2: return (2.0 * L * L + 4.0 * L / a + 4.0 / (a * a)) * base;
    default: throw DomainError("Psi_closed: p must be in 0..2");
  }
}

// ---------------------------------------------------------------------------
// Rate and information matrices

RateMatrix rate_matrix(const Theta& theta, long n) {
  if (n < kMinRateN) throw RateDegenerate("rate matrix needs n >= 16 (ln ln n > 0)");
  const double ln = std::log(double(n));
  const double a = theta.alpha;
  const double r = std::pow(ln / double(n), a / 4.0);
  const double v12 = -theta.delta / (2.0 * a) * (ln - std::log(ln));
  RateMatrix u{n, theta, Eigen::Matrix3d::Zero()};
  u.M(0, 0) = 1.0 / std::sqrt(double(n));
  u.M(1, 1) = r;
  u.M(1, 2) = r * v12;
  u.M(2, 2) = r;
  return u;
}

Eigen::Matrix3d RateMatrix::inverse() const {
  Eigen::Matrix3d inv = Eigen::Matrix3d::Zero();
  inv(0, 0) = 1.0 / M(0, 0);
  inv(1, 1) = 1.0 / M(1, 1);
  inv(2, 2) = 1.0 / M(2, 2);
  inv(1, 2) = -M(1, 2) / (M(1, 1) * M(2, 2));
  return inv;
}

double kappa0(AlphaIndex alpha, double ratio) {
  const double a = alpha;
  return 2.0 * c_alpha(alpha) / (a * std::pow(2.0 - a, a / 2.0)) * std::pow(ratio, a);
}

double kappa1(AlphaIndex alpha, double ratio) {
  const double a = alpha;
  return std::log(ratio) + d_alpha_c_alpha(alpha) / c_alpha(alpha) - 0.5 * std::log(2.0 - a) - 1.0 / a;
}

namespace {

Eigen::Matrix3d jump_info(double sigma_entry, double delta, double alpha, double k0, double k0k1,
                          double k0k1sq) {
  Eigen::Matrix3d I = Eigen::Matrix3d::Zero();
  I(0, 0) = sigma_entry;
  I(1, 1) = alpha * alpha / (delta * delta) * k0;
  I(1, 2) = I(2, 1) = alpha / delta * k0k1;
  I(2, 2) = k0k1sq + k0 / (alpha * alpha);
  return I;
}

}  // namespace

InfoMatrix info_levy(const Theta& theta) {
  const AlphaIndex a(theta.alpha);
  const double r = theta.delta / theta.sigma;
  const double k0 = kappa0(a, r), k1 = kappa1(a, r);
  return {jump_info(2.0 / (theta.sigma * theta.sigma), theta.delta, a, k0, k0 * k1, k0 * k1 * k1),
          InfoMatrix::Kind::levy};
}

InfoMatrix info_sde(const Theta& theta, const PathSample& path, const SdeModel& model) {
  if (path.n < 1 || path.values.size() < static_cast<std::size_t>(path.n))
    throw DomainError("info_sde: path has no observations");
  const AlphaIndex a(theta.alpha);
  double s11 = 0.0, k0 = 0.0, k0k1 = 0.0, k0k1sq = 0.0;
  for (long i = 0; i < path.n; ++i) {
    const double x = path.values[static_cast<std::size_t>(i)];
    model.check(x, theta.sigma);
    const double ax = model.a(x, theta.sigma);
    const double q = model.a_sigma(x, theta.sigma) / ax;
    s11 += q * q;
    const double r = theta.delta * model.c(x) / ax;
    const double e0 = kappa0(a, r), e1 = kappa1(a, r);
    k0 += e0;
    k0k1 += e0 * e1;
    k0k1sq += e0 * e1 * e1;
  }
  const double inv = 1.0 / double(path.n);
  return {jump_info(2.0 * s11 * inv, theta.delta, a, k0 * inv, k0k1 * inv, k0k1sq * inv),
          InfoMatrix::Kind::sde};
}

InfoMatrix info_diagonal_singular(double sigma, double delta, AlphaIndex alpha) {
  if (!(sigma > 0.0) || !(delta > 0.0)) throw DomainError("sigma and delta must be positive");
  const double a = alpha;
  const double k0 = kappa0(alpha, delta / sigma);
  Eigen::Matrix3d I = Eigen::Matrix3d::Zero();
  I(0, 0) = 2.0 / (sigma * sigma);
  I(1, 1) = k0 * a * a / (delta * delta);
  I(1, 2) = I(2, 1) = k0 * a / (2.0 * delta);
  I(2, 2) = k0 / 4.0;
  return {I, InfoMatrix::Kind::diagonal_singular};
}

// ---------------------------------------------------------------------------

ToutCheck prop_tout_check(const Theta& theta, long n) {
  if (n < kMinRateN) throw RateDegenerate("prop_tout_check needs n >= 16");
  const WArg wa = w_n(theta, n);
  const double a = theta.alpha, ln = std::log(double(n));
  const double A = (ln - std::log(ln)) / (2.0 * a) - ln / (a * a);
  const ConvolutionKernel kern(a, wa.w);

  // In s = asinh(y): dy = cosh(s) ds, both half-lines by evenness.
  auto integrand = [&](double s) {
    const double y = std::sinh(s);
    const auto v = kern.eval(y).v;
    const double f = v[F000], h = v[F010], l = A * v[F010] + v[F001];
    const double jac = 2.0 * std::cosh(s) / f;
    return Eigen::Array3d(h * h * jac, h * l * jac, l * l * jac);
  };
  QuadOptions opt;
  opt.abs_tol = 1e-300;
  opt.rel_tol = 1e-10;
  const double s_end = std::asinh(1e14);
  Eigen::Array3d total = Eigen::Array3d::Zero();
  for (double s0 = 0.0; s0 < s_end; s0 += 0.5) total += integrate(integrand, s0, std::min(s_end, s0 + 0.5), opt);

  const AlphaIndex ai(a);
  const double r = theta.delta / theta.sigma;
  const double k0 = kappa0(ai, r), k1 = kappa1(ai, r);
  const double sn = std::pow(double(n), 1.0 - a / 2.0) * std::pow(ln, a / 2.0);
  ToutCheck out;
  out.limit = {a * a * k0 / sn, -a * k0 * k1 / sn, k0 * (k1 * k1 + 1.0 / (a * a)) / sn};
  for (int i = 0; i < 3; ++i) {
    out.integral[static_cast<std::size_t>(i)] = total[i];
    out.ratio[static_cast<std::size_t>(i)] = total[i] / out.limit[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace levylan
