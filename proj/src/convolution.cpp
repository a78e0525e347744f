#include "levylan/convolution.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <list>
#include <map>
#include <mutex>

#include "levylan/quadrature.hpp"

namespace levylan {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUMax = 10.5;     // e^{-u^2/2} u^4 < 1e-20 beyond
constexpr double kGaussCut = 10.0;  // Gauss-Hermite nodes kept on |x| <= 10

// Probabilists' Gauss-Hermite rule (weight phi) by Golub-Welsch.
void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(double(i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.clear();
  w.clear();
  for (int i = 0; i < n; ++i) {
    const double xi = es.eigenvalues()[i];
    const double wi = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    if (std::abs(xi) <= kGaussCut) {
      x.push_back(xi);
      w.push_back(wi);
    }
  }
}

// Transform of D^k(phi): A_0 = e^{-u^2/2}, A_1 = u^2 e^{-u^2/2}, A_2 = (u^4 - 2u^2) e^{-u^2/2}.
double gauss_hat(int k, double u) {
  const double e = std::exp(-0.5 * u * u), u2 = u * u;
  switch (k) {
    case 0: return e;
    case 1: return u2 * e;
    default: return (u2 * u2 - 2.0 * u2) * e;
  }
}

// Transforms of D^l d^m phi_alpha at frequency v (l + m <= 2); the (0,0)
// entry has 1 subtracted (the Gaussian part is added back in closed form).
std::array<std::array<double, 3>, 3> stable_hat(double alpha, double v) {
  std::array<std::array<double, 3>, 3> b{};
  if (v <= 0.0) return b;
  const Taylor<2> a = Taylor<2>::variable(alpha);
  const Taylor<2> t = exp(a * std::log(v));
  const Taylor<2> e = exp(-t);
  const Taylor<2> g1 = a * t * e;
  const Taylor<2> g2 = a * a * (t * t - t) * e;
  b[0][0] = std::expm1(-t.value());
  b[0][1] = e.derivative(1);
  b[0][2] = e.derivative(2);
  b[1][0] = g1.value();
  b[1][1] = g1.derivative(1);
  b[2][0] = g2.value();
  return b;
}

}  // namespace

double w_value(double sigma, double delta, double alpha, long n) {
  return std::pow(double(n), 0.5 - 1.0 / alpha) * delta / sigma;
}

double w_value(const Theta& theta, long n) { return w_value(theta.sigma, theta.delta, theta.alpha, n); }

WArg w_n(const Theta& theta, long n) {
  if (n < 2) throw DomainError("w_n: n must be at least 2");
  const double w = w_value(theta, n);
  if (w > 1.0 / 3.0) throw OutOfRegime(w);
  return {w, n, theta};
}

std::array<double, 3> gaussian_D(int k, double y) {
  const double y2 = y * y;
  double p, dp, ddp;
  switch (k) {
    case 0: p = 1.0, dp = 0.0, ddp = 0.0; break;
    case 1: p = 1.0 - y2, dp = -2.0 * y, ddp = -2.0; break;
    case 2: p = 1.0 - 4.0 * y2 + y2 * y2, dp = -8.0 * y + 4.0 * y * y2, ddp = -8.0 + 12.0 * y2; break;
    default: throw DomainError("gaussian_D: k must be 0, 1 or 2");
  }
  const double ph = normal_pdf(y);
  return {p * ph, (dp - y * p) * ph, (ddp - 2.0 * y * dp - p + y2 * p) * ph};
}

// ---------------------------------------------------------------------------

ConvolutionKernel::ConvolutionKernel(double alpha, double w) : alpha_(alpha), w_(w) {
  AlphaIndex{alpha};
  if (!(w > 0.0)) throw DomainError("ConvolutionKernel: w must be positive");
  tail_ = stable_tail(alpha);
  y_split_ = std::max(25.0, kGaussCut + 1.0 + w * tail_->switch_point());

  // u-grid: geometric panels toward 0 (integrands behave like u^alpha ln^m u
  // there), then panels short enough to resolve cos(y u) for |y| <= y_split.
  // For large w the stable factor exp(-(w u)^alpha) cuts the integrand off
  // at u_cut < kUMax; the Gaussian is then kept inside the transform.
  const double u_cut = std::pow(50.0, 1.0 / alpha) / w;
  wide_ = u_cut < kUMax;
  const double u_end = wide_ ? u_cut : kUMax;
  const double width = std::min(0.5, 4.0 / y_split_);
  std::vector<double> br{0.0};
  double u0 = 0.5;
  if (wide_) {
    u0 = u_end;
    while (u0 > width) u0 *= 0.5;
  }
  for (int j = -34; j <= -1; ++j) br.push_back(std::ldexp(u0, j + 1));
  const int panels = static_cast<int>(std::ceil((u_end - u0) / width));
  for (int j = 1; j <= panels; ++j) br.push_back(u0 + (u_end - u0) * j / panels);
  const CompositeRule rule(br, 16);
  const auto nu = static_cast<Eigen::Index>(rule.x.size());
  u_.resize(nu);
  coef_.resize(kNumFn, nu);
  for (Eigen::Index j = 0; j < nu; ++j) {
    const double u = rule.x[static_cast<std::size_t>(j)];
    u_[j] = u;
    auto b = stable_hat(alpha, w * u);
    if (wide_) b[0][0] += 1.0;
    const double wt = rule.w[static_cast<std::size_t>(j)] / kPi;
    for (int i = 0; i < kNumFn; ++i) {
      const auto& klm = kKlm[static_cast<std::size_t>(i)];
      coef_(i, j) = wt * gauss_hat(klm[0], u) * b[klm[1]][klm[2]];
    }
  }
  gauss_hermite(48, gh_x_, gh_w_);
}

ConvolutionKernel::Values ConvolutionKernel::eval(double y) const {
  const double ay = std::abs(y);
  Values r = ay < y_split_ ? eval_fourier(ay) : eval_tail(ay);
  if (y < 0.0)
    for (auto& d : r.d1) d = -d;
  return r;
}

ConvolutionKernel::Values ConvolutionKernel::eval_fourier(double y) const {
  const Eigen::ArrayXd yu = (y * u_).array();
  const Eigen::VectorXd c = yu.cos().matrix();
  const Eigen::VectorXd s = yu.sin().matrix();
  const Eigen::Matrix<double, kNumFn, 1> v = coef_ * c;
  const Eigen::Matrix<double, kNumFn, 1> d1 = -(coef_ * (u_.array() * s.array()).matrix());
  const Eigen::Matrix<double, kNumFn, 1> d2 = -(coef_ * (u_.array().square() * c.array()).matrix());
  Values r;
  for (int i = 0; i < kNumFn; ++i) {
    r.v[i] = v[i];
    r.d1[i] = d1[i];
    r.d2[i] = d2[i];
  }
  for (int k = 0; k < 3 && !wide_; ++k) {
    const int i = k == 0 ? F000 : (k == 1 ? F100 : F200);
    const auto g = gaussian_D(k, y);
    r.v[i] += g[0];
    r.d1[i] += g[1];
    r.d2[i] += g[2];
  }
  return r;
}

ConvolutionKernel::Values ConvolutionKernel::eval_tail(double y) const {
  Values r;
  const double iw = 1.0 / w_;
  for (std::size_t j = 0; j < gh_x_.size(); ++j) {
    const double x = gh_x_[j];
    const auto b = tail_->eval((y - x) * iw);
    const double x2 = x * x;
    const double pk[3] = {1.0, 1.0 - x2, 1.0 - 4.0 * x2 + x2 * x2};
    for (int i = 0; i < kNumFn; ++i) {
      const auto& klm = kKlm[static_cast<std::size_t>(i)];
      const double c = gh_w_[j] * pk[klm[0]] * iw;
      r.v[i] += c * b.v[klm[1]][klm[2]][0];
      r.d1[i] += c * iw * b.v[klm[1]][klm[2]][1];
      r.d2[i] += c * iw * iw * b.v[klm[1]][klm[2]][2];
    }
  }
  return r;
}

KernelPoint to_point(const ConvolutionKernel::Values& v) {
  if (!(v.v[F000] > 0.0)) throw NonConvergedQuadrature("convolution density not positive", v.v[F000]);
  KernelPoint q;
  q.logf = std::log(v.v[F000]);
  for (int i = 0; i < kNumFn; ++i) q.ratio[i] = v.v[i] / v.v[F000];
  return q;
}

// ---------------------------------------------------------------------------

ConvolutionTable::ConvolutionTable(double alpha, double w, double y_max) : kernel_(alpha, w) {
  s_mid_ = 4.0;
  h1_ = 0.01;
  n1_ = static_cast<int>(std::lround(s_mid_ / h1_));
  s_max_ = std::max(s_mid_ + 0.1, std::asinh(y_max));
  const int n2 = static_cast<int>(std::ceil((s_max_ - s_mid_) / 0.05));
  h2_ = (s_max_ - s_mid_) / n2;
  nodes_.resize(static_cast<std::size_t>(n1_ + n2 + 1));
  for (int j = 0; j <= n1_ + n2; ++j) {
    const double s = j <= n1_ ? j * h1_ : s_mid_ + (j - n1_) * h2_;
    const double y = std::sinh(s), ch = std::cosh(s);
    const auto v = kernel_.eval(y);
    const double f = v.v[F000];
    if (!(f > 0.0)) throw NonConvergedQuadrature("convolution table: non-positive density", f);
    const double g1 = v.d1[F000] / f, g2 = v.d2[F000] / f;
    auto& row = nodes_[static_cast<std::size_t>(j)];
    // channel 0: ln f
    row[0] = std::log(f);
    row[1] = g1 * ch;
    row[2] = (g2 - g1 * g1) * ch * ch + g1 * y;
    for (int i = 1; i < kNumFn; ++i) {
      const double r = v.v[i] / f;
      const double ry = (v.d1[i] - r * v.d1[F000]) / f;
      const double ryy = (v.d2[i] - 2.0 * ry * v.d1[F000] - r * v.d2[F000]) / f;
      row[3 * i] = r;
      row[3 * i + 1] = ry * ch;
      row[3 * i + 2] = ryy * ch * ch + ry * y;
    }
  }
}

KernelPoint ConvolutionTable::operator()(double y) const {
  const double s = std::asinh(std::abs(y));
  if (s >= s_max_) return to_point(kernel_.eval(y));
  int j;
  double h, t;
  if (s < s_mid_) {
    j = std::min(static_cast<int>(s / h1_), n1_ - 1);
    h = h1_;
    t = (s - j * h1_) / h1_;
  } else {
    const int i = std::min(static_cast<int>((s - s_mid_) / h2_), static_cast<int>(nodes_.size()) - 2 - n1_);
    j = n1_ + i;
    h = h2_;
    t = (s - s_mid_ - i * h2_) / h2_;
  }
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double H1 = (t - 6 * t3 + 8 * t4 - 3 * t5) * h;
  const double H2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5) * h * h;
  const double H3 = 0.5 * (t3 - 2 * t4 + t5) * h * h;
  const double H4 = (-4 * t3 + 7 * t4 - 3 * t5) * h;
  const double H5 = 10 * t3 - 15 * t4 + 6 * t5;
  const auto& a = nodes_[static_cast<std::size_t>(j)];
  const auto& b = nodes_[static_cast<std::size_t>(j + 1)];
  KernelPoint q;
  auto interp = [&](int c) {
    return H0 * a[3 * c] + H1 * a[3 * c + 1] + H2 * a[3 * c + 2] + H3 * b[3 * c + 2] + H4 * b[3 * c + 1] +
           H5 * b[3 * c];
  };
  q.logf = interp(0);
  q.ratio[F000] = 1.0;
  for (int i = 1; i < kNumFn; ++i) q.ratio[i] = interp(i);
  return q;
}

// ---------------------------------------------------------------------------

ConvolutionSurface::ConvolutionSurface(double alpha, double w_min, double w_max, int nodes, double y_max)
    : alpha_(alpha), lo_(w_min), hi_(w_max) {
  if (!(w_min > 0.0) || !(w_max >= w_min)) throw DomainError("ConvolutionSurface: bad w range");
  if (w_max <= w_min * (1.0 + 1e-12)) nodes = 1;
  const double a = std::log(w_min), b = std::log(w_max);
  for (int j = 0; j < nodes; ++j) {
    const double c = nodes == 1 ? 0.0 : std::cos(kPi * j / (nodes - 1));
    x_.push_back(0.5 * (a + b) + 0.5 * (b - a) * c);
    double wt = (j % 2 == 0) ? 1.0 : -1.0;
    if (j == 0 || j == nodes - 1) wt *= 0.5;
    bw_.push_back(wt);
    tables_.push_back(std::make_unique<ConvolutionTable>(alpha, std::exp(x_.back()), y_max));
  }
}

KernelPoint ConvolutionSurface::operator()(double y, double w) const {
  if (tables_.size() == 1) return (*tables_[0])(y);
  const double x = std::log(w);
  const double span = x_.front() - x_.back();
  if (x > x_.front() + 0.05 * span || x < x_.back() - 0.05 * span)
    throw DomainError("ConvolutionSurface: w outside the tabulated range");
  KernelPoint q{};
  double den = 0.0;
  for (std::size_t j = 0; j < x_.size(); ++j) {
    const KernelPoint p = (*tables_[j])(y);
    const double d = x - x_[j];
    if (std::abs(d) < 1e-14) return p;
    const double c = bw_[j] / d;
    den += c;
    q.logf += c * p.logf;
    for (int i = 0; i < kNumFn; ++i) q.ratio[i] += c * p.ratio[i];
  }
  q.logf /= den;
  for (auto& r : q.ratio) r /= den;
  q.ratio[F000] = 1.0;
  return q;
}

// ---------------------------------------------------------------------------

std::shared_ptr<const ConvolutionTable> convolution_table(double alpha, double w) {
  using Key = std::pair<double, double>;
  static std::mutex mu;
  static std::list<std::pair<Key, std::shared_ptr<const ConvolutionTable>>> lru;
  const Key key{alpha, w};
  {
    std::lock_guard<std::mutex> lock(mu);
    for (auto it = lru.begin(); it != lru.end(); ++it)
      if (it->first == key) {
        lru.splice(lru.begin(), lru, it);
        return lru.front().second;
      }
  }
  auto t = std::make_shared<const ConvolutionTable>(alpha, w);
  std::lock_guard<std::mutex> lock(mu);
  lru.emplace_front(key, t);
  if (lru.size() > 32) lru.pop_back();
  return t;
}

namespace {

// Any (k, l, m) with k, l <= 2, m <= 3 by adaptive quadrature; used for
// combinations outside the ten tabulated ones.
double f_klm_generic(double alpha, int k, int l, int m, double y, double w) {
  const double ay = std::abs(y);
  auto tail = stable_tail(alpha);
  const double split = std::max(25.0, kGaussCut + 1.0 + w * tail->switch_point());
  if (ay >= split) {
    std::vector<double> gx, gw;
    gauss_hermite(48, gx, gw);
    double sum = 0.0;
    for (std::size_t j = 0; j < gx.size(); ++j) {
      const double x2 = gx[j] * gx[j];
      const double pk[3] = {1.0, 1.0 - x2, 1.0 - 4.0 * x2 + x2 * x2};
      sum += gw[j] * pk[k] * (*tail)((ay - gx[j]) / w, m, 0, l) / w;
    }
    return sum;
  }
  auto amp = [&](double u) {
    if (u <= 0.0) return 0.0;
    const Taylor<3> a = Taylor<3>::variable(alpha);
    const Taylor<3> t = exp(a * std::log(w * u));
    const Taylor<3> e = exp(-t);
    Taylor<3> g;
    switch (l) {
      case 0: g = e; break;
      case 1: g = a * t * e; break;
      default: g = a * a * (t * t - t) * e; break;
    }
    double b = g.derivative(m);
    if (l == 0 && m == 0) b = std::expm1(-t.value());
    return gauss_hat(k, u) * b * std::cos(ay * u) / kPi;
  };
  std::vector<double> br{0.0};
  for (int j = -34; j <= -1; ++j) br.push_back(std::ldexp(1.0, j));
  for (double b = 0.5 + 0.5; b < kUMax; b += 0.5) br.push_back(b);
  br.push_back(kUMax);
  QuadOptions opt;
  opt.abs_tol = 1e-17;
  opt.rel_tol = 1e-12;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) sum += integrate(amp, br[i], br[i + 1], opt);
  if (l == 0 && m == 0) sum += gaussian_D(k, ay)[0];
  return sum;
}

}  // namespace

double f_klm(AlphaIndex alpha, int k, int l, int m, double y, double w) {
  if (k < 0 || l < 0 || m < 0 || k > 2 || l > 2 || m > 2 || k + l + m > 4)
    throw DomainError("f_klm: orders out of range");
  if (!(w > 0.0)) throw DomainError("f_klm: w must be positive");
  for (int i = 0; i < kNumFn; ++i)
    if (kKlm[static_cast<std::size_t>(i)] == std::array<int, 3>{k, l, m})
      return ConvolutionKernel(alpha, w).eval(y).v[i];
  return f_klm_generic(alpha, k, l, m, y, w);
}

namespace {

KernelPoint point_at(double y, const Theta& theta, long n) {
  const double w = w_value(theta, n);
  auto table = convolution_table(theta.alpha, w);
  return (*table)(std::sqrt(double(n)) * y / theta.sigma);
}

}  // namespace

double log_p_density(double y, const Theta& theta, long n) {
  return 0.5 * std::log(double(n)) - std::log(theta.sigma) + point_at(y, theta, n).logf;
}

double p_density(double y, const Theta& theta, long n) { return std::exp(log_p_density(y, theta, n)); }

double l_func(double y, const Theta& theta, long n) {
  if (n < 3) throw DomainError("l_func: n must be at least 3");
  const double ln = std::log(double(n)), a = theta.alpha;
  const double w = w_value(theta, n);
  const ConvolutionKernel kern(a, w);
  const auto v = kern.eval(std::sqrt(double(n)) * y / theta.sigma);
  return ((ln - std::log(ln)) / (2.0 * a) - ln / (a * a)) * v.v[F010] + v.v[F001];
}

LogDensityDerivs log_density_derivs(const KernelPoint& q, const Theta& theta, long n, bool hessian) {
  const double s = theta.sigma, d = theta.delta, a = theta.alpha;
  const double ln = std::log(double(n));
  const double lam = ln / (a * a);
  const auto& R = q.ratio;
  LogDensityDerivs out;
  out.logp = 0.5 * ln - std::log(s) + q.logf;
  out.grad = {-R[F100] / s, -R[F010] / d, R[F001] - lam * R[F010]};
  if (!hessian) return out;
  Eigen::Matrix3d P;
  P(0, 0) = (R[F100] + R[F200]) / (s * s);
  P(0, 1) = R[F110] / (s * d);
  P(0, 2) = -(R[F101] - lam * R[F110]) / s;
  P(1, 1) = (R[F010] + R[F020]) / (d * d);
  P(1, 2) = -(R[F011] - lam * R[F020]) / d;
  P(2, 2) = R[F002] - 2.0 * lam * R[F011] + lam * lam * R[F020] + 2.0 * ln / (a * a * a) * R[F010];
  P(1, 0) = P(0, 1);
  P(2, 0) = P(0, 2);
  P(2, 1) = P(1, 2);
  out.hess = P - out.grad * out.grad.transpose();
  return out;
}

Eigen::Vector3d grad_log_p(double y, const Theta& theta, long n) {
  return log_density_derivs(point_at(y, theta, n), theta, n, false).grad;
}

Eigen::Matrix3d hess_log_p(double y, const Theta& theta, long n) {
  return log_density_derivs(point_at(y, theta, n), theta, n, true).hess;
}

}  // namespace levylan
