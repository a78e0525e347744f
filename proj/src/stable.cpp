#include "levylan/stable.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include "levylan/quadrature.hpp"

namespace levylan {

namespace {

constexpr double kPi = std::numbers::pi;

// Beyond t = u^alpha = 75 the factor e^-t times any polynomial weight used
// here is below 1e-18.
double fourier_cutoff(double alpha) { return std::pow(75.0, 1.0 / alpha); }

// (1/pi) int_0^inf u^s cos(z u + s pi/2) amp(u) du, i.e. the s-th z-derivative
// of the cosine transform of amp. Few oscillations: panels split at powers of
// two and half periods. Many oscillations: half-period panel sums accelerated
// with Wynn's epsilon algorithm.
template <class Amp>
double cos_transform(double z, int s, Amp&& amp, double u_max) {
  const double shift = s * 0.5 * kPi;
  auto f = [&](double u) {
    double us = 1.0;
    for (int i = 0; i < s; ++i) us *= u;
    return us * std::cos(z * u + shift) * amp(u);
  };
  // Absolute tolerance tied to the local integrand size: rounding alone
  // leaves errors of order 1e-16 times int |f| and the GK21 error floor is
  // about 1e-14 times that.
  auto panel = [&](double a, double b) {
    QuadOptions opt;
    double e;
    const double l1 = gk21([&](double u) { return std::abs(f(u)); }, a, b, e);
    opt.abs_tol = 5e-14 * l1 + 1e-19;
    opt.rel_tol = 1e-13;
    opt.max_panels = 400;
    return integrate(f, a, b, opt);
  };

  const double half = z > 0.0 ? kPi / z : INFINITY;
  if (u_max / half <= 400.0) {
    std::vector<double> br{0.0};
    for (double b = 0.0625; b < u_max; b *= 2.0) br.push_back(b);
    if (z > 0.0)
      for (double b = half; b < u_max; b += half) br.push_back(b);
    br.push_back(u_max);
    std::sort(br.begin(), br.end());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i)
      if (br[i + 1] > br[i]) sum += panel(br[i], br[i + 1]);
    return sum / kPi;
  }

  WynnEpsilon wynn;
  double partial = 0.0;
  int settled = 0;
  double prev_err = INFINITY;
  // The first panel holds the non-oscillatory bulk when z is small; split it
  // at powers of two as above.
  {
    std::vector<double> br{0.0};
    for (double b = 0.0625; b < half; b *= 2.0) br.push_back(b);
    br.push_back(half);
    for (std::size_t i = 0; i + 1 < br.size(); ++i) partial += panel(br[i], br[i + 1]);
  }
  wynn.push(partial);
  for (int k = 1; k < 2000; ++k) {
    const double a = k * half;
    if (a >= u_max) return partial / kPi;
    partial += panel(a, a + half);
    const double lim = wynn.push(partial);
    const double tol = std::max(1e-17, 1e-13 * std::abs(lim));
    if (wynn.error() <= tol && prev_err <= tol) {
      if (++settled >= 2) return lim / kPi;
    } else {
      settled = 0;
    }
    prev_err = wynn.error();
  }
  throw NonConvergedQuadrature("stable Fourier inversion", wynn.error());
}

// d^m/dalpha^m exp(-u^alpha) = (ln u)^m q_m(t) e^-t with t = u^alpha.
double stable_amplitude(double u, double alpha, int m) {
  if (u <= 0.0) return m == 0 ? 1.0 : 0.0;
  const double lu = std::log(u);
  const double t = std::exp(alpha * lu);
  const double e = std::exp(-t);
  switch (m) {
    case 0: return e;
    case 1: return -lu * t * e;
    case 2: return lu * lu * (t * t - t) * e;
    case 3: return lu * lu * lu * (-t * t * t + 3.0 * t * t - t) * e;
    default: throw DomainError("alpha-derivative order above 3");
  }
}

double fourier_pdf(double alpha, double z, int m, int s) {
  return cos_transform(
      z, s, [&](double u) { return stable_amplitude(u, alpha, m); }, fourier_cutoff(alpha));
}

}  // namespace

double c_alpha(AlphaIndex alpha) {
  const double a = alpha;
  if (std::abs(a - 1.0) < 1e-4) return std::exp(std::lgamma(1.0 + a)) * std::sin(0.5 * kPi * a) / kPi;
  return -a * (a - 1.0) / (2.0 * std::tgamma(2.0 - a) * std::cos(0.5 * kPi * a));
}

double d_alpha_c_alpha(AlphaIndex alpha) {
  const double a = alpha;
  if (std::abs(a - 1.0) < 1e-4)
    return c_alpha(alpha) * (digamma(1.0 + a) + 0.5 * kPi / std::tan(0.5 * kPi * a));
  return c_alpha(alpha) *
         (1.0 / a + 1.0 / (a - 1.0) + digamma(2.0 - a) + 0.5 * kPi * std::tan(0.5 * kPi * a));
}

// ---------------------------------------------------------------------------
// Tail expansion

StableTail::StableTail(double alpha) : alpha_(alpha) {
  const Taylor<3> a = Taylor<3>::variable(alpha);
  logmag_.reserve(kMaxTerms + 1);
  trig_.reserve(kMaxTerms + 1);
  logmag_.emplace_back(0.0);
  trig_.emplace_back(0.0);
  for (int k = 1; k <= kMaxTerms; ++k) {
    logmag_.push_back(lgamma(a * double(k) + 1.0) - std::lgamma(k + 1.0) - std::log(kPi));
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    trig_.push_back(sin(a * (0.5 * kPi * k)) * sign);
  }
  switch_ = find_switch(1e-10);
}

StableTail::Block StableTail::eval(double z) const {
  Block b{};
  const double lnz = std::log(z);
  const Taylor<3> a = Taylor<3>::variable(alpha_);
  const double z1 = 1.0 / z;
  double prev_proxy = INFINITY, absum = 0.0, err = 0.0;
  int used = 0;
  for (int k = 1; k <= kMaxTerms; ++k) {
    const double proxy = std::exp(logmag_[k].value() - (alpha_ * k + 1.0) * lnz);
    if (alpha_ > 1.0 && k > 1 && proxy > prev_proxy) {
      err = prev_proxy;
      break;
    }
    const Taylor<3> negak = a * (-double(k));
    const Taylor<3> p = negak - 1.0;
    const Taylor<3> e = exp(logmag_[k] + p * lnz) * trig_[k];
    const Taylor<3> dl[3] = {Taylor<3>(1.0), negak, negak * negak};
    const Taylor<3> fs[4] = {Taylor<3>(1.0), p * z1, p * (p - 1.0) * (z1 * z1),
                             p * (p - 1.0) * (p - 2.0) * (z1 * z1 * z1)};
    for (int l = 0; l < 3; ++l) {
      const Taylor<3> el = e * dl[l];
      for (int s = 0; s < 4; ++s) {
        const Taylor<3> t = el * fs[s];
        for (int m = 0; m < 4; ++m) b.v[l][m][s] += t.derivative(m);
      }
    }
    absum += proxy * double(k) * k;
    used = k;
    prev_proxy = proxy;
    if (proxy < 1e-20 * std::abs(b.v[0][0][0]) && k >= 3) {
      err = proxy;
      break;
    }
    if (k == kMaxTerms) err = INFINITY;
  }
  // Derivative columns pick up factors up to k^2 (D^2) and |ln z|^3.
  const double lz3 = std::pow(1.0 + std::abs(lnz), 3);
  b.err = (err * double(used) * used + 4e-16 * absum) * lz3;
  return b;
}

double StableTail::operator()(double z, int m, int s, int l) const {
  return eval(z).v[l][m][s];
}

double StableTail::two_sided_mass(double z) const {
  const double lnz = std::log(z);
  double sum = 0.0, prev = INFINITY;
  for (int k = 1; k <= kMaxTerms; ++k) {
    const double mag = std::exp(logmag_[k].value() - alpha_ * k * lnz) / (alpha_ * k);
    if (alpha_ > 1.0 && k > 1 && mag > prev) break;
    sum += trig_[k].value() * mag;
    prev = mag;
    if (mag < 1e-20 * std::abs(sum)) break;
  }
  return 2.0 * sum;
}

double StableTail::find_switch(double rel) const {
  for (double z = 0.05; z < 2000.0; z *= 1.02) {
    const Block b = eval(z);
    if (b.v[0][0][0] > 0.0 && b.err <= rel * b.v[0][0][0]) return z;
  }
  return 2000.0;
}

std::shared_ptr<const StableTail> stable_tail(double alpha) {
  static std::mutex mu;
  static std::map<double, std::shared_ptr<const StableTail>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(alpha);
    if (it != cache.end()) return it->second;
  }
  auto t = std::make_shared<const StableTail>(alpha);
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 256) cache.clear();
  cache.emplace(alpha, t);
  return t;
}

double tail_switch(double alpha) { return stable_tail(alpha)->switch_point(); }

// ---------------------------------------------------------------------------

double stable_pdf(AlphaIndex alpha, double z, int m, int s) {
  if (m < 0 || m > 3 || s < 0 || s > 3) throw DomainError("stable_pdf: order out of range");
  const double sign = (z < 0.0 && s % 2 == 1) ? -1.0 : 1.0;
  const double az = std::abs(z);
  auto tail = stable_tail(alpha);
  if (az >= tail->switch_point()) return sign * (*tail)(az, m, s);
  return sign * fourier_pdf(alpha, az, m, s);
}

std::vector<double> D_coefficients(int k) {
  std::vector<double> a{1.0};
  for (int i = 0; i < k; ++i) {
    std::vector<double> b(a.size() + 1, 0.0);
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (j < a.size()) b[j] += (j + 1.0) * a[j];
      if (j > 0) b[j] += a[j - 1];
    }
    a = std::move(b);
  }
  return a;
}

double D_iterate(AlphaIndex alpha, double z, int k, int m) {
  if (k < 0 || k > 2) throw DomainError("D_iterate: k must be 0, 1 or 2");
  const auto a = D_coefficients(k);
  double sum = 0.0, zj = 1.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    sum += a[j] * zj * stable_pdf(alpha, z, m, static_cast<int>(j));
    zj *= z;
  }
  return sum;
}

double stable_D_fourier(AlphaIndex alpha, double z, int l, int m, int s) {
  if (l < 0 || l > 2 || m < 0 || m > 3) throw DomainError("stable_D_fourier: order out of range");
  auto amp = [&](double u) {
    if (u <= 0.0) return (l == 0 && m == 0) ? 1.0 : 0.0;
    const Taylor<3> a = Taylor<3>::variable(alpha);
    const Taylor<3> t = exp(a * std::log(u));
    const Taylor<3> e = exp(-t);
    Taylor<3> g;
    switch (l) {
      case 0: g = e; break;
      case 1: g = a * t * e; break;
      default: g = a * a * (t * t - t) * e; break;
    }
    return g.derivative(m);
  };
  const double sign = (z < 0.0 && s % 2 == 1) ? -1.0 : 1.0;
  return sign * cos_transform(std::abs(z), s, amp, fourier_cutoff(alpha));
}

}  // namespace levylan
