#include "levylan/simulate.hpp"

#include <cmath>
#include <numbers>

#include "levylan/quadrature.hpp"

namespace levylan {

namespace {
constexpr double kPi = std::numbers::pi;

double uniform_open(Rng& rng) {
  // (0, 1): 53 random bits, shifted off zero
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}
}  // namespace

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

PathSample PathSample::from_increments(std::vector<double> inc, double x0) {
  PathSample p;
  p.n = static_cast<long>(inc.size());
  p.values.resize(inc.size() + 1);
  p.values[0] = x0;
  for (std::size_t i = 0; i < inc.size(); ++i) p.values[i + 1] = p.values[i] + inc[i];
  // re-derived so that increments and values agree to the last bit
  for (std::size_t i = 0; i < inc.size(); ++i) inc[i] = p.values[i + 1] - p.values[i];
  p.increments = std::move(inc);
  return p;
}

void SdeModel::check(double x, double sigma) const {
  if (a(x, sigma) < a_lower(sigma))
    throw CoefficientBoundViolated("a(x, sigma) below its lower bound at x = " + std::to_string(x));
  if (c(x) < c_lower) throw CoefficientBoundViolated("c(x) below its lower bound at x = " + std::to_string(x));
}

SdeModel default_sde_model() {
  SdeModel m;
  m.a = [](double x, double s) { return s * (2.0 + std::cos(x)); };
  m.a_sigma = [](double x, double) { return 2.0 + std::cos(x); };
  m.a_sigma2 = [](double, double) { return 0.0; };
  m.a_x = [](double x, double s) { return -s * std::sin(x); };
  m.b = [](double x) { return -x; };
  m.c = [](double x) { return 2.0 + std::sin(x); };
  m.c_x = [](double x) { return std::cos(x); };
  m.a_lower = [](double s) { return s; };
  m.c_lower = 1.0;
  return m;
}

SdeModel constant_sde_model() {
  SdeModel m;
  m.a = [](double, double s) { return s; };
  m.a_sigma = [](double, double) { return 1.0; };
  m.a_sigma2 = [](double, double) { return 0.0; };
  m.a_x = [](double, double) { return 0.0; };
  m.b = [](double) { return 0.0; };
  m.c = [](double) { return 1.0; };
  m.c_x = [](double) { return 0.0; };
  m.a_lower = [](double s) { return s; };
  m.c_lower = 1.0;
  return m;
}

double TemperingSpec::operator()(double z) const {
  const double az = std::abs(z);
  if (az > eta) return 0.0;
  return lambda > 0.0 ? std::exp(-lambda * az) : 1.0;
}

TemperingSpec TemperingSpec::truncation(double eta) {
  if (!(eta > 0.0)) throw DomainError("truncation radius must be positive");
  return {0.0, eta, 1.0, 0.0};
}

TemperingSpec TemperingSpec::exponential(double lambda, double eta) {
  if (!(lambda >= 0.0) || !(eta > 0.0)) throw DomainError("bad exponential tempering");
  return {lambda, eta, 1.0, lambda};
}

TemperingSpec TemperingSpec::none() { return {0.0, INFINITY, 1.0, 0.0}; }

double sample_stable(double alpha, Rng& rng) {
  const double v = kPi * (uniform_open(rng) - 0.5);
  if (alpha == 1.0) return std::tan(v);
  const double w = -std::log(uniform_open(rng));
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

std::vector<double> sample_stable(AlphaIndex alpha, long count, Rng& rng) {
  if (count < 1) throw DomainError("sample_stable: count must be positive");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (auto& x : out) x = sample_stable(alpha.value(), rng);
  return out;
}

PathSample sample_levy_path(const Theta& theta, long n, Rng& rng, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_levy_path: n must be positive");
  std::normal_distribution<double> gauss;
  const double sb = theta.sigma / std::sqrt(double(n));
  const double sj = theta.delta * std::pow(double(n), -1.0 / theta.alpha);
  std::vector<double> inc(static_cast<std::size_t>(n));
  for (auto& x : inc) {
    const double g = gauss(rng);
    x = sb * g + sj * sample_stable(theta.alpha, rng);
  }
  PathSample p = PathSample::from_increments(std::move(inc));
  p.seed = seed;
  return p;
}

// ---------------------------------------------------------------------------

LocallyStableSampler::LocallyStableSampler(AlphaIndex alpha, const TemperingSpec& tau, double dt)
    : alpha_(alpha), kappa_(std::pow(dt, 1.0 / alpha)), tau_(tau) {
  if (!(dt > 0.0)) throw DomainError("LocallyStableSampler: dt must be positive");
  const double a = alpha_;
  const double c = c_alpha(alpha);
  const double cut = 1.0 / kCut;
  rate_ = 2.0 * c * std::pow(kCut, a) / a;
  // Variance of the jumps below 1/K (scaled units), substituting v = z^(2-a)
  // to remove the endpoint singularity: 2c int_0^cut tau(kappa z) z^(1-a) dz.
  auto integrand = [&](double v) { return tau_(kappa_ * std::pow(v, 1.0 / (2.0 - a))); };
  const double top = std::pow(cut, 2.0 - a);
  double var;
  if (tau_.lambda == 0.0 && kappa_ * cut <= tau_.eta) {
    var = top;
  } else {
    QuadOptions opt;
    opt.abs_tol = 1e-15;
    var = integrate(integrand, 0.0, top, opt);
  }
  small_sd_ = std::sqrt(2.0 * c * var / (2.0 - a));
  stable_sd_ = std::sqrt(2.0 * c * top / (2.0 - a));
}

LocallyStableSampler::Draw LocallyStableSampler::draw(Rng& rng) const {
  std::normal_distribution<double> gauss;
  std::poisson_distribution<long> count(rate_);
  const double g = gauss(rng);
  double tempered = small_sd_ * g, stable = stable_sd_ * g;
  const long k = count(rng);
  for (long j = 0; j < k; ++j) {
    const double mag = std::pow(uniform_open(rng), -1.0 / alpha_) / kCut;
    const double z = (rng() & 1U) ? mag : -mag;
    const double t = tau_(kappa_ * z);
    if (t > tau_.bound) throw TemperingUnbounded("tau exceeds its declared bound");
    const double u = uniform_open(rng);
    stable += z;
    if (u * tau_.bound < t) tempered += z;
  }
  return {kappa_ * tempered, kappa_ * stable};
}

std::vector<double> sample_locally_stable_increments(AlphaIndex alpha, const TemperingSpec& tau, long n,
                                                     Rng& rng) {
  if (n < 1) throw DomainError("sample_locally_stable_increments: n must be positive");
  const LocallyStableSampler sampler(alpha, tau, 1.0 / double(n));
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& x : out) x = sampler(rng);
  return out;
}

PathSample sample_sde_path(const SdeModel& model, const Theta& theta, const TemperingSpec& tau, long n,
                           int m, Rng& rng, double x0, std::uint64_t seed) {
  if (n < 1 || m < 1) throw DomainError("sample_sde_path: n and m must be positive");
  const double h = 1.0 / (double(n) * m);
  const double sh = std::sqrt(h);
  const LocallyStableSampler jumps(AlphaIndex(theta.alpha), tau, h);
  std::normal_distribution<double> gauss;
  PathSample p;
  p.n = n;
  p.seed = seed;
  p.values.resize(static_cast<std::size_t>(n) + 1);
  p.values[0] = x0;
  double x = x0;
  for (long i = 0; i < n; ++i) {
    model.check(x, theta.sigma);
    for (int k = 0; k < m; ++k) {
      const double g = gauss(rng);
      x += model.b(x) * h + model.a(x, theta.sigma) * sh * g + theta.delta * model.c(x) * jumps(rng);
      if (!(std::abs(x) <= 1e12)) throw PathExplosion("Euler path left |x| <= 1e12");
    }
    p.values[static_cast<std::size_t>(i) + 1] = x;
  }
  p.increments.resize(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i)
    p.increments[static_cast<std::size_t>(i)] =
        p.values[static_cast<std::size_t>(i) + 1] - p.values[static_cast<std::size_t>(i)];
  return p;
}

}  // namespace levylan
