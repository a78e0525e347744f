#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "levylan/simulate.hpp"
#include "levylan/special.hpp"
#include "levylan/stats.hpp"

namespace {
using namespace levylan;
using std::numbers::pi;

double quantile(std::vector<double> x, double p) {
  const auto k = static_cast<std::size_t>(p * static_cast<double>(x.size() - 1));
  std::nth_element(x.begin(), x.begin() + static_cast<long>(k), x.end());
  return x[k];
}

TEST(SeedTest, DistinctAndStable) {
  EXPECT_EQ(replication_seed(7, 3), replication_seed(7, 3));
  EXPECT_NE(replication_seed(7, 3), replication_seed(7, 4));
  EXPECT_NE(replication_seed(7, 3), replication_seed(8, 3));
}

TEST(SampleStableTest, CauchyQuartiles) {
  Rng rng(11);
  const auto x = sample_stable(AlphaIndex(1.0), 100000, rng);
  EXPECT_NEAR(quantile(x, 0.5), 0.0, 0.02);
  EXPECT_NEAR(quantile(x, 0.75) - quantile(x, 0.25), 2.0, 0.05);
}

TEST(SampleStableTest, CharacteristicFunction) {
  Rng rng(12);
  const long count = 100000;
  const auto x = sample_stable(AlphaIndex(1.5), count, rng);
  for (double u : {0.5, 1.0, 2.0}) {
    double m = 0.0;
    for (double v : x) m += std::cos(u * v);
    m /= count;
    EXPECT_LE(std::abs(m - std::exp(-std::pow(u, 1.5))), 4 / std::sqrt(double(count))) << u;
  }
}

TEST(SampleStableTest, Symmetric) {
  Rng rng(13);
  const long count = 100000;
  const auto x = sample_stable(AlphaIndex(0.7), count, rng);
  double s = 0.0;
  for (double v : x) s += (v > 0) - (v < 0);
  EXPECT_LE(std::abs(s / count), 3 / std::sqrt(double(count)));
}

TEST(LevyPathTest, IncrementsConsistent) {
  Rng rng(1);
  const PathSample p = sample_levy_path(Theta(1, 1, 1.5), 200, rng);
  ASSERT_EQ(p.values.size(), 201u);
  ASSERT_EQ(p.increments.size(), 200u);
  for (std::size_t i = 0; i < 200; ++i) EXPECT_EQ(p.increments[i], p.values[i + 1] - p.values[i]);
}

TEST(LevyPathTest, Deterministic) {
  Rng a(99), b(99);
  EXPECT_EQ(sample_levy_path(Theta(1, 1, 1.2), 500, a).increments,
            sample_levy_path(Theta(1, 1, 1.2), 500, b).increments);
}

TEST(LevyPathTest, BrownianLimit) {
  Rng rng(21);
  const long n = 5000;
  const double s = 1.7;
  PathSample p = sample_levy_path(Theta(s, 1e-9, 1.5), n, rng);
  for (double& v : p.increments) v *= std::sqrt(double(n));
  EXPECT_GT(ks_test(p.increments, [&](double x) { return normal_cdf(x / s); }).p_value, 0.01);
}

TEST(LevyPathTest, CauchyLimit) {
  Rng rng(3);
  const long n = 5000;
  const double d = 0.6;
  PathSample p = sample_levy_path(Theta(1e-9, d, 1.0), n, rng);
  for (double& v : p.increments) v *= n;
  EXPECT_GT(ks_test(p.increments, [&](double x) { return 0.5 + std::atan(x / d) / pi; }).p_value, 0.01);
}

TEST(LevyPathTest, TruncatedRealizedVariance) {
  // sum of squared increments below 4 n^-1/2 recovers sigma^2; jumps at
  // alpha = 1 add about 2 c_1 * 4 n^-1/2 = 2.5%.
  Rng rng(4);
  const long n = 10000;
  const double s = 1.0;
  const PathSample p = sample_levy_path(Theta(s, 1.0, 1.0), n, rng);
  const double u = 4 * s / std::sqrt(double(n));
  double rv = 0.0;
  for (double v : p.increments)
    if (std::abs(v) <= u) rv += v * v;
  EXPECT_NEAR(rv, s * s, 0.1 * s * s);
}

TEST(LocallyStableTest, UntemperedMatchesStable) {
  Rng rng(5);
  const long n = 1000, count = 100000;
  const double a = 1.5;
  const LocallyStableSampler smp(AlphaIndex(a), TemperingSpec::truncation(1e12), 1.0 / n);
  std::vector<double> x(count);
  for (auto& v : x) v = smp(rng) * std::pow(double(n), 1 / a);
  const auto y = sample_stable(AlphaIndex(a), count, rng);
  EXPECT_GT(ks_test2(x, y).p_value, 0.01);
}

TEST(LocallyStableTest, TruncationBoundsJumps) {
  // at alpha = 0.5 and dt = 1e-3 almost every step holds at most one jump
  // above the Gaussian cut, so |L| stays below eta plus a small-jump margin.
  Rng rng(6);
  const double eta = 0.5;
  const auto x = sample_locally_stable_increments(AlphaIndex(0.5), TemperingSpec::truncation(eta), 100000, rng);
  double worst = 0.0;
  for (double v : x) worst = std::max(worst, std::abs(v));
  EXPECT_LT(worst, 2 * eta);
}

TEST(LocallyStableTest, UntemperedCouplingIsExact) {
  Rng rng(7);
  const LocallyStableSampler smp(AlphaIndex(1.2), TemperingSpec::none(), 1e-3);
  for (int i = 0; i < 1000; ++i) {
    const auto d = smp.draw(rng);
    EXPECT_EQ(d.tempered, d.stable);
  }
}

TEST(TemperingTest, LipschitzAtOrigin) {
  const TemperingSpec t = TemperingSpec::exponential(2.0, 1.0);
  for (double z = -1; z <= 1; z += 0.01) EXPECT_LE(std::abs(t(z) - 1), t.lipschitz * std::abs(z) + 1e-15);
  EXPECT_EQ(t(1.5), 0.0);
  EXPECT_EQ(t(0.3), t(-0.3));
  EXPECT_THROW(TemperingSpec::truncation(0.0), DomainError);
}

TEST(SdeModelTest, DefaultBoundsHold) {
  const SdeModel m = default_sde_model();
  Rng rng(8);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    EXPECT_NO_THROW(m.check(x, 0.7));
    const double h = 1e-6;
    EXPECT_NEAR(m.a_x(x, 0.7), (m.a(x + h, 0.7) - m.a(x - h, 0.7)) / (2 * h), 1e-6);
    EXPECT_NEAR(m.c_x(x), (m.c(x + h) - m.c(x - h)) / (2 * h), 1e-6);
    EXPECT_NEAR(m.a_sigma(x, 0.7), (m.a(x, 0.7 + h) - m.a(x, 0.7 - h)) / (2 * h), 1e-6);
  }
}

TEST(SdeModelTest, BoundViolationThrows) {
  SdeModel m = constant_sde_model();
  m.c = [](double x) { return x; };
  m.c_lower = 0.1;
  EXPECT_THROW(m.check(0.0, 1.0), CoefficientBoundViolated);
}

TEST(SdePathTest, DefaultModelNeverTripsBounds) {
  Rng rng(9);
  EXPECT_NO_THROW(sample_sde_path(default_sde_model(), Theta(1, 0.5, 1.2), TemperingSpec::exponential(1, 1), 2000,
                                  16, rng));
}

TEST(SdePathTest, ConstantModelMatchesLevy) {
  Rng a(10), b(20);
  const Theta th(1, 1, 1.3);
  const long n = 1000;
  const PathSample x = sample_sde_path(constant_sde_model(), th, TemperingSpec::none(), n, 8, a);
  const PathSample y = sample_levy_path(th, n, b);
  EXPECT_GT(ks_test2(x.increments, y.increments).p_value, 0.01);
}

TEST(SdePathTest, RefinementSelfConvergence) {
  // a(x) follows the path, so increments of one path are dependent: the
  // standard error comes from independent paths.
  const Theta th(1, 0.5, 1.2);
  const long n = 1000;
  const int R = 40;
  auto stats = [&](int m, std::uint64_t master) {
    double s = 0, s2 = 0;
    for (int r = 0; r < R; ++r) {
      Rng rng(replication_seed(master, static_cast<std::uint64_t>(r)));
      const PathSample p = sample_sde_path(default_sde_model(), th, TemperingSpec::exponential(1, 1), n, m, rng);
      double a = 0;
      for (double v : p.increments) a += std::abs(v);
      a /= n;
      s += a;
      s2 += a * a;
    }
    const double mean = s / R;
    return std::pair{mean, std::sqrt((s2 / R - mean * mean) / (R - 1))};
  };
  const auto [m1, se1] = stats(8, 31);
  const auto [m2, se2] = stats(16, 32);
  EXPECT_LE(std::abs(m1 - m2), 2 * std::hypot(se1, se2));
}

TEST(SdePathTest, DeterministicLimit) {
  Rng rng(11);
  const long n = 200;
  const int m = 10;
  const PathSample p = sample_sde_path(default_sde_model(), Theta(1e-12, 1e-12, 1.5), TemperingSpec::none(), n, m,
                                       rng, 1.0);
  for (long i = 0; i <= n; i += 50)
    EXPECT_NEAR(p.values[static_cast<std::size_t>(i)], std::exp(-double(i) / n), 1.0 / (n * m)) << i;
}

TEST(SdePathTest, RejectsBadArguments) {
  Rng rng(12);
  EXPECT_THROW(sample_sde_path(default_sde_model(), Theta(1, 1, 1), TemperingSpec::none(), 100, 0, rng), DomainError);
}

}  // namespace
