#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "levylan/estimate.hpp"
#include "levylan/special.hpp"

namespace {
using namespace levylan;

PathSample levy_data(const Theta& th, long n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_levy_path(th, n, rng, seed);
}

TEST(LoglikTest, SingleObservation) {
  // one increment observed at frequency 1/n
  PathSample p = PathSample::from_increments({0.0});
  p.n = 10000;
  const Theta th(1, 1, 1);
  EXPECT_NEAR(loglik_levy(p, th), log_p_density(0.0, th, 10000), 1e-12);
}

TEST(LoglikTest, PermutationInvariant) {
  PathSample p = levy_data(Theta(1, 1, 1.4), 1000, 1);
  const double a = loglik_levy(p, Theta(1.1, 0.9, 1.3));
  std::reverse(p.increments.begin(), p.increments.end());
  const double b = loglik_levy(PathSample::from_increments(p.increments), Theta(1.1, 0.9, 1.3));
  EXPECT_NEAR(a, b, 1e-9 * std::abs(a));
}

TEST(LoglikTest, GaussianLimit) {
  const long n = 1000;
  const double s = 0.8;
  const PathSample p = levy_data(Theta(s, 1e-7, 1.5), n, 2);
  double ref = 0.0;
  for (double y : p.increments) ref += std::log(normal_pdf(y * std::sqrt(double(n)) / s) * std::sqrt(double(n)) / s);
  EXPECT_NEAR(loglik_levy(p, Theta(s, 1e-7, 1.5)), ref, 1e-3 * n);
}

TEST(ScoreTest, FiniteDifference) {
  const PathSample p = levy_data(Theta(1, 1, 1.5), 2000, 3);
  const Theta th(1.05, 0.9, 1.45);
  const Eigen::Vector3d g = score_levy(p, th);
  const Eigen::Matrix3d H = hessian_levy(p, th);
  const Eigen::Vector3d h(1e-5, 1e-5, 1e-5);
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d a = th.vec(), b = th.vec();
    a[i] += h[i];
    b[i] -= h[i];
    const double fd = (loglik_levy(p, Theta::from(a)) - loglik_levy(p, Theta::from(b))) / (2 * h[i]);
    EXPECT_LE(std::abs(g[i] - fd), 1e-3 * std::abs(fd) + 1e-3) << i;
    const Eigen::Vector3d col = (score_levy(p, Theta::from(a)) - score_levy(p, Theta::from(b))) / (2 * h[i]);
    for (int j = 0; j < 3; ++j) EXPECT_LE(std::abs(H(j, i) - col[j]), 1e-3 * std::abs(col[j]) + 1e-2) << i << j;
  }
}

TEST(MleTest, ConvergesAndReportsCovariance) {
  const Theta th0(1, 1, 1.5);
  const PathSample p = levy_data(th0, 5000, 4);
  const EstimationResult r = mle_levy(p, th0);
  ASSERT_TRUE(r.converged) << to_string(r.status);
  EXPECT_LE(r.score_norm, 1e-6);
  EXPECT_EQ(r.cov_hat, r.cov_hat.transpose());
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(r.cov_hat).eigenvalues().minCoeff(), 0.0);
}

TEST(MleTest, StationaryStartTakesNoIterations) {
  const PathSample p = levy_data(Theta(1, 1, 1.5), 3000, 5);
  const EstimationResult r = mle_levy(p, Theta(1, 1, 1.5));
  ASSERT_TRUE(r.converged);
  const EstimationResult again = mle_levy(p, r.theta_hat);
  EXPECT_TRUE(again.converged);
  EXPECT_EQ(again.iterations, 0);
}

TEST(MleTest, ScaleEquivariance) {
  const double lambda = 2.5;
  const PathSample p = levy_data(Theta(1, 1, 1.3), 3000, 6);
  std::vector<double> scaled = p.increments;
  for (double& v : scaled) v *= lambda;
  FitOptions opt;
  opt.tol = 1e-9;
  const EstimationResult a = mle_levy(p, Theta(1, 1, 1.3), opt);
  const EstimationResult b = mle_levy(PathSample::from_increments(scaled), Theta(lambda, lambda, 1.3), opt);
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_NEAR(b.theta_hat.sigma, lambda * a.theta_hat.sigma, 1e-6);
  EXPECT_NEAR(b.theta_hat.delta, lambda * a.theta_hat.delta, 1e-6);
  EXPECT_NEAR(b.theta_hat.alpha, a.theta_hat.alpha, 1e-6);
}

TEST(MleTest, FixedParametersStay) {
  const PathSample p = levy_data(Theta(1, 1, 1.5), 3000, 7);
  FitOptions opt;
  opt.free = {true, true, false};
  const EstimationResult r = mle_levy(p, Theta(1.1, 0.9, 1.4), opt);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.theta_hat.alpha, 1.4);
  opt.free = {false, true, true};
  const EstimationResult s = mle_levy(p, Theta(1.1, 0.9, 1.4), opt);
  EXPECT_TRUE(s.converged);
  EXPECT_EQ(s.theta_hat.sigma, 1.1);
}

TEST(MleTest, ProjectionBox) {
  const Theta t = project(Eigen::Vector3d(-1.0, 1e9, 2.5));
  EXPECT_EQ(t.sigma, kScaleMin);
  EXPECT_EQ(t.delta, kScaleMax);
  EXPECT_EQ(t.alpha, kAlphaMax);
}

TEST(MleTest, StopsOnTheAlphaEdge) {
  // Brownian data: the likelihood keeps rising toward alpha = 1.95, where
  // the jump part is indistinguishable from the Gaussian one.
  const PathSample p = levy_data(Theta(1, 1e-9, 1.5), 1000, 5);
  const EstimationResult r = mle_levy(p, Theta(1, 0.5, 1.8));
  EXPECT_EQ(r.status, FitStatus::boundary) << to_string(r.status);
  EXPECT_EQ(r.theta_hat.alpha, kAlphaMax);
  EXPECT_FALSE(r.converged);
  EXPECT_LT(r.iterations, 30);
}

TEST(MleTest, InitialGuessIsReasonable) {
  const PathSample p = levy_data(Theta(1, 1, 1.5), 5000, 8);
  const Theta t = initial_levy(p);
  EXPECT_NEAR(t.sigma, 1.0, 0.3);
  EXPECT_GE(t.alpha, kAlphaMin);
  EXPECT_LE(t.alpha, kAlphaMax);
}

TEST(QuasiScoreTest, ConstantCoefficientsReduceToLevy) {
  const Theta th(1.1, 0.9, 1.4);
  const PathSample p = levy_data(Theta(1, 1, 1.5), 2000, 9);
  const Eigen::Vector3d a = quasi_score_sde(p, constant_sde_model(), th), b = score_levy(p, th);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-8 * (1 + b.cwiseAbs().maxCoeff()));
}

TEST(QuasiScoreTest, FiniteDifference) {
  Rng rng(10);
  const SdeModel model = default_sde_model();
  const PathSample p = sample_sde_path(model, Theta(1, 0.5, 1.2), TemperingSpec::exponential(1, 1), 2000, 8, rng);
  const Theta th(1.05, 0.45, 1.25);
  const Eigen::Vector3d g = quasi_score_sde(p, model, th);
  const Eigen::Matrix3d H = quasi_hessian_sde(p, model, th);
  const Eigen::Vector3d h(1e-5, 1e-5, 1e-5);
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d a = th.vec(), b = th.vec();
    a[i] += h[i];
    b[i] -= h[i];
    const double fd = (sde_objective(p, model, Theta::from(a), false).value -
                       sde_objective(p, model, Theta::from(b), false).value) /
                      (2 * h[i]);
    EXPECT_LE(std::abs(g[i] - fd), 1e-3 * std::abs(fd) + 1e-3) << i;
    const Eigen::Vector3d col =
        (quasi_score_sde(p, model, Theta::from(a)) - quasi_score_sde(p, model, Theta::from(b))) / (2 * h[i]);
    for (int j = 0; j < 3; ++j) EXPECT_LE(std::abs(H(j, i) - col[j]), 1e-3 * std::abs(col[j]) + 1e-2) << i << j;
  }
}

TEST(QmleTest, ConstantCoefficientsReproduceMle) {
  const PathSample p = levy_data(Theta(1, 1, 1.5), 3000, 11);
  const EstimationResult a = mle_levy(p, Theta(1, 1, 1.5));
  const EstimationResult b = qmle_sde(p, constant_sde_model(), Theta(1, 1, 1.5));
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_LE((a.theta_hat.vec() - b.theta_hat.vec()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(QmleTest, DefaultModelConverges) {
  Rng rng(12);
  const SdeModel model = default_sde_model();
  const Theta th0(1, 0.5, 1.2);
  const PathSample p = sample_sde_path(model, th0, TemperingSpec::exponential(1, 1), 3000, 16, rng);
  const EstimationResult r = qmle_sde(p, model, th0);
  ASSERT_TRUE(r.converged) << to_string(r.status) << " " << r.message;
  EXPECT_EQ(r.info_used.kind, InfoMatrix::Kind::sde);
  EXPECT_NEAR(r.theta_hat.sigma, 1.0, 0.1);
}

}  // namespace
