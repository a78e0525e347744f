#pragma once

// Likelihood of the Levy model, quasi-likelihood of the SDE, and a damped
// Newton solver in rate-normalized coordinates h = u_n^-1 (theta - theta0).

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <string>

#include "levylan/asymptotics.hpp"
#include "levylan/simulate.hpp"

namespace levylan {

/// Log-likelihood with its gradient and Hessian in theta.
struct Objective {
  double value = 0.0;
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();
};

Objective levy_objective(const PathSample& data, const Theta& theta, bool hessian = true);
double loglik_levy(const PathSample& data, const Theta& theta);
Eigen::Vector3d score_levy(const PathSample& data, const Theta& theta);
Eigen::Matrix3d hessian_levy(const PathSample& data, const Theta& theta);

/// Quasi-likelihood sum_i ln p_{1/n}(dX_i, (a(X_i, sigma), delta c(X_i), alpha)).
/// `surface_nodes` is the number of Chebyshev nodes in ln w.
Objective sde_objective(const PathSample& data, const SdeModel& model, const Theta& theta, bool hessian = true,
                        int surface_nodes = 10);
Eigen::Vector3d quasi_score_sde(const PathSample& data, const SdeModel& model, const Theta& theta);
Eigen::Matrix3d quasi_hessian_sde(const PathSample& data, const SdeModel& model, const Theta& theta);

/// boundary: some free parameter sits on the edge of the box and the score
/// of the others vanishes (e.g. alpha -> 1.95 when the jumps are swamped by
/// the Gaussian part).
enum class FitStatus { converged, max_iterations, stalled, singular_hessian, boundary, failed };
std::string to_string(FitStatus s);

struct FitOptions {
  double tol = 1e-6;  // on the normalized score |u_n^T G_n|
  int max_iter = 50;
  std::array<bool, 3> free{true, true, true};  // parameters being estimated
  int surface_nodes = 10;
};

struct EstimationResult {
  Theta theta_hat;
  int iterations = 0;
  bool converged = false;
  FitStatus status = FitStatus::failed;
  double score_norm = INFINITY;
  double loglik = -INFINITY;
  Eigen::Matrix3d cov_hat = Eigen::Matrix3d::Zero();  // of u_n^-1 (theta_hat - theta0)
  InfoMatrix info_used{Eigen::Matrix3d::Zero(), InfoMatrix::Kind::levy};
  std::string message;
};

/// Box the solver projects into.
inline constexpr double kScaleMin = 1e-6, kScaleMax = 1e6;
Theta project(const Eigen::Vector3d& v);

EstimationResult mle_levy(const PathSample& data, const Theta& init, const FitOptions& opt = {});
EstimationResult qmle_sde(const PathSample& data, const SdeModel& model, const Theta& init,
                          const FitOptions& opt = {});

/// Two-pass truncated realized volatility for sigma, then a 5 x 5 grid over
/// (delta, alpha) of the (quasi-)likelihood with sigma held fixed.
Theta initial_levy(const PathSample& data);
Theta initial_sde(const PathSample& data, const SdeModel& model);

}  // namespace levylan
