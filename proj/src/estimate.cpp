#include "levylan/estimate.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

namespace levylan {

Objective levy_objective(const PathSample& data, const Theta& theta, bool hessian) {
  const long n = data.n;
  if (n < 2) throw DomainError("levy_objective: need at least two increments");
  const auto table = convolution_table(theta.alpha, w_value(theta, n));
  const double scale = std::sqrt(double(n)) / theta.sigma;
  Objective out;
  for (double dx : data.increments) {
    if (!std::isfinite(dx)) throw DomainError("levy_objective: non-finite increment");
    const auto d = log_density_derivs((*table)(scale * dx), theta, n, hessian);
    out.value += d.logp;
    out.grad += d.grad;
    if (hessian) out.hess += d.hess;
  }
  return out;
}

double loglik_levy(const PathSample& data, const Theta& theta) { return levy_objective(data, theta, false).value; }

Eigen::Vector3d score_levy(const PathSample& data, const Theta& theta) {
  return levy_objective(data, theta, false).grad;
}

Eigen::Matrix3d hessian_levy(const PathSample& data, const Theta& theta) {
  return levy_objective(data, theta, true).hess;
}

Objective sde_objective(const PathSample& data, const SdeModel& model, const Theta& theta, bool hessian,
                        int surface_nodes) {
  const long n = data.n;
  if (n < 2) throw DomainError("sde_objective: need at least two increments");
  const double sn = std::sqrt(double(n));
  const double w0 = w_value(1.0, theta.delta, theta.alpha, n);  // times c(x)/a(x, sigma)
  std::vector<double> av(static_cast<std::size_t>(n)), wv(av.size());
  double wmin = INFINITY, wmax = 0.0;
  for (long i = 0; i < n; ++i) {
    const double x = data.values[static_cast<std::size_t>(i)];
    model.check(x, theta.sigma);
    const double a = model.a(x, theta.sigma);
    const double w = w0 * model.c(x) / a;
    av[static_cast<std::size_t>(i)] = a;
    wv[static_cast<std::size_t>(i)] = w;
    wmin = std::min(wmin, w);
    wmax = std::max(wmax, w);
  }
  const ConvolutionSurface surf(theta.alpha, wmin, wmax, surface_nodes);
  Objective out;
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double x = data.values[k], a = av[k], c = model.c(x);
    const double dx = data.increments[k];
    if (!std::isfinite(dx)) throw DomainError("sde_objective: non-finite increment");
    const Theta beta(a, theta.delta * c, theta.alpha);
    const auto d = log_density_derivs(surf(sn * dx / a, wv[k]), beta, n, hessian);
    const double as = model.a_sigma(x, theta.sigma);
    out.value += d.logp;
    out.grad += Eigen::Vector3d(d.grad[0] * as, d.grad[1] * c, d.grad[2]);
    if (hessian) {
      const auto& H = d.hess;
      Eigen::Matrix3d h;
      h(0, 0) = H(0, 0) * as * as + d.grad[0] * model.a_sigma2(x, theta.sigma);
      h(0, 1) = H(0, 1) * as * c;
      h(0, 2) = H(0, 2) * as;
      h(1, 1) = H(1, 1) * c * c;
      h(1, 2) = H(1, 2) * c;
      h(2, 2) = H(2, 2);
      h(1, 0) = h(0, 1);
      h(2, 0) = h(0, 2);
      h(2, 1) = h(1, 2);
      out.hess += h;
    }
  }
  return out;
}

Eigen::Vector3d quasi_score_sde(const PathSample& data, const SdeModel& model, const Theta& theta) {
  return sde_objective(data, model, theta, false).grad;
}

Eigen::Matrix3d quasi_hessian_sde(const PathSample& data, const SdeModel& model, const Theta& theta) {
  return sde_objective(data, model, theta, true).hess;
}

std::string to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iterations: return "max_iterations";
    case FitStatus::stalled: return "stalled";
    case FitStatus::singular_hessian: return "singular_hessian";
    case FitStatus::boundary: return "boundary";
    default: return "failed";
  }
}

Theta project(const Eigen::Vector3d& v) {
  auto clamp = [](double x, double lo, double hi) { return std::isfinite(x) ? std::clamp(x, lo, hi) : lo; };
  return {clamp(v[0], kScaleMin, kScaleMax), clamp(v[1], kScaleMin, kScaleMax), clamp(v[2], kAlphaMin, kAlphaMax)};
}

namespace {

using ObjectiveFn = std::function<Objective(const Theta&, bool)>;

// Newton on the normalized system (u^T J u) h = -u^T G, theta <- theta + u h,
// with step halving until the objective does not decrease.
EstimationResult newton(const ObjectiveFn& obj, long n, const Theta& init, const FitOptions& opt) {
  EstimationResult res;
  Eigen::Vector3d mask;
  for (int i = 0; i < 3; ++i) mask[i] = opt.free[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  const Eigen::Vector3d lo(kScaleMin, kScaleMin, kAlphaMin), hi(kScaleMax, kScaleMax, kAlphaMax);

  Theta theta = project(init.vec());
  Objective cur = obj(theta, true);
  res.status = FitStatus::max_iterations;
  for (int it = 0;; ++it) {
    // A free coordinate on the edge of the box whose score points outward
    // is held for this step.
    Eigen::Vector3d act = mask;
    const Eigen::Vector3d v = theta.vec();
    for (int i = 0; i < 3; ++i)
      if ((v[i] <= lo[i] && cur.grad[i] < 0.0) || (v[i] >= hi[i] && cur.grad[i] > 0.0)) act[i] = 0.0;
    const Eigen::Matrix3d P = act.asDiagonal();
    // Fixed parameters drop out of the rate matrix together with their
    // couplings (delta fixed gives a diagonal rate for alpha).
    const Eigen::Matrix3d U = P * rate_matrix(theta, n).M * P;
    const Eigen::Vector3d g = U.transpose() * cur.grad;
    res.iterations = it;
    res.score_norm = g.norm();
    if (res.score_norm <= opt.tol) {
      res.status = act == mask ? FitStatus::converged : FitStatus::boundary;
      break;
    }
    if (it >= opt.max_iter) break;

    // Normalized Hessian restricted to the free block; fixed directions get
    // a unit diagonal so the system stays square.
    Eigen::Matrix3d Hn = U.transpose() * cur.hess * U;
    for (int i = 0; i < 3; ++i)
      if (act[i] == 0.0) Hn(i, i) = -1.0;
    Hn = 0.5 * (Hn + Hn.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(Hn);
    const auto ev = es.eigenvalues();
    if (!(ev.maxCoeff() < 0.0)) {
      // Not concave here (typically a flat sigma/alpha ridge): reflect the
      // positive eigenvalues so the step still ascends along them.
      const double scale = ev.cwiseAbs().maxCoeff();
      const Eigen::Vector3d mod = -ev.cwiseAbs().cwiseMax(1e-6 * scale);
      Hn = es.eigenvectors() * mod.asDiagonal() * es.eigenvectors().transpose();
      es.compute(Hn);
    }
    const double cond = es.eigenvalues().cwiseAbs().maxCoeff() / es.eigenvalues().cwiseAbs().minCoeff();
    if (!(cond <= 1e12)) {
      res.status = FitStatus::singular_hessian;
      break;
    }
    const Eigen::Vector3d h = P * Hn.ldlt().solve(-g);

    // Near the optimum the change in loglik drops below the rounding noise
    // of the sum; steps that lose less than that are still accepted.
    const double noise = 1e-12 * (1.0 + std::abs(cur.value));
    bool accepted = false;
    double t = 1.0;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      const Theta cand = project(theta.vec() + U * (t * h));
      Objective next;
      try {
        next = obj(cand, false);
      } catch (const NonConvergedQuadrature&) {
        continue;
      }
        if (std::isfinite(next.value) && next.value >= cur.value - noise) {
        theta = cand;
        cur = obj(theta, true);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.status = FitStatus::stalled;
      break;
    }
  }
  // A stationary point on the edge of the box is not a root of the score.
  if (res.status == FitStatus::converged) {
    const Eigen::Vector3d v = theta.vec();
    for (int i = 0; i < 3; ++i)
      if (mask[i] != 0.0 && (v[i] <= lo[i] || v[i] >= hi[i])) res.status = FitStatus::boundary;
  }
  res.theta_hat = theta;
  res.loglik = cur.value;
  res.converged = res.status == FitStatus::converged;

  const RateMatrix u = rate_matrix(theta, n);
  Eigen::Matrix3d Hn = u.M.transpose() * cur.hess * u.M;
  Hn = 0.5 * (Hn + Hn.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(-Hn);
  if (es.eigenvalues().minCoeff() > 0.0) {
    const Eigen::Matrix3d c =
        es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    res.cov_hat = 0.5 * (c + c.transpose());
  } else {
    res.cov_hat = info_levy(theta).M.inverse();
    res.message = "observed information not positive definite; cov_hat from I(theta_hat)";
  }
  return res;
}

}  // namespace

EstimationResult mle_levy(const PathSample& data, const Theta& init, const FitOptions& opt) {
  auto obj = [&](const Theta& th, bool hess) { return levy_objective(data, th, hess); };
  EstimationResult r;
  try {
    r = newton(obj, data.n, init, opt);
    r.info_used = info_levy(r.theta_hat);
  } catch (const Error& e) {
    r.status = FitStatus::failed;
    r.converged = false;
    r.message = e.what();
  }
  return r;
}

EstimationResult qmle_sde(const PathSample& data, const SdeModel& model, const Theta& init,
                          const FitOptions& opt) {
  auto obj = [&](const Theta& th, bool hess) { return sde_objective(data, model, th, hess, opt.surface_nodes); };
  EstimationResult r;
  try {
    r = newton(obj, data.n, init, opt);
    r.info_used = info_sde(r.theta_hat, data, model);
  } catch (const Error& e) {
    r.status = FitStatus::failed;
    r.converged = false;
    r.message = e.what();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Initial values

namespace {

// E[Z^2 | |Z| <= 3] for Z standard normal.
double truncated_second_moment() {
  const double t = 3.0;
  return 1.0 - 2.0 * t * normal_pdf(t) / (2.0 * normal_cdf(t) - 1.0);
}

// Median of |x|.
double median_abs(std::vector<double> x) {
  for (auto& v : x) v = std::abs(v);
  const auto mid = x.begin() + static_cast<std::ptrdiff_t>(x.size() / 2);
  std::nth_element(x.begin(), mid, x.end());
  return *mid;
}

// sigma with mean over |z_i| <= 3 of z_i^2 equal to the truncated normal
// moment, z_i = sqrt(n) dx_i / a(x_i, sigma); two passes from the MAD.
template <class Scale>
double truncated_sigma(const PathSample& data, Scale&& scale_at, double start) {
  const double sn = std::sqrt(double(data.n));
  double s = start;
  for (int pass = 0; pass < 2; ++pass) {
    double sum = 0.0;
    long kept = 0;
    for (long i = 0; i < data.n; ++i) {
      const double z = sn * data.increments[static_cast<std::size_t>(i)] / scale_at(i, s);
      if (std::abs(z) <= 3.0) {
        sum += z * z;
        ++kept;
      }
    }
    if (kept == 0) break;
    s *= std::sqrt(sum / double(kept) / truncated_second_moment());
  }
  return s;
}

constexpr std::array<double, 5> kAlphaGrid{0.4, 0.75, 1.1, 1.45, 1.8};
constexpr std::array<double, 5> kDeltaGrid{0.25, 0.5, 1.0, 2.0, 4.0};

}  // namespace

Theta initial_levy(const PathSample& data) {
  if (data.n < 16) throw DomainError("initial_levy: need n >= 16");
  const double mad = std::sqrt(double(data.n)) * median_abs(data.increments) / 0.6744897501960817;
  const double sigma = truncated_sigma(data, [](long, double s) { return s; }, std::max(mad, 1e-12));
  Theta best(sigma, sigma, 1.0);
  double best_ll = -INFINITY;
  for (double a : kAlphaGrid)
    for (double d : kDeltaGrid) {
      const Theta th(sigma, d * sigma, a);
      const double ll = loglik_levy(data, th);
      if (ll > best_ll) best_ll = ll, best = th;
    }
  return best;
}

Theta initial_sde(const PathSample& data, const SdeModel& model) {
  if (data.n < 16) throw DomainError("initial_sde: need n >= 16");
  // a(x, sigma) is taken as sigma times a(x, 1) for the variance pass.
  auto unit = [&](long i) { return model.a(data.values[static_cast<std::size_t>(i)], 1.0); };
  std::vector<double> z(data.increments.size());
  for (long i = 0; i < data.n; ++i) z[static_cast<std::size_t>(i)] = data.increments[static_cast<std::size_t>(i)] / unit(i);
  const double mad = std::sqrt(double(data.n)) * median_abs(z) / 0.6744897501960817;
  const double sigma = truncated_sigma(data, [&](long i, double s) { return s * unit(i); }, std::max(mad, 1e-12));
  // typical c(x)/a(x, 1) fixes the delta scale of the grid
  double ratio = 0.0;
  for (long i = 0; i < data.n; ++i) ratio += model.c(data.values[static_cast<std::size_t>(i)]) / unit(i);
  ratio /= double(data.n);
  Theta best(sigma, sigma / ratio, 1.0);
  double best_ll = -INFINITY;
  for (double a : kAlphaGrid)
    for (double d : kDeltaGrid) {
      const Theta th(sigma, d * sigma / ratio, a);
      const double ll = sde_objective(data, model, th, false, 4).value;
      if (ll > best_ll) best_ll = ll, best = th;
    }
  return best;
}

}  // namespace levylan
