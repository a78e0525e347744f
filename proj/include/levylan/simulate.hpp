#pragma once

// Samplers: symmetric stable variables, Levy model paths, locally stable
// increments and fine-grid Euler paths of the jump SDE
//   dX = b(X) dt + a(X, sigma) dB + delta c(X-) dL^(alpha, tau).

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "levylan/convolution.hpp"

namespace levylan {

using Rng = std::mt19937_64;

/// Seed of replication `index` under `master`: splitmix64 applied to
/// master + (index + 1) * golden gamma. Serial and sharded runs therefore
/// draw identical streams per replication.
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index);

struct PathSample {
  long n = 0;
  std::vector<double> values;      // X_{i/n}, i = 0..n
  std::vector<double> increments;  // values[i+1] - values[i]
  std::uint64_t seed = 0;

  /// Builds values from x0 and increments (observed data without a path).
  static PathSample from_increments(std::vector<double> inc, double x0 = 0.0);
};

/// Coefficients of the SDE. a_sigma, a_sigma2 are derivatives of a in sigma;
/// a_x, c_x are derivatives in x (used only for diagnostics).
struct SdeModel {
  std::function<double(double, double)> a, a_sigma, a_sigma2, a_x;
  std::function<double(double)> b, c, c_x;
  std::function<double(double)> a_lower;  // lower bound of a(., sigma) as a function of sigma
  double c_lower = 0.0;

  /// Throws CoefficientBoundViolated when a or c drops below its bound at x.
  void check(double x, double sigma) const;
};

/// a(x, sigma) = sigma (2 + cos x), b(x) = -x, c(x) = 2 + sin x.
SdeModel default_sde_model();

/// a(x, sigma) = sigma, b = 0, c = 1: the Levy model written as an SDE.
SdeModel constant_sde_model();

/// Tempering tau(z) = exp(-lambda |z|) 1{|z| <= eta}. lambda = 0 is plain
/// truncation; eta = inf with lambda = 0 is the stable case.
struct TemperingSpec {
  double lambda = 0.0;
  double eta = 1.0;
  double bound = 1.0;   // declared sup of tau
  double lipschitz = 1.0;  // declared L with |tau(z) - 1| <= L |z| near 0

  double operator()(double z) const;
  static TemperingSpec truncation(double eta);
  static TemperingSpec exponential(double lambda, double eta = INFINITY);
  static TemperingSpec none();
};

/// i.i.d. draws with characteristic function exp(-|u|^alpha) (Chambers-Mallows-Stuck).
double sample_stable(double alpha, Rng& rng);
std::vector<double> sample_stable(AlphaIndex alpha, long count, Rng& rng);

/// Increments sigma n^(-1/2) N + delta n^(-1/alpha) S, values from 0.
PathSample sample_levy_path(const Theta& theta, long n, Rng& rng, std::uint64_t seed = 0);

/// Jump sampler for the locally stable process over a time step dt.
///
/// In units of kappa = dt^(1/alpha) the jumps larger than 1/K form a
/// compound Poisson sum (Pareto proposals thinned by tau), and the jumps
/// below 1/K are replaced by a centered Gaussian of the same variance.
/// The same draw also yields the coupled stable variable (all proposals
/// kept), which is what the total variation study uses.
class LocallyStableSampler {
 public:
  static constexpr double kCut = 16.0;  // K

  LocallyStableSampler(AlphaIndex alpha, const TemperingSpec& tau, double dt);

  struct Draw {
    double tempered;  // L_dt
    double stable;    // coupled stable increment S_dt (same small part, every jump kept)
  };
  Draw draw(Rng& rng) const;
  double operator()(Rng& rng) const { return draw(rng).tempered; }

  double kappa() const { return kappa_; }

 private:
  double alpha_, kappa_, rate_, small_sd_, stable_sd_;
  TemperingSpec tau_;
};

/// n i.i.d. copies of L_(1/n).
std::vector<double> sample_locally_stable_increments(AlphaIndex alpha, const TemperingSpec& tau, long n,
                                                     Rng& rng);

/// Euler scheme on n*m steps of size 1/(n m), kept at the n observation times.
PathSample sample_sde_path(const SdeModel& model, const Theta& theta, const TemperingSpec& tau, long n,
                           int m, Rng& rng, double x0 = 0.0, std::uint64_t seed = 0);

}  // namespace levylan
