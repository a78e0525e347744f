#pragma once

// Scenario files: one `key = value` per line, '#' starts a comment.
//
//   model    = levy | sde
//   theta0   = sigma, delta, alpha
//   n        = 1000, 10000            (each >= 16)
//   reps     = 200                    (>= 1)
//   seed     = 12345
//   tau      = none | truncation ETA | exponential LAMBDA [ETA]
//   m        = 32                     (Euler refinement, sde only)
//   init     = data | truth | perturbed
//   perturb  = 0.1                    (relative offset for init = perturbed)
//   h        = 1,1,1; 0,1,-1          (LAN directions)
//   alphas   = 0.5, 1, 1.5            (density-validate, tv-study)
//   ws       = 0.01, 0.1, 0.3         (density-validate)
//   samples  = 1000000                (tv-study draws per n)
//   outputs  = out
//   workers  = 1
//   shard    = 0/1                    (index/count of replications handled)
//   tol      = 1e-6
//   max_iter = 50

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "levylan/simulate.hpp"

namespace levylan {

struct Scenario {
  enum class Model { levy, sde };
  Model model = Model::levy;
  Theta theta0{1.0, 1.0, 1.5};
  std::vector<long> n_list{1000};
  long reps = 1;
  std::uint64_t seed = 1;
  TemperingSpec tau = TemperingSpec::exponential(1.0, 1.0);
  int m = 32;
  std::string init = "data";
  double perturb = 0.1;
  std::vector<Eigen::Vector3d> h_list{Eigen::Vector3d(1.0, 1.0, 1.0)};
  std::vector<double> alphas{0.5, 1.0, 1.5};
  std::vector<double> ws{0.01, 0.1, 0.3};
  long samples = 1000000;
  std::string outputs = "out";
  int workers = 1;
  int shard_index = 0, shard_count = 1;
  double tol = 1e-6;
  int max_iter = 50;

  /// Throws BadScenario on violated invariants (n < 16, reps < 1, ...).
  void validate() const;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Canonical text form; parse_scenario(serialize(s)) reproduces s exactly.
std::string serialize(const Scenario& s);

/// FNV-1a 64-bit hash of a byte string, and of the canonical scenario text.
std::uint64_t fnv1a(const std::string& bytes);
std::string scenario_hash(const Scenario& s);

std::string format_double(double v);  // %.17g

}  // namespace levylan
