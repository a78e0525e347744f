#pragma once

// Monte Carlo studies behind the CLI. Every replication draws from its own
// seed replication_seed(master, (n << 32) | rep), so results do not depend
// on the worker count, the shard layout or the order of the n-list.

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "levylan/estimate.hpp"
#include "levylan/scenario.hpp"

namespace levylan {

/// Runs body(0..count-1) on `workers` threads. The first exception is
/// rethrown after all threads finish.
void parallel_for(long count, int workers, const std::function<void(long)>& body);

std::uint64_t rep_seed(std::uint64_t master, long n, long rep);

/// Path of replication `rep` at sample size n under the scenario's model.
PathSample simulate_replication(const Scenario& s, long n, long rep);

// ---------------------------------------------------------------------------
// Estimation

/// One fitted replication. Column order of estimate_rows.csv:
///   scenario,seed,rep,n,status,converged,iterations,sigma_hat,delta_hat,
///   alpha_hat,loglik,score_norm,err_sigma,err_delta,err_alpha,stud_sigma,
///   stud_delta,stud_alpha,half_sigma,half_delta,half_alpha
/// err = u_n(theta0)^-1 (theta_hat - theta0), stud = I(theta_hat)^(1/2) err
/// (the path information for the SDE), half = 1.96 standard errors of
/// theta_hat from the observed information.
struct EstimateRow {
  std::string scenario;
  std::uint64_t seed = 0;
  long rep = 0, n = 0;
  std::string status;
  int converged = 0, iterations = 0;
  Eigen::Vector3d theta_hat = Eigen::Vector3d::Constant(NAN);
  double loglik = NAN, score_norm = NAN;
  Eigen::Vector3d err = Eigen::Vector3d::Constant(NAN), stud = err, half = err;
};

/// Aggregates over the converged rows of one n.
struct EstimateAggregate {
  long n = 0, reps = 0, converged = 0;
  double convergence_rate = 0.0;
  Eigen::Vector3d mean_err, se_err, mean_stud, se_stud, coverage, normality_p;
  Eigen::Matrix3d cov_err, cov_stud, reference;  // reference: I(theta0)^-1 (Levy) or identity (SDE, studentized)
  double cov_deviation = NAN;  // |cov - reference|_F / |reference|_F
};

struct EstimateRecord {
  std::string scenario;
  std::vector<EstimateRow> rows;  // sorted by (n, rep)
  std::vector<EstimateAggregate> aggregates;
};

EstimateRow fit_replication(const Scenario& s, const PathSample& data, long rep);
EstimateRecord run_estimate(const Scenario& s);
EstimateRecord estimate_from_files(const Scenario& s, const std::vector<std::string>& files);
std::vector<EstimateAggregate> aggregate_rows(const Scenario& s, const std::vector<EstimateRow>& rows);

std::string rows_csv(const std::vector<EstimateRow>& rows);
std::vector<EstimateRow> parse_rows_csv(const std::string& text);

// ---------------------------------------------------------------------------
// Score moments and LAN remainder

struct ScoreAggregate {
  long n = 0, reps = 0;
  Eigen::Vector3d mean, se;
  Eigen::Matrix3d cov, info;
  double frobenius = NAN;  // |cov - I(theta0)|_F
};

/// u_n^T G_n(theta0) per replication of the Levy model.
Eigen::MatrixXd score_samples(const Scenario& s, long n);
ScoreAggregate score_aggregate(const Theta& theta0, long n, const Eigen::MatrixXd& samples);

struct LanRow {
  long n, rep, h_index;
  double remainder;
};
struct LanAggregate {
  long n, h_index;
  Eigen::Vector3d h;
  bool in_domain;
  double mean, sd, se;
};
struct LanRecord {
  std::string scenario;
  std::vector<LanRow> rows;
  std::vector<LanAggregate> aggregates;
  std::vector<ScoreAggregate> score;
};

/// ln L(theta0 + u_n h) - ln L(theta0) - h^T u_n^T G_n + h^T I(theta0) h / 2.
LanRecord run_lan_check(const Scenario& s);

// ---------------------------------------------------------------------------
// Density and asymptotic diagnostics

struct DensityCheck {
  double alpha, w;
  double norm_error;            // |int f - 1|
  double mean_d1, mean_d2;      // int f^(1,0,0), int f^(0,1,0)
  double mean_alpha;            // int f^(0,0,1)
  double envelope_lo, envelope_hi;  // range of f / (phi + w^alpha psi0) on a lattice
  bool pass;
};
DensityCheck density_check(double alpha, double w);
std::vector<DensityCheck> run_density_validate(const Scenario& s);

struct ToutRow {
  double alpha;
  long n;
  ToutCheck check;
};
/// Jump-score integrals int h^2/f, int h l/f, int l^2/f against their limits
/// for theta0 and every n in the scenario.
std::vector<ToutRow> run_tout_check(const Scenario& s);

struct TvRow {
  double alpha;
  long n;
  long samples;
  double l1;
};
struct TvRecord {
  std::vector<TvRow> rows;
  std::vector<double> alphas, slopes, targets;  // per alpha: fitted and predicted slope
};
/// Kernel-density L1 distance between n^(1/alpha) L_(1/n) and the coupled
/// stable variable, for every alpha and n of the scenario.
double tv_distance(double alpha, const TemperingSpec& tau, long n, long samples, std::uint64_t seed);
TvRecord run_tv_study(const Scenario& s);

// ---------------------------------------------------------------------------
// Command front-ends: all write into s.outputs and finish with manifest.txt.

void cmd_simulate(const Scenario& s);
void cmd_estimate(const Scenario& s, const std::vector<std::string>& data_files = {});
/// Joins per-shard estimate_rows.csv files into one output directory.
void cmd_merge(const Scenario& s, const std::vector<std::string>& shard_dirs);
void cmd_lan_check(const Scenario& s);
/// Return false when some check fails (results are still written).
bool cmd_density_validate(const Scenario& s);
bool cmd_tout_check(const Scenario& s);
bool cmd_tv_study(const Scenario& s);

/// Path files: '#'-comment header lines "# scenario <hash>", "# seed <u64>",
/// "# rep <k>", then "n <n>", then one "x dx" pair per line (level before
/// the step and increment). Files holding only increments are accepted
/// too; the levels then start at 0.
struct PathFile {
  PathSample path;
  long rep = -1;
  std::string scenario;
};
PathFile read_path_file(const std::string& path);
void write_path_file(const std::string& path, const PathSample& p, long rep, const std::string& scenario,
                     bool with_values);

/// manifest.txt: "<fnv1a hex>  <file>" for each listed file, sorted by name.
void write_manifest(const std::string& dir, std::vector<std::string> files);

}  // namespace levylan
