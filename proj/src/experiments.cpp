#include "levylan/experiments.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "levylan/quadrature.hpp"
#include "levylan/special.hpp"
#include "levylan/stats.hpp"

namespace levylan {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void parallel_for(long count, int workers, const std::function<void(long)>& body) {
  if (count <= 0) return;
  const int k = static_cast<int>(std::min<long>(std::max(1, workers), count));
  if (k == 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < k; ++t)
    pool.emplace_back([&] {
      for (long i; (i = next.fetch_add(1)) < count;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

std::uint64_t rep_seed(std::uint64_t master, long n, long rep) {
  return replication_seed(master, (static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint64_t>(rep));
}

PathSample simulate_replication(const Scenario& s, long n, long rep) {
  const std::uint64_t seed = rep_seed(s.seed, n, rep);
  Rng rng(seed);
  if (s.model == Scenario::Model::levy) return sample_levy_path(s.theta0, n, rng, seed);
  return sample_sde_path(default_sde_model(), s.theta0, s.tau, n, s.m, rng, 0.0, seed);
}

namespace {

// ---------------------------------------------------------------------------
// small helpers

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

// Identity of the results: execution settings stripped.
std::string canonical_scenario(const Scenario& s) {
  Scenario t = s;
  t.workers = 1;
  t.shard_index = 0;
  t.shard_count = 1;
  t.outputs = ".";
  return serialize(t);
}

std::vector<std::pair<long, long>> shard_jobs(const Scenario& s) {
  std::vector<std::pair<long, long>> jobs;
  for (long n : s.n_list)
    for (long r = 0; r < s.reps; ++r)
      if (r % s.shard_count == s.shard_index) jobs.emplace_back(n, r);
  return jobs;
}

ordered_json vec_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json mat_json(const Eigen::MatrixXd& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

std::string csv_double(double v) { return std::isnan(v) ? "nan" : format_double(v); }

double parse_double(const std::string& s) {
  if (s == "nan") return NAN;
  return std::strtod(s.c_str(), nullptr);
}

// Symmetric square root of a positive semi-definite matrix; NaN otherwise.
Eigen::Matrix3d sqrt_psd(const Eigen::Matrix3d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (m + m.transpose()));
  if (es.eigenvalues().minCoeff() < 0.0) return Eigen::Matrix3d::Constant(NAN);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

Theta initial_value(const Scenario& s, const PathSample& data, const SdeModel& model) {
  if (s.init == "truth") return s.theta0;
  if (s.init == "perturbed") {
    // relative offset +-perturb per coordinate, signs from the replication seed
    Rng rng(data.seed ^ 0x6a09e667f3bcc909ULL);
    Eigen::Vector3d v = s.theta0.vec();
    for (int i = 0; i < 3; ++i) v[i] *= 1.0 + ((rng() & 1U) ? s.perturb : -s.perturb);
    return project(v);
  }
  return s.model == Scenario::Model::levy ? initial_levy(data) : initial_sde(data, model);
}

}  // namespace

// ---------------------------------------------------------------------------
// Estimation

EstimateRow fit_replication(const Scenario& s, const PathSample& data, long rep) {
  EstimateRow row;
  row.scenario = scenario_hash(s);
  row.seed = data.seed;
  row.rep = rep;
  row.n = data.n;
  const SdeModel model = default_sde_model();
  FitOptions opt;
  opt.tol = s.tol;
  opt.max_iter = s.max_iter;
  EstimationResult r;
  try {
    const Theta init = initial_value(s, data, model);
    r = s.model == Scenario::Model::levy ? mle_levy(data, init, opt) : qmle_sde(data, model, init, opt);
  } catch (const std::exception& e) {
    r.status = FitStatus::failed;
    r.message = e.what();
  }
  row.status = to_string(r.status);
  row.converged = r.converged ? 1 : 0;
  row.iterations = r.iterations;
  if (r.status == FitStatus::failed) return row;

  row.theta_hat = r.theta_hat.vec();
  row.loglik = r.loglik;
  row.score_norm = r.score_norm;
  const Eigen::Vector3d d = row.theta_hat - s.theta0.vec();
  row.err = rate_matrix(s.theta0, data.n).inverse() * d;
  row.stud = sqrt_psd(r.info_used.M) * row.err;
  const Eigen::Matrix3d u = rate_matrix(r.theta_hat, data.n).M;
  const Eigen::Vector3d var = (u * r.cov_hat * u.transpose()).diagonal();
  for (int i = 0; i < 3; ++i) row.half[i] = var[i] >= 0.0 ? 1.96 * std::sqrt(var[i]) : NAN;
  return row;
}

std::vector<EstimateAggregate> aggregate_rows(const Scenario& s, const std::vector<EstimateRow>& rows) {
  std::map<long, std::vector<const EstimateRow*>> by_n;
  for (const auto& r : rows) by_n[r.n].push_back(&r);
  std::vector<EstimateAggregate> out;
  for (const auto& [n, list] : by_n) {
    EstimateAggregate a;
    a.n = n;
    a.reps = static_cast<long>(list.size());
    std::vector<const EstimateRow*> ok;
    for (const auto* r : list)
      if (r->converged) ok.push_back(r);
    a.converged = static_cast<long>(ok.size());
    a.convergence_rate = double(a.converged) / double(a.reps);
    a.mean_err = a.se_err = a.mean_stud = a.se_stud = a.coverage = a.normality_p = Eigen::Vector3d::Constant(NAN);
    a.cov_err = a.cov_stud = Eigen::Matrix3d::Constant(NAN);
    a.reference = Eigen::Matrix3d::Identity();
    if (s.model == Scenario::Model::levy) a.reference = info_levy(s.theta0).M.inverse();
    if (ok.size() >= 2) {
      Eigen::MatrixXd E(ok.size(), 3), S(ok.size(), 3);
      Eigen::Vector3d cover = Eigen::Vector3d::Zero();
      for (std::size_t i = 0; i < ok.size(); ++i) {
        E.row(static_cast<Eigen::Index>(i)) = ok[i]->err.transpose();
        S.row(static_cast<Eigen::Index>(i)) = ok[i]->stud.transpose();
        const Eigen::Vector3d miss = (ok[i]->theta_hat - s.theta0.vec()).cwiseAbs();
        for (int j = 0; j < 3; ++j) cover[j] += miss[j] <= ok[i]->half[j] ? 1.0 : 0.0;
      }
      a.mean_err = column_mean(E);
      a.se_err = column_se(E);
      a.cov_err = sample_cov(E);
      a.mean_stud = column_mean(S);
      a.se_stud = column_se(S);
      a.cov_stud = sample_cov(S);
      a.coverage = cover / double(ok.size());
      if (ok.size() >= 20)
        for (int j = 0; j < 3; ++j) {
          std::vector<double> col(ok.size());
          for (std::size_t i = 0; i < ok.size(); ++i) col[i] = S(static_cast<Eigen::Index>(i), j);
          a.normality_p[j] = dagostino_pearson(col).p_value;
        }
      const Eigen::Matrix3d& cov = s.model == Scenario::Model::levy ? a.cov_err : a.cov_stud;
      a.cov_deviation = (cov - a.reference).norm() / a.reference.norm();
    }
    out.push_back(a);
  }
  return out;
}

namespace {

bool row_order(const EstimateRow& a, const EstimateRow& b) { return a.n != b.n ? a.n < b.n : a.rep < b.rep; }

EstimateRecord make_record(const Scenario& s, std::vector<EstimateRow> rows) {
  std::sort(rows.begin(), rows.end(), row_order);
  EstimateRecord rec;
  rec.scenario = scenario_hash(s);
  rec.aggregates = aggregate_rows(s, rows);
  rec.rows = std::move(rows);
  return rec;
}

}  // namespace

EstimateRecord run_estimate(const Scenario& s) {
  s.validate();
  const auto jobs = shard_jobs(s);
  std::vector<EstimateRow> rows(jobs.size());
  parallel_for(static_cast<long>(jobs.size()), s.workers, [&](long j) {
    const auto [n, rep] = jobs[static_cast<std::size_t>(j)];
    PathSample path;
    try {
      path = simulate_replication(s, n, rep);
    } catch (const Error& e) {
      // simulation failures are recorded like fit failures
      EstimateRow r;
      r.scenario = scenario_hash(s);
      r.seed = rep_seed(s.seed, n, rep);
      r.rep = rep;
      r.n = n;
      r.status = "simulation_failed";
      rows[static_cast<std::size_t>(j)] = r;
      return;
    }
    rows[static_cast<std::size_t>(j)] = fit_replication(s, path, rep);
  });
  return make_record(s, std::move(rows));
}

EstimateRecord estimate_from_files(const Scenario& s, const std::vector<std::string>& files) {
  std::vector<EstimateRow> rows(files.size());
  parallel_for(static_cast<long>(files.size()), s.workers, [&](long j) {
    const PathFile pf = read_path_file(files[static_cast<std::size_t>(j)]);
    rows[static_cast<std::size_t>(j)] = fit_replication(s, pf.path, pf.rep >= 0 ? pf.rep : j);
  });
  return make_record(s, std::move(rows));
}

std::string rows_csv(const std::vector<EstimateRow>& rows) {
  std::ostringstream o;
  o << "scenario,seed,rep,n,status,converged,iterations,sigma_hat,delta_hat,alpha_hat,loglik,score_norm,"
       "err_sigma,err_delta,err_alpha,stud_sigma,stud_delta,stud_alpha,half_sigma,half_delta,half_alpha\n";
  for (const auto& r : rows) {
    o << r.scenario << ',' << r.seed << ',' << r.rep << ',' << r.n << ',' << r.status << ',' << r.converged << ','
      << r.iterations;
    for (double v : {r.theta_hat[0], r.theta_hat[1], r.theta_hat[2], r.loglik, r.score_norm})
      o << ',' << csv_double(v);
    for (const auto* v : {&r.err, &r.stud, &r.half})
      for (int i = 0; i < 3; ++i) o << ',' << csv_double((*v)[i]);
    o << '\n';
  }
  return o.str();
}

std::vector<EstimateRow> parse_rows_csv(const std::string& text) {
  std::vector<EstimateRow> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string item;
    std::istringstream ls(line);
    while (std::getline(ls, item, ',')) f.push_back(item);
    if (f.size() != 21) throw Error("estimate rows: expected 21 columns, got " + std::to_string(f.size()));
    EstimateRow r;
    r.scenario = f[0];
    r.seed = std::strtoull(f[1].c_str(), nullptr, 10);
    r.rep = std::stol(f[2]);
    r.n = std::stol(f[3]);
    r.status = f[4];
    r.converged = std::stoi(f[5]);
    r.iterations = std::stoi(f[6]);
    for (int i = 0; i < 3; ++i) r.theta_hat[i] = parse_double(f[static_cast<std::size_t>(7 + i)]);
    r.loglik = parse_double(f[10]);
    r.score_norm = parse_double(f[11]);
    for (int i = 0; i < 3; ++i) {
      r.err[i] = parse_double(f[static_cast<std::size_t>(12 + i)]);
      r.stud[i] = parse_double(f[static_cast<std::size_t>(15 + i)]);
      r.half[i] = parse_double(f[static_cast<std::size_t>(18 + i)]);
    }
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Score moments and LAN

Eigen::MatrixXd score_samples(const Scenario& s, long n) {
  Eigen::MatrixXd out(s.reps, 3);
  const Eigen::Matrix3d uT = rate_matrix(s.theta0, n).transpose();
  parallel_for(s.reps, s.workers, [&](long r) {
    Scenario lv = s;
    lv.model = Scenario::Model::levy;
    const PathSample p = simulate_replication(lv, n, r);
    out.row(r) = (uT * score_levy(p, s.theta0)).transpose();
  });
  return out;
}

ScoreAggregate score_aggregate(const Theta& theta0, long n, const Eigen::MatrixXd& samples) {
  ScoreAggregate a;
  a.n = n;
  a.reps = samples.rows();
  a.mean = column_mean(samples);
  a.se = column_se(samples);
  a.cov = sample_cov(samples);
  a.info = info_levy(theta0).M;
  a.frobenius = (a.cov - a.info).norm();
  return a;
}

LanRecord run_lan_check(const Scenario& s) {
  s.validate();
  LanRecord rec;
  rec.scenario = scenario_hash(s);
  const Eigen::Matrix3d I = info_levy(s.theta0).M;
  Scenario lv = s;
  lv.model = Scenario::Model::levy;
  for (long n : s.n_list) {
    const RateMatrix u = rate_matrix(s.theta0, n);
    const long H = static_cast<long>(s.h_list.size());
    std::vector<Theta> th(static_cast<std::size_t>(H));
    std::vector<bool> ok(static_cast<std::size_t>(H));
    for (long k = 0; k < H; ++k) {
      const Eigen::Vector3d v = s.theta0.vec() + u.M * s.h_list[static_cast<std::size_t>(k)];
      ok[static_cast<std::size_t>(k)] = v[0] > 0.0 && v[1] > 0.0 && v[2] >= kAlphaMin && v[2] <= kAlphaMax;
      if (ok[static_cast<std::size_t>(k)]) th[static_cast<std::size_t>(k)] = Theta::from(v);
    }
    Eigen::MatrixXd scores(s.reps, 3);
    Eigen::MatrixXd rem = Eigen::MatrixXd::Constant(s.reps, H, NAN);
    parallel_for(s.reps, s.workers, [&](long r) {
      const PathSample p = simulate_replication(lv, n, r);
      const Objective o = levy_objective(p, s.theta0, false);
      const Eigen::Vector3d g = u.transpose() * o.grad;
      scores.row(r) = g.transpose();
      for (long k = 0; k < H; ++k) {
        if (!ok[static_cast<std::size_t>(k)]) continue;
        const Eigen::Vector3d& h = s.h_list[static_cast<std::size_t>(k)];
        rem(r, k) = loglik_levy(p, th[static_cast<std::size_t>(k)]) - o.value - h.dot(g) + 0.5 * h.dot(I * h);
      }
    });
    for (long k = 0; k < H; ++k) {
      LanAggregate a{n, k, s.h_list[static_cast<std::size_t>(k)], ok[static_cast<std::size_t>(k)], NAN, NAN, NAN};
      if (a.in_domain) {
        a.mean = rem.col(k).mean();
        a.sd = s.reps > 1 ? std::sqrt((rem.col(k).array() - a.mean).square().sum() / double(s.reps - 1)) : 0.0;
        a.se = a.sd / std::sqrt(double(s.reps));
        for (long r = 0; r < s.reps; ++r) rec.rows.push_back({n, r, k, rem(r, k)});
      }
      rec.aggregates.push_back(a);
    }
    if (s.reps >= 2) rec.score.push_back(score_aggregate(s.theta0, n, scores));
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Density and asymptotic diagnostics

DensityCheck density_check(double alpha, double w) {
  const ConvolutionKernel kern(alpha, w);
  auto integrand = [&](double s) {
    const auto v = kern.eval(std::sinh(s)).v;
    return Eigen::Array4d(Eigen::Array4d(v[F000], v[F100], v[F010], v[F001]) * (2.0 * std::cosh(s)));
  };
  QuadOptions opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-11;
  const double y_end = 1e14, s_end = std::asinh(y_end);
  Eigen::Array4d total = Eigen::Array4d::Zero();
  for (double s0 = 0.0; s0 < s_end; s0 += 0.5) total += integrate(integrand, s0, std::min(s_end, s0 + 0.5), opt);
  // remaining mass of the c_alpha w^alpha |y|^(-1-alpha) tail
  total[0] += 2.0 * c_alpha(AlphaIndex(alpha)) * std::pow(w, alpha) * std::pow(y_end, -alpha) / alpha;

  DensityCheck d{alpha, w, std::abs(total[0] - 1.0), total[1], total[2], total[3], INFINITY, 0.0, false};
  const AlphaIndex ai(alpha);
  for (double s = 0.0; s <= 30.0; s += 0.25) {
    const double y = std::sinh(s);
    const double env = normal_pdf(y) + std::pow(w, alpha) * psi(ai, 0, y);
    const double r = kern.eval(y).v[F000] / env;
    d.envelope_lo = std::min(d.envelope_lo, r);
    d.envelope_hi = std::max(d.envelope_hi, r);
  }
  d.pass = d.norm_error <= 1e-6 && std::abs(d.mean_d1) <= 1e-6 && std::abs(d.mean_d2) <= 1e-6 &&
           std::abs(d.mean_alpha) <= 1e-6 && d.envelope_lo > 0.0 && std::isfinite(d.envelope_hi);
  return d;
}

std::vector<DensityCheck> run_density_validate(const Scenario& s) {
  std::vector<std::pair<double, double>> grid;
  for (double a : s.alphas)
    for (double w : s.ws) grid.emplace_back(a, w);
  std::vector<DensityCheck> out(grid.size());
  parallel_for(static_cast<long>(grid.size()), s.workers, [&](long i) {
    out[static_cast<std::size_t>(i)] = density_check(grid[static_cast<std::size_t>(i)].first, grid[static_cast<std::size_t>(i)].second);
  });
  return out;
}

std::vector<ToutRow> run_tout_check(const Scenario& s) {
  std::vector<ToutRow> out(s.n_list.size());
  parallel_for(static_cast<long>(s.n_list.size()), s.workers, [&](long i) {
    const long n = s.n_list[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = {s.theta0.alpha, n, prop_tout_check(s.theta0, n)};
  });
  return out;
}

double tv_distance(double alpha, const TemperingSpec& tau, long n, long samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("tv_distance: need samples");
  const LocallyStableSampler sampler(AlphaIndex(alpha), tau, 1.0 / double(n));
  const double inv = 1.0 / sampler.kappa();
  // Both variables share the draw, so only moved samples leave a trace in
  // the signed count: +1 at the tempered value, -1 at the stable one.
  constexpr double lo = -50.0, hi = 50.0, h = 0.1;
  constexpr int bins = 4000;
  const double dx = (hi - lo) / bins;
  std::vector<long long> count(bins, 0);
  long long below = 0, above = 0;
  auto add = [&](double v, int sign) {
    const double k = std::floor((v - lo) / dx);
    if (k < 0)
      below += sign;
    else if (k >= bins)
      above += sign;
    else
      count[static_cast<std::size_t>(k)] += sign;
  };
  Rng rng(seed);
  for (long i = 0; i < samples; ++i) {
    const auto d = sampler.draw(rng);
    add(d.tempered * inv, 1);
    add(d.stable * inv, -1);
  }
  std::vector<double> diff(bins);
  for (int k = 0; k < bins; ++k) diff[static_cast<std::size_t>(k)] = double(count[static_cast<std::size_t>(k)]) / double(samples);
  return smoothed_l1(diff, dx, h) + double(std::llabs(below) + std::llabs(above)) / double(samples);
}

TvRecord run_tv_study(const Scenario& s) {
  TvRecord rec;
  std::vector<std::pair<std::size_t, long>> jobs;
  for (std::size_t a = 0; a < s.alphas.size(); ++a)
    for (long n : s.n_list) jobs.emplace_back(a, n);
  rec.rows.resize(jobs.size());
  parallel_for(static_cast<long>(jobs.size()), s.workers, [&](long j) {
    const auto [a, n] = jobs[static_cast<std::size_t>(j)];
    const double alpha = s.alphas[a];
    rec.rows[static_cast<std::size_t>(j)] = {alpha, n, s.samples,
                                             tv_distance(alpha, s.tau, n, s.samples, rep_seed(s.seed, n, static_cast<long>(a)))};
  });
  for (std::size_t a = 0; a < s.alphas.size(); ++a) {
    std::vector<double> x, y;
    for (const auto& r : rec.rows)
      if (r.alpha == s.alphas[a]) x.push_back(double(r.n)), y.push_back(r.l1);
    const double alpha = s.alphas[a];
    rec.alphas.push_back(alpha);
    rec.slopes.push_back(x.size() >= 2 ? loglog_slope(x, y) : NAN);
    rec.targets.push_back(alpha <= 1.0 ? -1.0 : -1.0 / alpha);
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Files

void write_path_file(const std::string& path, const PathSample& p, long rep, const std::string& scenario,
                     bool with_values) {
  std::string out;
  out.reserve(static_cast<std::size_t>(p.n) * 48 + 128);
  out += "# scenario " + scenario + "\n# seed " + std::to_string(p.seed) + "\n# rep " + std::to_string(rep) + "\n";
  out += "n " + std::to_string(p.n) + "\n";
  for (long i = 0; i < p.n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (with_values) out += format_double(p.values[k]) + ' ';
    out += format_double(p.increments[k]) + '\n';
  }
  write_text(path, out);
}

PathFile read_path_file(const std::string& path) {
  std::istringstream in(read_text(path));
  PathFile pf;
  std::string line;
  long n = -1;
  std::vector<double> x, dx;
  bool with_values = false;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key, value;
      ls >> key >> value;
      if (key == "scenario") pf.scenario = value;
      if (key == "seed") pf.path.seed = std::strtoull(value.c_str(), nullptr, 10);
      if (key == "rep") pf.rep = std::stol(value);
      continue;
    }
    std::istringstream ls(line);
    if (n < 0) {
      std::string key;
      if (!(ls >> key >> n) || key != "n" || n < 1) throw Error(path + ":" + std::to_string(lineno) + ": expected 'n <count>'");
      continue;
    }
    std::vector<double> cols;
    for (std::string tok; ls >> tok;) cols.push_back(parse_double(tok));
    if (cols.empty() || cols.size() > 2) throw Error(path + ":" + std::to_string(lineno) + ": expected 1 or 2 columns");
    if (dx.empty()) with_values = cols.size() == 2;
    if ((cols.size() == 2) != with_values) throw Error(path + ":" + std::to_string(lineno) + ": inconsistent columns");
    if (with_values) x.push_back(cols[0]);
    dx.push_back(cols.back());
  }
  if (n < 0 || static_cast<long>(dx.size()) != n)
    throw Error(path + ": header announces " + std::to_string(n) + " increments, found " + std::to_string(dx.size()));
  const std::uint64_t seed = pf.path.seed;
  if (with_values) {
    pf.path.n = n;
    pf.path.values = x;
    pf.path.values.push_back(x.back() + dx.back());
    pf.path.increments = std::move(dx);
  } else {
    pf.path = PathSample::from_increments(std::move(dx));
  }
  pf.path.seed = seed;
  return pf;
}

void write_manifest(const std::string& dir, std::vector<std::string> files) {
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& f : files) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(read_text(join(dir, f))));
    out += std::string(buf) + "  " + f + "\n";
  }
  write_text(join(dir, "manifest.txt"), out);
}

// ---------------------------------------------------------------------------
// Commands

namespace {

void write_estimate_outputs(const Scenario& s, const EstimateRecord& rec) {
  ensure_dir(s.outputs);
  write_text(join(s.outputs, "scenario.txt"), canonical_scenario(s));
  write_text(join(s.outputs, "estimate_rows.csv"), rows_csv(rec.rows));
  ordered_json j;
  j["scenario"] = rec.scenario;
  j["model"] = s.model == Scenario::Model::levy ? "levy" : "sde";
  j["theta0"] = vec_json(s.theta0.vec());
  j["rows"] = rec.rows.size();
  ordered_json aggs = ordered_json::array();
  for (const auto& a : rec.aggregates) {
    ordered_json g;
    g["n"] = a.n;
    g["reps"] = a.reps;
    g["converged"] = a.converged;
    g["convergence_rate"] = a.convergence_rate;
    g["failure_rate"] = 1.0 - a.convergence_rate;
    g["mean_err"] = vec_json(a.mean_err);
    g["se_err"] = vec_json(a.se_err);
    g["cov_err"] = mat_json(a.cov_err);
    g["reference"] = mat_json(a.reference);
    g["reference_kind"] = s.model == Scenario::Model::levy ? "inverse I(theta0) vs cov_err" : "identity vs cov_stud";
    g["cov_deviation"] = a.cov_deviation;
    g["mean_stud"] = vec_json(a.mean_stud);
    g["se_stud"] = vec_json(a.se_stud);
    g["cov_stud"] = mat_json(a.cov_stud);
    g["coverage95"] = vec_json(a.coverage);
    g["normality_p"] = vec_json(a.normality_p);
    aggs.push_back(g);
  }
  j["aggregates"] = aggs;
  write_text(join(s.outputs, "estimate_summary.json"), j.dump(2) + "\n");
  write_manifest(s.outputs, {"scenario.txt", "estimate_rows.csv", "estimate_summary.json"});
}

}  // namespace

void cmd_simulate(const Scenario& s) {
  s.validate();
  ensure_dir(s.outputs);
  const auto jobs = shard_jobs(s);
  const std::string hash = scenario_hash(s);
  std::vector<std::string> names(jobs.size());
  parallel_for(static_cast<long>(jobs.size()), s.workers, [&](long j) {
    const auto [n, rep] = jobs[static_cast<std::size_t>(j)];
    const PathSample p = simulate_replication(s, n, rep);
    char name[64];
    std::snprintf(name, sizeof name, "path_n%ld_r%06ld.txt", n, rep);
    write_path_file(join(s.outputs, name), p, rep, hash, true);
    names[static_cast<std::size_t>(j)] = name;
  });
  write_text(join(s.outputs, "scenario.txt"), canonical_scenario(s));
  names.push_back("scenario.txt");
  write_manifest(s.outputs, names);
}

void cmd_estimate(const Scenario& s, const std::vector<std::string>& data_files) {
  s.validate();
  const EstimateRecord rec = data_files.empty() ? run_estimate(s) : estimate_from_files(s, data_files);
  write_estimate_outputs(s, rec);
}

void cmd_merge(const Scenario& s, const std::vector<std::string>& shard_dirs) {
  std::vector<EstimateRow> rows;
  for (const auto& d : shard_dirs) {
    auto part = parse_rows_csv(read_text(join(d, "estimate_rows.csv")));
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::sort(rows.begin(), rows.end(), row_order);
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].n == rows[i - 1].n && rows[i].rep == rows[i - 1].rep)
      throw Error("merge: replication " + std::to_string(rows[i].rep) + " at n = " + std::to_string(rows[i].n) +
                  " appears twice");
  const std::string hash = scenario_hash(s);
  std::map<long, long> count;
  for (const auto& r : rows) {
    if (r.scenario != hash) throw Error("merge: rows of scenario " + r.scenario + " do not match " + hash);
    ++count[r.n];
  }
  for (long n : s.n_list)
    if (count[n] != s.reps) throw Error("merge: " + std::to_string(count[n]) + " of " + std::to_string(s.reps) +
                                        " replications at n = " + std::to_string(n));
  write_estimate_outputs(s, make_record(s, std::move(rows)));
}

void cmd_lan_check(const Scenario& s) {
  const LanRecord rec = run_lan_check(s);
  ensure_dir(s.outputs);
  write_text(join(s.outputs, "scenario.txt"), canonical_scenario(s));
  std::ostringstream rows;
  rows << "scenario,seed,n,rep,h_index,remainder\n";
  for (const auto& r : rec.rows)
    rows << rec.scenario << ',' << rep_seed(s.seed, r.n, r.rep) << ',' << r.n << ',' << r.rep << ',' << r.h_index << ','
         << csv_double(r.remainder) << '\n';
  write_text(join(s.outputs, "lan_rows.csv"), rows.str());
  std::ostringstream agg;
  agg << "scenario,seed,n,h_index,h_sigma,h_delta,h_alpha,in_domain,mean,sd,se\n";
  for (const auto& a : rec.aggregates)
    agg << rec.scenario << ',' << s.seed << ',' << a.n << ',' << a.h_index << ',' << csv_double(a.h[0]) << ','
        << csv_double(a.h[1]) << ',' << csv_double(a.h[2]) << ',' << (a.in_domain ? 1 : 0) << ','
        << csv_double(a.mean) << ',' << csv_double(a.sd) << ',' << csv_double(a.se) << '\n';
  write_text(join(s.outputs, "lan_summary.csv"), agg.str());
  ordered_json j;
  j["scenario"] = rec.scenario;
  ordered_json sc = ordered_json::array();
  for (const auto& a : rec.score) {
    ordered_json g;
    g["n"] = a.n;
    g["reps"] = a.reps;
    g["mean"] = vec_json(a.mean);
    g["se"] = vec_json(a.se);
    g["cov"] = mat_json(a.cov);
    g["info"] = mat_json(a.info);
    g["frobenius"] = a.frobenius;
    sc.push_back(g);
  }
  j["score"] = sc;
  write_text(join(s.outputs, "score_summary.json"), j.dump(2) + "\n");
  write_manifest(s.outputs, {"scenario.txt", "lan_rows.csv", "lan_summary.csv", "score_summary.json"});
}

bool cmd_density_validate(const Scenario& s) {
  const auto checks = run_density_validate(s);
  ensure_dir(s.outputs);
  const std::string hash = scenario_hash(s);
  std::ostringstream o;
  o << "scenario,alpha,w,norm_error,int_f100,int_f010,int_f001,envelope_lo,envelope_hi,pass\n";
  bool all = true;
  for (const auto& d : checks) {
    o << hash << ',' << csv_double(d.alpha) << ',' << csv_double(d.w) << ',' << csv_double(d.norm_error) << ','
      << csv_double(d.mean_d1) << ',' << csv_double(d.mean_d2) << ',' << csv_double(d.mean_alpha) << ','
      << csv_double(d.envelope_lo) << ',' << csv_double(d.envelope_hi) << ',' << (d.pass ? "PASS" : "FAIL") << '\n';
    all = all && d.pass;
  }
  write_text(join(s.outputs, "scenario.txt"), canonical_scenario(s));
  write_text(join(s.outputs, "density_validate.csv"), o.str());
  write_manifest(s.outputs, {"scenario.txt", "density_validate.csv"});
  return all;
}

bool cmd_tout_check(const Scenario& s) {
  const auto rows = run_tout_check(s);
  ensure_dir(s.outputs);
  const std::string hash = scenario_hash(s);
  std::ostringstream o;
  o << "scenario,sigma,delta,alpha,n,integral1,integral2,integral3,limit1,limit2,limit3,ratio1,ratio2,ratio3\n";
  for (const auto& r : rows) {
    o << hash << ',' << csv_double(s.theta0.sigma) << ',' << csv_double(s.theta0.delta) << ',' << csv_double(r.alpha)
      << ',' << r.n;
    for (const auto* v : {&r.check.integral, &r.check.limit, &r.check.ratio})
      for (double x : *v) o << ',' << csv_double(x);
    o << '\n';
  }
  // band at every n, and the ratios closer to 1 at the largest n than at the smallest
  bool pass = !rows.empty();
  const auto lo = std::min_element(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.n < b.n; });
  const auto hi = std::max_element(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.n < b.n; });
  for (const auto& r : rows)
    for (double x : r.check.ratio) pass = pass && x >= 0.5 && x <= 1.5;
  if (rows.size() >= 2)
    for (std::size_t k = 0; k < 3; ++k)
      pass = pass && std::abs(hi->check.ratio[k] - 1.0) < std::abs(lo->check.ratio[k] - 1.0);
  o << "# trend " << (pass ? "PASS" : "FAIL") << '\n';
  write_text(join(s.outputs, "scenario.txt"), canonical_scenario(s));
  write_text(join(s.outputs, "tout_check.csv"), o.str());
  write_manifest(s.outputs, {"scenario.txt", "tout_check.csv"});
  return pass;
}

bool cmd_tv_study(const Scenario& s) {
  const TvRecord rec = run_tv_study(s);
  ensure_dir(s.outputs);
  const std::string hash = scenario_hash(s);
  std::ostringstream o;
  o << "scenario,seed,alpha,n,samples,l1\n";
  for (std::size_t j = 0; j < rec.rows.size(); ++j) {
    const auto& r = rec.rows[j];
    const auto a = static_cast<long>(std::find(s.alphas.begin(), s.alphas.end(), r.alpha) - s.alphas.begin());
    o << hash << ',' << rep_seed(s.seed, r.n, a) << ',' << csv_double(r.alpha) << ',' << r.n << ',' << r.samples << ','
      << csv_double(r.l1) << '\n';
  }
  bool pass = true;
  std::ostringstream sl;
  sl << "scenario,alpha,slope,target,pass\n";
  for (std::size_t a = 0; a < rec.alphas.size(); ++a) {
    const bool ok = std::abs(rec.slopes[a] - rec.targets[a]) <= 0.3;
    pass = pass && ok;
    sl << hash << ',' << csv_double(rec.alphas[a]) << ',' << csv_double(rec.slopes[a]) << ','
       << csv_double(rec.targets[a]) << ',' << (ok ? "PASS" : "FAIL") << '\n';
  }
  write_text(join(s.outputs, "scenario.txt"), canonical_scenario(s));
  write_text(join(s.outputs, "tv_rows.csv"), o.str());
  write_text(join(s.outputs, "tv_slopes.csv"), sl.str());
  write_manifest(s.outputs, {"scenario.txt", "tv_rows.csv", "tv_slopes.csv"});
  return pass;
}

}  // namespace levylan
