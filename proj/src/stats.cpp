#include "levylan/stats.hpp"

#include <algorithm>
#include <cmath>

#include "levylan/errors.hpp"
#include "levylan/special.hpp"

namespace levylan {

double kolmogorov_survival(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

TestResult ks_test(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw DomainError("ks_test: empty sample");
  std::sort(x.begin(), x.end());
  const double n = double(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, (i + 1) / n - F, F - i / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)};
}

TestResult ks_test2(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) throw DomainError("ks_test2: empty sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = double(x.size()), ny = double(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(i / nx - j / ny));
  }
  const double ne = std::sqrt(nx * ny / (nx + ny));
  return {d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d)};
}

TestResult dagostino_pearson(const std::vector<double>& x) {
  const double n = double(x.size());
  if (n < 8) throw DomainError("dagostino_pearson: need at least 8 observations");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n, m3 /= n, m4 /= n;

  // skewness
  const double b1 = m3 / std::pow(m2, 1.5);
  const double Y = b1 * std::sqrt((n + 1) * (n + 3) / (6 * (n - 2)));
  const double beta2 = 3 * (n * n + 27 * n - 70) * (n + 1) * (n + 3) / ((n - 2) * (n + 5) * (n + 7) * (n + 9));
  const double W2 = -1 + std::sqrt(2 * (beta2 - 1));
  const double delta = 1 / std::sqrt(0.5 * std::log(W2));
  const double a = std::sqrt(2 / (W2 - 1));
  const double ya = Y / a;
  const double z1 = delta * std::log(ya + std::sqrt(ya * ya + 1));

  // kurtosis
  const double b2 = m4 / (m2 * m2);
  const double E = 3 * (n - 1) / (n + 1);
  const double var = 24 * n * (n - 2) * (n - 3) / ((n + 1) * (n + 1) * (n + 3) * (n + 5));
  const double xk = (b2 - E) / std::sqrt(var);
  const double sb = 6 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9)) * std::sqrt(6 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3)));
  const double A = 6 + 8 / sb * (2 / sb + std::sqrt(1 + 4 / (sb * sb)));
  const double t = (1 - 2 / A) / (1 + xk * std::sqrt(2 / (A - 4)));
  const double z2 = ((1 - 2 / (9 * A)) - std::cbrt(t)) / std::sqrt(2 / (9 * A));

  const double k2 = z1 * z1 + z2 * z2;
  return {k2, std::exp(-0.5 * k2)};
}

Eigen::VectorXd column_mean(const Eigen::MatrixXd& x) { return x.colwise().mean().transpose(); }

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw DomainError("sample_cov: need two rows");
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / double(x.rows() - 1);
}

Eigen::VectorXd column_se(const Eigen::MatrixXd& x) {
  return (sample_cov(x).diagonal() / double(x.rows())).cwiseSqrt();
}

double smoothed_l1(const std::vector<double>& diff, double dx, double h) {
  if (!(dx > 0.0) || !(h > 0.0)) throw DomainError("smoothed_l1: bad grid");
  const int bins = static_cast<int>(diff.size());
  const int half = static_cast<int>(std::ceil(6.0 * h / dx));
  std::vector<double> ker(static_cast<std::size_t>(2 * half + 1));
  double ks = 0.0;
  for (int j = -half; j <= half; ++j) {
    const double v = std::exp(-0.5 * std::pow(j * dx / h, 2));
    ker[static_cast<std::size_t>(j + half)] = v;
    ks += v;
  }
  double l1 = 0.0;
  for (int i = -half; i < bins + half; ++i) {
    double s = 0.0;
    for (int j = -half; j <= half; ++j) {
      const int k = i - j;
      if (k >= 0 && k < bins) s += diff[static_cast<std::size_t>(k)] * ker[static_cast<std::size_t>(j + half)];
    }
    l1 += std::abs(s) / ks;
  }
  return l1;
}

double kde_l1_distance(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi, int bins,
                       double h) {
  if (!(hi > lo) || bins < 2 || !(h > 0.0)) throw DomainError("kde_l1_distance: bad grid");
  const double dx = (hi - lo) / bins;
  std::vector<double> diff(static_cast<std::size_t>(bins), 0.0);
  double below = 0.0, above = 0.0;  // signed mass outside the grid
  auto add = [&](const std::vector<double>& s, double weight) {
    for (double v : s) {
      const double k = std::floor((v - lo) / dx);
      if (k < 0)
        below += weight;
      else if (k >= bins)
        above += weight;
      else
        diff[static_cast<std::size_t>(k)] += weight;
    }
  };
  add(x, 1.0 / double(x.size()));
  add(y, -1.0 / double(y.size()));

  return smoothed_l1(diff, dx, h) + std::abs(below) + std::abs(above);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need matching samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= double(x.size()), my /= double(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]) - mx, b = std::log(y[i]) - my;
    sxy += a * b;
    sxx += a * a;
  }
  return sxy / sxx;
}

}  // namespace levylan
