#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace levylan {

struct TestResult {
  double statistic;
  double p_value;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
TestResult ks_test(std::vector<double> x, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
TestResult ks_test2(std::vector<double> x, std::vector<double> y);

/// Kolmogorov limiting distribution P(K > t).
double kolmogorov_survival(double t);

/// D'Agostino-Pearson K^2 omnibus test of normality (chi-square, 2 df).
TestResult dagostino_pearson(const std::vector<double>& x);

/// Rows are observations.
Eigen::VectorXd column_mean(const Eigen::MatrixXd& x);
Eigen::VectorXd column_se(const Eigen::MatrixXd& x);
Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& x);

/// L1 distance between Gaussian kernel density estimates of two samples,
/// both binned on a common grid over [lo, hi] with `bins` cells and
/// bandwidth h. Mass outside [lo, hi] is compared through the tail counts.
double kde_l1_distance(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi, int bins,
                       double h);

/// L1 norm of a binned signed measure (cell width dx) after Gaussian
/// smoothing with bandwidth h, including the spill beyond both ends.
double smoothed_l1(const std::vector<double>& diff, double dx, double h);

/// Least-squares slope of ln y on ln x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace levylan
