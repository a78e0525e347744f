#include "levylan/quadrature.hpp"

#include <cfloat>
#include <numbers>

namespace levylan {

double WynnEpsilon::push(double s) {
  constexpr double tiny = 10.0 * DBL_MIN;
  constexpr double big = DBL_MAX;
  e_.push_back(s);
  double t2 = 0.0;
  for (std::size_t j = e_.size() - 1; j > 0; --j) {
    const double t1 = t2;
    t2 = e_[j - 1];
    const double diff = e_[j] - t2;
    e_[j - 1] = std::abs(diff) <= tiny ? big : t1 + 1.0 / diff;
  }
  ++count_;
  double val = (count_ & 1) ? e_[0] : e_[1];
  if (std::abs(val) > 0.01 * big) val = limit_;
  error_ = count_ > 1 ? std::abs(val - prev_) : INFINITY;
  prev_ = val;
  limit_ = val;
  return val;
}

GaussLegendre::GaussLegendre(int n) : x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n)) {
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(n - 1 - i)] =
        2.0 / ((1.0 - z * z) * dp * dp);
  }
}

CompositeRule::CompositeRule(const std::vector<double>& breaks, int points_per_panel) {
  const GaussLegendre gl(points_per_panel);
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double c = 0.5 * (breaks[p] + breaks[p + 1]);
    const double h = 0.5 * (breaks[p + 1] - breaks[p]);
    for (std::size_t j = 0; j < gl.x.size(); ++j) {
      x.push_back(c + h * gl.x[j]);
      w.push_back(h * gl.w[j]);
    }
  }
}

}  // namespace levylan
