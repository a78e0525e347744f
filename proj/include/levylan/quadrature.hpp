#pragma once

// Adaptive Gauss-Kronrod, fixed Gauss-Legendre panels and Wynn's epsilon
// algorithm. The integrators are templated on the value type so that one
// pass can integrate several related integrands (Eigen fixed-size arrays).

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <queue>
#include <type_traits>
#include <vector>

#include "levylan/errors.hpp"

namespace levylan {

namespace quad_detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr double xgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr double wgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600855521303, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr double wg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

inline double abs_max(double v) { return std::abs(v); }
template <class Derived>
double abs_max(const Eigen::ArrayBase<Derived>& v) {
  return v.abs().maxCoeff();
}

template <class V>
V zero_like(const V& v) {
  if constexpr (std::is_arithmetic_v<V>) {
    return V(0);
  } else {
    return V::Zero(v.size());
  }
}

}  // namespace quad_detail

/// One application of the 21-point Kronrod rule. `err` receives the
/// QUADPACK error estimate (|K21 - G10| rescaled against the integrand's
/// variation), maximized over components for array-valued integrands.
/// `f` must return a concrete value type (double or an Eigen array).
template <class F>
auto gk21(F&& f, double a, double b, double& err) {
  using namespace quad_detail;
  using V = std::decay_t<decltype(f(a))>;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  V fv[21];
  fv[20] = f(c);
  for (int j = 0; j < 10; ++j) {
    const double dx = h * xgk[j];
    fv[2 * j] = f(c - dx);
    fv[2 * j + 1] = f(c + dx);
  }
  V resk = fv[20] * wgk[10];
  V resg = zero_like(fv[20]);
  for (int j = 0; j < 10; ++j) {
    resk += (fv[2 * j] + fv[2 * j + 1]) * wgk[j];
    if (j % 2 == 1) resg += (fv[2 * j] + fv[2 * j + 1]) * wg[j / 2];
  }
  const V mean = resk * 0.5;
  err = 0.0;
  auto component = [&](double k, double g, double mu, auto at) {
    double resasc = wgk[10] * std::abs(at(fv[20]) - mu);
    double resabs = wgk[10] * std::abs(at(fv[20]));
    for (int j = 0; j < 10; ++j) {
      resasc += wgk[j] * (std::abs(at(fv[2 * j]) - mu) + std::abs(at(fv[2 * j + 1]) - mu));
      resabs += wgk[j] * (std::abs(at(fv[2 * j])) + std::abs(at(fv[2 * j + 1])));
    }
    resasc *= std::abs(h);
    resabs *= std::abs(h);
    double e = std::abs((k - g) * h);
    if (resasc != 0.0 && e != 0.0) e = resasc * std::min(1.0, std::pow(200.0 * e / resasc, 1.5));
    e = std::max(e, 50.0 * 2.22e-16 * resabs);
    err = std::max(err, e);
  };
  if constexpr (std::is_arithmetic_v<V>) {
    component(resk, resg, mean, [](double v) { return v; });
  } else {
    for (Eigen::Index i = 0; i < resk.size(); ++i)
      component(resk[i], resg[i], mean[i], [i](const V& v) { return v[i]; });
  }
  return V(resk * h);
}

struct QuadOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_panels = 2000;
};

/// Globally adaptive GK21 on [a, b]: bisects the panel with the largest
/// error estimate until the total estimate meets the tolerance.
/// Throws NonConvergedQuadrature when max_panels is exhausted.
template <class F>
auto integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  using V = std::decay_t<decltype(gk21(f, a, b, std::declval<double&>()))>;
  struct Panel {
    double a, b, err;
    V val;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  std::priority_queue<Panel> heap;
  double e0;
  V total = gk21(f, a, b, e0);
  heap.push({a, b, e0, total});
  double err_total = e0;
  for (int panels = 1;; ++panels) {
    const double tol = std::max(opt.abs_tol, opt.rel_tol * quad_detail::abs_max(total));
    if (err_total <= tol) break;
    if (panels >= opt.max_panels) throw NonConvergedQuadrature("integrate", err_total);
    Panel p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    double el, er;
    V vl = gk21(f, p.a, m, el);
    V vr = gk21(f, m, p.b, er);
    total += vl + vr - p.val;
    err_total += el + er - p.err;
    heap.push({p.a, m, el, vl});
    heap.push({m, p.b, er, vr});
  }
  // Re-sum to drop accumulated cancellation in the running total.
  V sum = quad_detail::zero_like(total);
  while (!heap.empty()) {
    sum += heap.top().val;
    heap.pop();
  }
  return sum;
}

/// Integral over [a, inf) by the substitution x = a + t/(1-t).
template <class F>
auto integrate_to_inf(F&& f, double a, const QuadOptions& opt = {}) {
  auto g = [&](double t) {
    const double s = 1.0 - t;
    using V = std::decay_t<decltype(f(a))>;
    return V(f(a + t / s) * (1.0 / (s * s)));
  };
  return integrate(g, 0.0, 1.0, opt);
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums.
class WynnEpsilon {
 public:
  /// Feed the next partial sum; returns the current extrapolated limit.
  double push(double s);
  double limit() const { return limit_; }
  /// Difference between the last two extrapolated limits.
  double error() const { return error_; }
  int count() const { return static_cast<int>(count_); }

 private:
  std::vector<double> e_;  // last diagonal of the epsilon table
  std::size_t count_ = 0;
  double limit_ = 0.0, prev_ = 0.0, error_ = INFINITY;
};

/// Gauss-Legendre rule on [-1, 1] with `n` nodes.
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n);
};

/// Composite Gauss-Legendre nodes and weights on the given breakpoints.
struct CompositeRule {
  std::vector<double> x, w;
  CompositeRule() = default;
  CompositeRule(const std::vector<double>& breaks, int points_per_panel);
};

}  // namespace levylan
