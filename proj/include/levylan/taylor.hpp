#pragma once

// Truncated Taylor arithmetic in one variable.
//
// A Taylor<N> holds the normalized coefficients c_j = f^(j)(x0) / j! for
// j = 0..N. Arithmetic and the elementary functions below propagate them
// exactly (up to rounding), which is how every alpha-derivative in the
// library is produced: evaluate the closed form on Taylor<N>(alpha, 1).

#include <array>
#include <cmath>
#include <cstddef>

namespace levylan {

template <int N>
class Taylor {
  static_assert(N >= 0, "order must be non-negative");

 public:
  static constexpr int order = N;

  constexpr Taylor() : c_{} {}
  constexpr Taylor(double value) : c_{} { c_[0] = value; }  // NOLINT: implicit by design of the algebra
  constexpr Taylor(double value, double slope) : c_{} {
    c_[0] = value;
    if constexpr (N >= 1) c_[1] = slope;
  }

  /// Independent variable at x0.
  static constexpr Taylor variable(double x0) { return Taylor(x0, 1.0); }

  constexpr double value() const { return c_[0]; }
  constexpr double coeff(int j) const { return c_[static_cast<std::size_t>(j)]; }
  constexpr double& coeff(int j) { return c_[static_cast<std::size_t>(j)]; }

  /// j-th derivative f^(j)(x0).
  double derivative(int j) const {
    double f = 1.0;
    for (int i = 2; i <= j; ++i) f *= i;
    return c_[static_cast<std::size_t>(j)] * f;
  }

  Taylor& operator+=(const Taylor& o) {
    for (int j = 0; j <= N; ++j) c_[j] += o.c_[j];
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    for (int j = 0; j <= N; ++j) c_[j] -= o.c_[j];
    return *this;
  }
  Taylor& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  Taylor& operator*=(const Taylor& o) {
    *this = *this * o;
    return *this;
  }
  Taylor& operator/=(const Taylor& o) {
    *this = *this / o;
    return *this;
  }

  friend Taylor operator-(Taylor a) {
    for (auto& v : a.c_) v = -v;
    return a;
  }
  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator+(Taylor a, double b) {
    a.c_[0] += b;
    return a;
  }
  friend Taylor operator+(double b, Taylor a) {
    a.c_[0] += b;
    return a;
  }
  friend Taylor operator-(Taylor a, double b) {
    a.c_[0] -= b;
    return a;
  }
  friend Taylor operator-(double b, const Taylor& a) { return (-a) + b; }
  friend Taylor operator*(Taylor a, double s) { return a *= s; }
  friend Taylor operator*(double s, Taylor a) { return a *= s; }
  friend Taylor operator/(Taylor a, double s) { return a *= (1.0 / s); }

  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (int i = 0; i <= N; ++i)
      for (int j = 0; i + j <= N; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
    return r;
  }

  friend Taylor operator/(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (int k = 0; k <= N; ++k) {
      double s = a.c_[k];
      for (int j = 1; j <= k; ++j) s -= b.c_[j] * r.c_[k - j];
      r.c_[k] = s / b.c_[0];
    }
    return r;
  }
  friend Taylor operator/(double a, const Taylor& b) { return Taylor(a) / b; }

 private:
  std::array<double, N + 1> c_;
};

template <int N>
Taylor<N> exp(const Taylor<N>& a) {
  Taylor<N> r(std::exp(a.value()));
  for (int k = 1; k <= N; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a.coeff(j) * r.coeff(k - j);
    r.coeff(k) = s / k;
  }
  return r;
}

template <int N>
Taylor<N> log(const Taylor<N>& a) {
  Taylor<N> r(std::log(a.value()));
  for (int k = 1; k <= N; ++k) {
    double s = a.coeff(k);
    for (int j = 1; j < k; ++j) s -= (static_cast<double>(j) / k) * r.coeff(j) * a.coeff(k - j);
    r.coeff(k) = s / a.value();
  }
  return r;
}

/// sin and cos together; they share one recurrence.
template <int N>
void sincos(const Taylor<N>& a, Taylor<N>& s, Taylor<N>& c) {
  s = Taylor<N>(std::sin(a.value()));
  c = Taylor<N>(std::cos(a.value()));
  for (int k = 1; k <= N; ++k) {
    double ss = 0.0, cc = 0.0;
    for (int j = 1; j <= k; ++j) {
      ss += j * a.coeff(j) * c.coeff(k - j);
      cc -= j * a.coeff(j) * s.coeff(k - j);
    }
    s.coeff(k) = ss / k;
    c.coeff(k) = cc / k;
  }
}

template <int N>
Taylor<N> sin(const Taylor<N>& a) {
  Taylor<N> s, c;
  sincos(a, s, c);
  return s;
}

template <int N>
Taylor<N> cos(const Taylor<N>& a) {
  Taylor<N> s, c;
  sincos(a, s, c);
  return c;
}

template <int N>
Taylor<N> pow(const Taylor<N>& a, double p) {
  return exp(p * log(a));
}

template <int N>
Taylor<N> pow(const Taylor<N>& a, int p) {
  Taylor<N> r(1.0);
  Taylor<N> b = p < 0 ? 1.0 / a : a;
  for (int e = p < 0 ? -p : p; e > 0; e >>= 1) {
    if (e & 1) r *= b;
    b *= b;
  }
  return r;
}

/// Compose a scalar function with known derivatives f^(j)(a0), j=0..N,
/// with the series a: returns f(a).
template <int N>
Taylor<N> compose(const std::array<double, N + 1>& derivs, const Taylor<N>& a) {
  Taylor<N> delta = a - a.value();
  Taylor<N> r(derivs[0]);
  Taylor<N> p(1.0);
  double fact = 1.0;
  for (int j = 1; j <= N; ++j) {
    p *= delta;
    fact *= j;
    r += p * (derivs[static_cast<std::size_t>(j)] / fact);
  }
  return r;
}

// Scalar overloads so templated code can run on plain doubles.
inline double value_of(double x) { return x; }
template <int N>
double value_of(const Taylor<N>& x) {
  return x.value();
}

}  // namespace levylan
