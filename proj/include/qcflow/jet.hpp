#pragma once

#include <array>
#include <cmath>

#include "qcflow/matrix.hpp"

namespace qcflow {

/// Second-order jet of a map at a point. J(i, j) = d_j u^i, H(k, j, l) = d_j d_l u^k.
struct Jet2Sample {
  Vector x;
  Vector u;
  SquareMatrix J;
  Hessian H;

  int dim() const { return x.size(); }
};

/// Scalar carrying value, gradient and Hessian with respect to up to four
/// independent variables. Arithmetic propagates them exactly (forward mode).
class Dual2 {
 public:
  using Grad = std::array<double, kMaxDim>;
  using Hess = std::array<double, kMaxDim * kMaxDim>;

  Dual2() = default;
  Dual2(double v) : v_(v) {}  // NOLINT: constants promote implicitly

  static Dual2 variable(double v, int index) {
    Dual2 d(v);
    d.g_[index] = 1.0;
    return d;
  }

  double value() const { return v_; }
  double grad(int j) const { return g_[j]; }
  double hess(int j, int l) const { return h_[j * kMaxDim + l]; }

  // Chain rule for f(a): f' and f'' evaluated at a.
  static Dual2 apply(const Dual2& a, double f, double df, double d2f) {
    Dual2 r(f);
    for (int j = 0; j < kMaxDim; ++j) r.g_[j] = df * a.g_[j];
    for (int j = 0; j < kMaxDim; ++j)
      for (int l = 0; l < kMaxDim; ++l)
        r.h_[j * kMaxDim + l] = df * a.h_[j * kMaxDim + l] + d2f * a.g_[j] * a.g_[l];
    return r;
  }

  // Chain rule for f(a, b) with partials fa, fb, faa, fbb, fab.
  static Dual2 apply(const Dual2& a, const Dual2& b, double f, double fa, double fb, double faa,
                     double fbb, double fab) {
    Dual2 r(f);
    for (int j = 0; j < kMaxDim; ++j) r.g_[j] = fa * a.g_[j] + fb * b.g_[j];
    for (int j = 0; j < kMaxDim; ++j)
      for (int l = 0; l < kMaxDim; ++l) {
        const int k = j * kMaxDim + l;
        r.h_[k] = fa * a.h_[k] + fb * b.h_[k] + faa * a.g_[j] * a.g_[l] +
                  fbb * b.g_[j] * b.g_[l] + fab * (a.g_[j] * b.g_[l] + b.g_[j] * a.g_[l]);
      }
    return r;
  }

  Dual2& operator+=(const Dual2& o) {
    v_ += o.v_;
    for (int j = 0; j < kMaxDim; ++j) g_[j] += o.g_[j];
    for (int k = 0; k < kMaxDim * kMaxDim; ++k) h_[k] += o.h_[k];
    return *this;
  }
  Dual2& operator-=(const Dual2& o) {
    v_ -= o.v_;
    for (int j = 0; j < kMaxDim; ++j) g_[j] -= o.g_[j];
    for (int k = 0; k < kMaxDim * kMaxDim; ++k) h_[k] -= o.h_[k];
    return *this;
  }
  Dual2& operator*=(const Dual2& o) { return *this = *this * o; }
  Dual2& operator/=(const Dual2& o) { return *this = *this / o; }

  friend Dual2 operator+(Dual2 a, const Dual2& b) { return a += b; }
  friend Dual2 operator-(Dual2 a, const Dual2& b) { return a -= b; }
  friend Dual2 operator-(const Dual2& a) { return apply(a, -a.v_, -1.0, 0.0); }
  friend Dual2 operator*(const Dual2& a, const Dual2& b) {
    return apply(a, b, a.v_ * b.v_, b.v_, a.v_, 0.0, 0.0, 1.0);
  }
  friend Dual2 operator/(const Dual2& a, const Dual2& b) {
    const double ib = 1.0 / b.v_;
    const double q = a.v_ * ib;
    // f = a/b: fa = 1/b, fb = -a/b^2, faa = 0, fbb = 2a/b^3, fab = -1/b^2
    return apply(a, b, q, ib, -q * ib, 0.0, 2.0 * q * ib * ib, -ib * ib);
  }

  friend bool operator<(const Dual2& a, const Dual2& b) { return a.v_ < b.v_; }
  friend bool operator>(const Dual2& a, const Dual2& b) { return a.v_ > b.v_; }

 private:
  double v_ = 0.0;
  Grad g_{};
  Hess h_{};
};

inline double value_of(double a) { return a; }
inline double value_of(const Dual2& a) { return a.value(); }

inline Dual2 sqrt(const Dual2& a) {
  const double s = std::sqrt(a.value());
  return Dual2::apply(a, s, 0.5 / s, -0.25 / (s * a.value()));
}
inline Dual2 exp(const Dual2& a) {
  const double e = std::exp(a.value());
  return Dual2::apply(a, e, e, e);
}
inline Dual2 log(const Dual2& a) {
  const double x = a.value();
  return Dual2::apply(a, std::log(x), 1.0 / x, -1.0 / (x * x));
}
inline Dual2 sin(const Dual2& a) {
  const double s = std::sin(a.value());
  return Dual2::apply(a, s, std::cos(a.value()), -s);
}
inline Dual2 cos(const Dual2& a) {
  const double c = std::cos(a.value());
  return Dual2::apply(a, c, -std::sin(a.value()), -c);
}
/// a^p for a > 0 and real p.
inline Dual2 pow(const Dual2& a, double p) {
  const double x = a.value();
  const double f = std::pow(x, p);
  return Dual2::apply(a, f, p * f / x, p * (p - 1.0) * f / (x * x));
}
inline Dual2 atan2(const Dual2& y, const Dual2& x) {
  const double yv = y.value();
  const double xv = x.value();
  const double r2 = xv * xv + yv * yv;
  const double r4 = r2 * r2;
  return Dual2::apply(y, x, std::atan2(yv, xv), xv / r2, -yv / r2, -2.0 * xv * yv / r4,
                      2.0 * xv * yv / r4, (yv * yv - xv * xv) / r4);
}

}  // namespace qcflow
