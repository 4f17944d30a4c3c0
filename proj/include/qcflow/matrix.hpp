#pragma once

// Small dense linear algebra for 2 <= n <= 4 (1x1 blocks are allowed for
// hypersurface frames). Storage is fixed-capacity so every type is a cheap
// value type with no heap traffic.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <ostream>

#include "qcflow/error.hpp"

namespace qcflow {

inline constexpr int kMaxDim = 4;

inline void check_dim(int n, int lo = 1) {
  if (n < lo || n > kMaxDim) {
    throw Error(ErrorCode::InvalidArgument, "dimension " + std::to_string(n) + " outside [" +
                                                std::to_string(lo) + ", 4]");
  }
}

class Vector {
 public:
  Vector() = default;
  explicit Vector(int n) : n_(n) { check_dim(n); }
  Vector(std::initializer_list<double> values) : n_(static_cast<int>(values.size())) {
    check_dim(n_);
    std::copy(values.begin(), values.end(), v_.begin());
  }

  static Vector unit(int n, int i) {
    Vector e(n);
    e[i] = 1.0;
    return e;
  }

  int size() const { return n_; }
  double& operator[](int i) { return v_[i]; }
  double operator[](int i) const { return v_[i]; }

  Vector& operator+=(const Vector& o) {
    for (int i = 0; i < n_; ++i) v_[i] += o.v_[i];
    return *this;
  }
  Vector& operator-=(const Vector& o) {
    for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Vector& operator*=(double s) {
    for (int i = 0; i < n_; ++i) v_[i] *= s;
    return *this;
  }

  friend Vector operator+(Vector a, const Vector& b) { return a += b; }
  friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
  friend Vector operator*(Vector a, double s) { return a *= s; }
  friend Vector operator*(double s, Vector a) { return a *= s; }
  friend Vector operator-(Vector a) { return a *= -1.0; }

  double dot(const Vector& o) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += v_[i] * o.v_[i];
    return s;
  }
  double norm() const { return std::sqrt(dot(*this)); }

  friend std::ostream& operator<<(std::ostream& os, const Vector& v) {
    os << '(';
    for (int i = 0; i < v.n_; ++i) os << (i ? ", " : "") << v[i];
    return os << ')';
  }

 private:
  int n_ = 0;
  std::array<double, kMaxDim> v_{};
};

class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int n) : n_(n) { check_dim(n); }
  /// Row-major nested initializer: {{a, b}, {c, d}}.
  SquareMatrix(std::initializer_list<std::initializer_list<double>> rows)
      : n_(static_cast<int>(rows.size())) {
    check_dim(n_);
    int i = 0;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != n_) {
        throw Error(ErrorCode::InvalidArgument, "matrix rows must all have length n");
      }
      int j = 0;
      for (double x : row) (*this)(i, j++) = x;
      ++i;
    }
  }

  static SquareMatrix identity(int n) {
    SquareMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static SquareMatrix diagonal(const Vector& d) {
    SquareMatrix m(d.size());
    for (int i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }
  static SquareMatrix outer(const Vector& a, const Vector& b) {
    SquareMatrix m(a.size());
    for (int i = 0; i < a.size(); ++i)
      for (int j = 0; j < a.size(); ++j) m(i, j) = a[i] * b[j];
    return m;
  }
  /// Columns are the given vectors.
  static SquareMatrix from_columns(std::initializer_list<Vector> cols) {
    SquareMatrix m(static_cast<int>(cols.size()));
    int j = 0;
    for (const auto& c : cols) {
      for (int i = 0; i < m.n_; ++i) m(i, j) = c[i];
      ++j;
    }
    return m;
  }

  int size() const { return n_; }
  double& operator()(int i, int j) { return a_[i * kMaxDim + j]; }
  double operator()(int i, int j) const { return a_[i * kMaxDim + j]; }

  Vector row(int i) const {
    Vector r(n_);
    for (int j = 0; j < n_; ++j) r[j] = (*this)(i, j);
    return r;
  }
  Vector col(int j) const {
    Vector c(n_);
    for (int i = 0; i < n_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  SquareMatrix transpose() const {
    SquareMatrix t(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double trace() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += (*this)(i, i);
    return s;
  }

  /// Frobenius inner product sum_ij a_ij b_ij.
  double contract(const SquareMatrix& o) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += (*this)(i, j) * o(i, j);
    return s;
  }

  bool all_finite() const {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (!std::isfinite((*this)(i, j))) return false;
    return true;
  }

  SquareMatrix& operator+=(const SquareMatrix& o) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) (*this)(i, j) += o(i, j);
    return *this;
  }
  SquareMatrix& operator-=(const SquareMatrix& o) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) (*this)(i, j) -= o(i, j);
    return *this;
  }
  SquareMatrix& operator*=(double s) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) (*this)(i, j) *= s;
    return *this;
  }

  friend SquareMatrix operator+(SquareMatrix a, const SquareMatrix& b) { return a += b; }
  friend SquareMatrix operator-(SquareMatrix a, const SquareMatrix& b) { return a -= b; }
  friend SquareMatrix operator*(SquareMatrix a, double s) { return a *= s; }
  friend SquareMatrix operator*(double s, SquareMatrix a) { return a *= s; }
  friend SquareMatrix operator-(SquareMatrix a) { return a *= -1.0; }

  friend SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
    SquareMatrix c(a.n_);
    for (int i = 0; i < a.n_; ++i)
      for (int k = 0; k < a.n_; ++k) {
        const double aik = a(i, k);
        for (int j = 0; j < a.n_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }
  friend Vector operator*(const SquareMatrix& a, const Vector& x) {
    Vector y(a.n_);
    for (int i = 0; i < a.n_; ++i)
      for (int j = 0; j < a.n_; ++j) y[i] += a(i, j) * x[j];
    return y;
  }

  friend std::ostream& operator<<(std::ostream& os, const SquareMatrix& m) {
    os << '[';
    for (int i = 0; i < m.n_; ++i) {
      os << (i ? "; " : "");
      for (int j = 0; j < m.n_; ++j) os << (j ? ", " : "") << m(i, j);
    }
    return os << ']';
  }

 private:
  int n_ = 0;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

namespace detail {

inline double det3(double a, double b, double c, double d, double e, double f, double g, double h,
                   double i) {
  return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

// Determinant of the 3x3 minor of a 4x4 matrix obtained by deleting row r and column c.
inline double minor4(const SquareMatrix& m, int r, int c) {
  std::array<double, 9> s{};
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    if (i == r) continue;
    for (int j = 0; j < 4; ++j) {
      if (j == c) continue;
      s[k++] = m(i, j);
    }
  }
  return det3(s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7], s[8]);
}

}  // namespace detail

inline double determinant(const SquareMatrix& m) {
  switch (m.size()) {
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return detail::det3(m(0, 0), m(0, 1), m(0, 2), m(1, 0), m(1, 1), m(1, 2), m(2, 0), m(2, 1),
                          m(2, 2));
    case 4: {
      double d = 0.0;
      for (int j = 0; j < 4; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        d += sign * m(0, j) * detail::minor4(m, 0, j);
      }
      return d;
    }
    default:
      throw Error(ErrorCode::InvalidArgument, "determinant: unsupported size");
  }
}

/// Cofactor matrix, (cof M)^T M = det(M) I. Closed forms for every supported size.
inline SquareMatrix cofactor(const SquareMatrix& m) {
  const int n = m.size();
  SquareMatrix c(n);
  switch (n) {
    case 1:
      c(0, 0) = 1.0;
      break;
    case 2:
      c(0, 0) = m(1, 1);
      c(0, 1) = -m(1, 0);
      c(1, 0) = -m(0, 1);
      c(1, 1) = m(0, 0);
      break;
    case 3:
      // Row i of the cofactor is the cross product of the other two rows.
      for (int i = 0; i < 3; ++i) {
        const int r1 = (i + 1) % 3;
        const int r2 = (i + 2) % 3;
        for (int j = 0; j < 3; ++j) {
          const int c1 = (j + 1) % 3;
          const int c2 = (j + 2) % 3;
          c(i, j) = m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1);
        }
      }
      break;
    case 4:
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
          c(i, j) = sign * detail::minor4(m, i, j);
        }
      break;
    default:
      throw Error(ErrorCode::InvalidArgument, "cofactor: unsupported size");
  }
  return c;
}

/// Inverse via the cofactor; callers check the determinant first.
inline SquareMatrix inverse(const SquareMatrix& m) {
  const double d = determinant(m);
  if (d == 0.0 || !std::isfinite(d)) {
    throw Error(ErrorCode::InvalidArgument, "inverse of a singular matrix");
  }
  return cofactor(m).transpose() * (1.0 / d);
}

/// Dense n x n x n array, entry (k, j, l) = d_j d_l u^k.
class Hessian {
 public:
  Hessian() = default;
  explicit Hessian(int n) : n_(n) { check_dim(n); }

  int size() const { return n_; }
  double& operator()(int k, int j, int l) { return h_[(k * kMaxDim + j) * kMaxDim + l]; }
  double operator()(int k, int j, int l) const { return h_[(k * kMaxDim + j) * kMaxDim + l]; }

  /// max_{k,j,l} |H(k,j,l) - H(k,l,j)|
  double asymmetry() const {
    double a = 0.0;
    for (int k = 0; k < n_; ++k)
      for (int j = 0; j < n_; ++j)
        for (int l = 0; l < n_; ++l) a = std::max(a, std::abs((*this)(k, j, l) - (*this)(k, l, j)));
    return a;
  }

  double max_abs() const {
    double a = 0.0;
    for (int k = 0; k < n_; ++k)
      for (int j = 0; j < n_; ++j)
        for (int l = 0; l < n_; ++l) a = std::max(a, std::abs((*this)(k, j, l)));
    return a;
  }

 private:
  int n_ = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> h_{};
};

/// Four-index array T(i, j, k, l) used for d A^i_j / d q_{kl}.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n) { check_dim(n); }

  int size() const { return n_; }
  double& operator()(int i, int j, int k, int l) { return t_[index(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return t_[index(i, j, k, l)]; }

  double frobenius() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k)
          for (int l = 0; l < n_; ++l) s += (*this)(i, j, k, l) * (*this)(i, j, k, l);
    return std::sqrt(s);
  }

 private:
  static int index(int i, int j, int k, int l) {
    return ((i * kMaxDim + j) * kMaxDim + k) * kMaxDim + l;
  }
  int n_ = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxDim * kMaxDim> t_{};
};

}  // namespace qcflow
