#pragma once

// Reference computations that share no code path with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "qcflow/matrix.hpp"

namespace oracle {

using qcflow::SquareMatrix;
using qcflow::Vector;

/// Leibniz expansion over all permutations.
inline double permutation_det(const SquareMatrix& m) {
  const int n = m.size();
  std::array<int, 4> perm{0, 1, 2, 3};
  double total = 0.0;
  do {
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (perm[i] > perm[j]) ++inversions;
    double term = inversions % 2 ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) term *= m(i, perm[i]);
    total += term;
  } while (std::next_permutation(perm.begin(), perm.begin() + n));
  return total;
}

/// Cofactor from signed minors evaluated by permutation_det.
inline SquareMatrix minor_cofactor(const SquareMatrix& m) {
  const int n = m.size();
  SquareMatrix c(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (n == 1) {
        c(i, j) = 1.0;
        continue;
      }
      SquareMatrix sub(n - 1);
      for (int r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (int s = 0, ss = 0; s < n; ++s) {
          if (s == j) continue;
          sub(rr, ss++) = m(r, s);
        }
        ++rr;
      }
      c(i, j) = ((i + j) % 2 ? -1.0 : 1.0) * permutation_det(sub);
    }
  return c;
}

/// Central difference of a matrix-valued function of a matrix in entry (k, l).
inline SquareMatrix fd_matrix_derivative(const std::function<SquareMatrix(const SquareMatrix&)>& f,
                                         const SquareMatrix& q, int k, int l, double h) {
  SquareMatrix qp = q;
  SquareMatrix qm = q;
  qp(k, l) += h;
  qm(k, l) -= h;
  return (f(qp) - f(qm)) * (1.0 / (2.0 * h));
}

/// Central-difference Jacobian of a vector field.
inline SquareMatrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                                double h) {
  const int n = x.size();
  SquareMatrix j(n);
  for (int c = 0; c < n; ++c) {
    Vector xp = x;
    Vector xm = x;
    xp[c] += h;
    xm[c] -= h;
    const Vector d = (f(xp) - f(xm)) * (1.0 / (2.0 * h));
    for (int r = 0; r < n; ++r) j(r, c) = d[r];
  }
  return j;
}

inline double max_abs(const SquareMatrix& m) {
  double v = 0.0;
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j) v = std::max(v, std::abs(m(i, j)));
  return v;
}

inline double max_abs(const Vector& v) {
  double r = 0.0;
  for (int i = 0; i < v.size(); ++i) r = std::max(r, std::abs(v[i]));
  return r;
}

/// Frobenius distance between matrices.
inline double distance(const SquareMatrix& a, const SquareMatrix& b) {
  const SquareMatrix d = a - b;
  return std::sqrt(d.contract(d));
}

}  // namespace oracle
