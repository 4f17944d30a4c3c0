#pragma once

// Pointwise quasiconformal calculus on a single Jacobian.

#include <array>
#include <cmath>
#include <limits>

#include "qcflow/error.hpp"
#include "qcflow/matrix.hpp"

namespace qcflow {

/// Default absolute tolerance on |S(g)| for declaring a Jacobian conformal.
inline constexpr double kConformalTol = 1e-8;

/// Smallest distance criterion (b) can resolve: K^4 - n^2 cancels to a few ulp
/// of n^2 and the square root lifts that to about sqrt(eps).
inline double dilation_resolution(int n) {
  return 4.0 * std::sqrt(std::numeric_limits<double>::epsilon() * n);
}

inline double hs_norm(const SquareMatrix& m) { return std::sqrt(m.contract(m)); }

/// Determinant of a Jacobian, rejecting orientation-reversing or singular input.
inline double checked_det(const SquareMatrix& j) {
  const double d = determinant(j);
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw Error(ErrorCode::NonPositiveDeterminant, "det J = " + std::to_string(d));
  }
  return d;
}

/// K = |J| / det(J)^{1/n}
inline double trace_dilation(const SquareMatrix& j) {
  const double d = checked_det(j);
  return hs_norm(j) / std::pow(d, 1.0 / j.size());
}

/// g = J J^T / det(J)^{2/n}; symmetric positive definite with unit determinant.
inline SquareMatrix distortion_tensor(const SquareMatrix& j) {
  const double d = checked_det(j);
  return (j * j.transpose()) * std::pow(d, -2.0 / j.size());
}

/// S(M) = (M + M^T)/2 - tr(M) I / n
inline SquareMatrix ahlfors(const SquareMatrix& m) {
  const int n = m.size();
  SquareMatrix s = (m + m.transpose()) * 0.5;
  const double t = m.trace() / n;
  for (int i = 0; i < n; ++i) s(i, i) -= t;
  return s;
}

/// Distances to conformality for the four equivalent criteria, each on the scale of |S(g)|.
///   a: |J^T J - (|J|^2/n) I| / det^{2/n}          (dF^T dF = lambda I)
///   b: sqrt((K^4 - n^2)/n)                          (K = sqrt(n); exact |S| when n = 2;
///                                                    flagged against max(tol, dilation_resolution))
///   c: |(K^2/n)(J^{-T} - n J/|J|^2) J^T|            (bracket vanishes)
///   d: |S(g)|
struct ConformalityCriteria {
  std::array<double, 4> distance{};
  std::array<bool, 4> conformal{};

  bool consistent() const {
    return conformal[0] == conformal[1] && conformal[1] == conformal[2] &&
           conformal[2] == conformal[3];
  }
};

struct DilationReport {
  double K = 0.0;
  double det = 0.0;
  SquareMatrix g;
  SquareMatrix Sg;
  double SgNormSq = 0.0;
  bool conformal = false;
  /// |S(g)|^2 <= K^4 (1 - 1/n), up to round-off.
  bool within_upper_bound = false;
  ConformalityCriteria criteria;
};

inline DilationReport analyze(const SquareMatrix& j, double tol = kConformalTol) {
  const int n = j.size();
  DilationReport r;
  r.det = checked_det(j);
  const double norm_sq = j.contract(j);
  r.K = std::sqrt(norm_sq) / std::pow(r.det, 1.0 / n);
  r.g = (j * j.transpose()) * std::pow(r.det, -2.0 / n);
  r.Sg = ahlfors(r.g);
  r.SgNormSq = r.Sg.contract(r.Sg);
  const double s_norm = std::sqrt(r.SgNormSq);
  r.conformal = s_norm <= tol;
  const double k2 = r.K * r.K;
  r.within_upper_bound = r.SgNormSq <= k2 * k2 * (1.0 - 1.0 / n) * (1.0 + 1e-12);

  auto& c = r.criteria;
  {
    SquareMatrix jtj = j.transpose() * j;
    for (int i = 0; i < n; ++i) jtj(i, i) -= norm_sq / n;
    c.distance[0] = hs_norm(jtj) * std::pow(r.det, -2.0 / n);
  }
  c.distance[1] = std::sqrt(std::max(0.0, (k2 * k2 - double(n) * n) / n));
  {
    const SquareMatrix bracket = inverse(j).transpose() - j * (n / norm_sq);
    c.distance[2] = hs_norm(bracket * j.transpose()) * (k2 / n);
  }
  c.distance[3] = s_norm;
  for (int i = 0; i < 4; ++i) c.conformal[i] = c.distance[i] <= tol;
  c.conformal[1] = c.distance[1] <= std::max(tol, dilation_resolution(n));
  return r;
}

/// HS norm of J^{-T} - n J/|J|^2 + n K^{-2} S(g) J^{-T}; vanishes identically.
inline double factoring_residual(const SquareMatrix& j) {
  const int n = j.size();
  const double d = checked_det(j);
  const double norm_sq = j.contract(j);
  const double k2 = norm_sq / std::pow(d, 2.0 / n);
  const SquareMatrix inv_t = inverse(j).transpose();
  const SquareMatrix sg = ahlfors((j * j.transpose()) * std::pow(d, -2.0 / n));
  return hs_norm(inv_t - j * (n / norm_sq) + (sg * inv_t) * (n / k2));
}

}  // namespace qcflow
