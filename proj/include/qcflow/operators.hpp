#pragma once

// The L_p flux and its linearization, the two routes to L_infinity, the
// Legendre-Hadamard witness and the B tensor of the inverse-determinant PDE.

#include <cmath>
#include <functional>

#include "qcflow/core.hpp"
#include "qcflow/error.hpp"
#include "qcflow/jet.hpp"
#include "qcflow/matrix.hpp"

namespace qcflow {

/// Sign s in lim_{p->inf} lp_asymptotic_ratio = s * linfty_factored. Pinned by
/// the calibration test in test_operators.cpp (evaluated at p = 1000).
inline constexpr double kAsymptoticSign = 1.0;

/// log(|q|^{a} / det(q)^{b}); the large-p weights are formed from this.
inline double log_weight(double norm, double det, double a, double b) {
  return a * std::log(norm) - b * std::log(det);
}

/// A^i_j(q) = -p [q^{ji} - n q_ij/|q|^2] |q|^{np} / det(q)^p, returned as F(i, j).
inline SquareMatrix flux(const SquareMatrix& q, double p) {
  const int n = q.size();
  const double d = checked_det(q);
  const double norm_sq = q.contract(q);
  const double w = std::exp(log_weight(std::sqrt(norm_sq), d, n * p, p));
  const SquareMatrix inv_t = inverse(q).transpose();
  return (inv_t - q * (n / norm_sq)) * (-p * w);
}

/// Bracket of the closed-form linearization without the scalar prefactor
/// -p |q|^{np-2}/det^p, so that A^{ik}_{jl} = prefactor * bracket(i, j, k, l).
inline Tensor4 linearization_bracket(const SquareMatrix& q, double p) {
  const int n = q.size();
  const double norm_sq = q.contract(q);
  const SquareMatrix qi = inverse(q);  // qi(a, b) = q^{ab}
  Tensor4 b(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = n * p * (q(k, l) * qi(j, i) + q(i, j) * qi(l, k));
          v -= n * (n * p - 2.0) * q(i, j) * q(k, l) / norm_sq;
          v -= norm_sq * (qi(l, i) * qi(j, k) + p * qi(l, k) * qi(j, i));
          if (i == k && j == l) v -= n;
          b(i, j, k, l) = v;
        }
  return b;
}

/// A^{ik}_{jl}(q) = dA^i_j / dq_{kl}, stored as T(i, j, k, l).
inline Tensor4 flux_linearization(const SquareMatrix& q, double p) {
  const int n = q.size();
  const double d = checked_det(q);
  const double pref = -p * std::exp(log_weight(hs_norm(q), d, n * p - 2.0, p));
  Tensor4 a = linearization_bracket(q, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) a(i, j, k, l) *= pref;
  return a;
}

/// A^{ik}_{jl} eta_i xi^j eta_k xi^l
inline double lh_quadratic_form(const Tensor4& a, const Vector& xi, const Vector& eta) {
  const int n = a.size();
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s += a(i, j, k, l) * eta[i] * xi[j] * eta[k] * xi[l];
  return s;
}

/// Lower Legendre-Hadamard constant. n = 3 takes the smaller of the two
/// admissible choices; n = 2 requires p > 1.
inline double lh_lower_constant(int n, double p) {
  if (p < 1.0) throw Error(ErrorCode::UnsupportedRegime, "p must be >= 1");
  if (n == 2) {
    if (!(p > 1.0)) throw Error(ErrorCode::UnsupportedRegime, "n = 2 requires p > 1");
    return 2.0 * (p - 1.0) / (p + 1.0);
  }
  if (n == 3) return std::min(3.0, (6.0 * p - 3.0) / (p + 1.0));
  return static_cast<double>(n);
}

inline double lh_upper_constant(int n) { return 100.0 * n * n * n; }

/// Upper LH bound C2(n) p^2 (|q|^{np-2}/det^p + |q|^{n(p+2)-2}/det^{p+2}).
inline double lh_upper_bound(const SquareMatrix& q, double p) {
  const int n = q.size();
  const double d = checked_det(q);
  const double norm = hs_norm(q);
  return lh_upper_constant(n) * p * p *
         (std::exp(log_weight(norm, d, n * p - 2.0, p)) +
          std::exp(log_weight(norm, d, n * (p + 2.0) - 2.0, p + 2.0)));
}

struct EllipticityWitness {
  SquareMatrix q;
  Vector xi;
  Vector eta;
  double p = 1.0;
  double quadForm = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  /// lower <= quadForm <= upper, with a relative round-off allowance of 1e-12.
  bool holds() const {
    const double slack = 1e-12 * std::max({std::abs(lower), std::abs(quadForm), 1e-300});
    return lower <= quadForm + slack && quadForm <= upper + slack;
  }
};

inline EllipticityWitness lh_witness(const SquareMatrix& q, Vector xi, Vector eta, double p) {
  const int n = q.size();
  const double c1 = lh_lower_constant(n, p);
  const double d = checked_det(q);
  xi *= 1.0 / xi.norm();
  eta *= 1.0 / eta.norm();
  EllipticityWitness w{q, xi, eta, p};
  w.quadForm = lh_quadratic_form(flux_linearization(q, p), xi, eta);
  w.lower = c1 * p * std::exp(log_weight(hs_norm(q), d, n * p - 2.0, p));
  w.upper = lh_upper_bound(q, p);
  return w;
}

/// Contraction A^{ik}_{jl} H(k, j, l).
inline Vector contract_hessian(const Tensor4& a, const Hessian& h) {
  const int n = a.size();
  Vector out(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s += a(i, j, k, l) * h(k, j, l);
    out[i] = s;
  }
  return out;
}

/// (L_p u)^i = A^{ik}_{jl}(du) u^k_{jl}
inline Vector lp_nondiv(const Jet2Sample& s, double p) {
  return contract_hessian(flux_linearization(s.J, p), s.H);
}

/// (L_p u)^i = d_j A^i_j(du) by central differences of the flux field with
/// step h. `jacobian_at` returns du at a point and throws on guard violation.
inline Vector lp_divergence(const std::function<SquareMatrix(const Vector&)>& jacobian_at,
                            const Vector& x, double p, double h) {
  const int n = x.size();
  Vector out(n);
  for (int j = 0; j < n; ++j) {
    Vector xp = x;
    Vector xm = x;
    xp[j] += h;
    xm[j] -= h;
    const SquareMatrix fp = flux(jacobian_at(xp), p);
    const SquareMatrix fm = flux(jacobian_at(xm), p);
    for (int i = 0; i < n; ++i) out[i] += (fp(i, j) - fm(i, j)) / (2.0 * h);
  }
  return out;
}

/// S(g) du^{-T}; row i is the i-th flow field and K dK/dq = this matrix.
inline SquareMatrix flow_matrix(const SquareMatrix& j) {
  return ahlfors(distortion_tensor(j)) * inverse(j).transpose();
}

/// Gradient of K in x from a jet: d_j K = K^{-1} (S(g) du^{-T})_{kl} u^k_{jl}.
inline Vector dilation_gradient(const Jet2Sample& s) {
  const int n = s.dim();
  const double k = trace_dilation(s.J);
  const SquareMatrix f = flow_matrix(s.J);
  Vector g(n);
  for (int j = 0; j < n; ++j) {
    double v = 0.0;
    for (int a = 0; a < n; ++a)
      for (int l = 0; l < n; ++l) v += f(a, l) * s.H(a, j, l);
    g[j] = v / k;
  }
  return g;
}

/// (n du_ij - |du|^2 du^{ji})(n du_kl - |du|^2 du^{lk}) d_j du_kl
inline Vector linfty_factored(const Jet2Sample& s) {
  const int n = s.dim();
  checked_det(s.J);
  const double norm_sq = s.J.contract(s.J);
  const SquareMatrix m = s.J * static_cast<double>(n) - inverse(s.J).transpose() * norm_sq;
  // c_j = m_kl d_j du_kl = m_kl H(k, l, j)
  Vector c(n);
  for (int j = 0; j < n; ++j) {
    double v = 0.0;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) v += m(k, l) * s.H(k, l, j);
    c[j] = v;
  }
  return m * c;
}

/// n^2 |du|^4 / K^3 (S(g) du^{-T})_{ij} d_j K
inline Vector linfty_flowform(const Jet2Sample& s) {
  const int n = s.dim();
  const double k = trace_dilation(s.J);
  const double norm_sq = s.J.contract(s.J);
  const Vector grad_k = dilation_gradient(s);
  return (flow_matrix(s.J) * grad_k) * (n * n * norm_sq * norm_sq / (k * k * k));
}

/// lp_nondiv(s, p) / (p^2 |du|^{np-4} / det^p), evaluated without forming the
/// large weights: equals -(|du|^2 / p) * bracket contracted with the Hessian.
inline Vector lp_asymptotic_ratio(const Jet2Sample& s, double p) {
  checked_det(s.J);
  const double norm_sq = s.J.contract(s.J);
  return contract_hessian(linearization_bracket(s.J, p), s.H) * (-norm_sq / p);
}

/// B_ih(q) = p (delta_hi - n (q q^T)_hi / |q|^2) |q|^{np} / det^p
inline SquareMatrix b_tensor(const SquareMatrix& q, double p) {
  const int n = q.size();
  const double d = checked_det(q);
  const double norm_sq = q.contract(q);
  const double w = std::exp(log_weight(std::sqrt(norm_sq), d, n * p, p));
  SquareMatrix b = (q * q.transpose()) * (-n / norm_sq);
  for (int i = 0; i < n; ++i) b(i, i) += 1.0;
  return b * (p * w);
}

inline double b_quadratic_form(const SquareMatrix& b, const Vector& eta) { return eta.dot(b * eta); }

}  // namespace qcflow
