#pragma once

// Tangential dilation of a map restricted to a hypersurface, in adapted
// orthonormal frames of the hypersurface and of its image.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "qcflow/core.hpp"
#include "qcflow/error.hpp"
#include "qcflow/maps.hpp"

namespace qcflow {

/// A sphere or a hyperplane in R^n.
struct Hypersurface {
  enum class Kind { Sphere, Plane };
  Kind kind = Kind::Sphere;
  Vector point;  // sphere centre, or a point on the plane
  double radius = 1.0;
  Vector normal;  // plane only; unit

  static Hypersurface sphere(const Vector& center, double radius) {
    if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "sphere radius must be positive");
    return {Kind::Sphere, center, radius, Vector(center.size())};
  }
  static Hypersurface plane(const Vector& point, const Vector& normal) {
    const double len = normal.norm();
    if (!(len > 0.0)) throw Error(ErrorCode::InvalidArgument, "plane normal must be nonzero");
    return {Kind::Plane, point, 0.0, normal * (1.0 / len)};
  }

  int dim() const { return point.size(); }

  /// Signed distance to the surface (outward positive for spheres).
  double offset(const Vector& x) const {
    if (kind == Kind::Sphere) return (x - point).norm() - radius;
    return (x - point).dot(normal);
  }

  /// Unit normal at x (outward for spheres).
  Vector normal_at(const Vector& x) const {
    if (kind == Kind::Plane) return normal;
    const Vector d = x - point;
    return d * (1.0 / d.norm());
  }

  void require_on(const Vector& x) const {
    const double scale = kind == Kind::Sphere ? radius : 1.0 + (x - point).norm();
    if (std::abs(offset(x)) > 1e-8 * scale) {
      throw Error(ErrorCode::InvalidArgument, "point is not on the hypersurface");
    }
  }
};

/// Frames (n, e_1..e_{n-1}) and (w_0, w_1..w_{n-1}), both orthonormal with
/// determinant +1, such that du e_i spans span(w_1..w_{n-1}) and <du n, w_0> > 0.
struct AdaptedFrame {
  Vector x;
  Vector normal;
  std::vector<Vector> tangents;
  Vector image_normal;
  std::vector<Vector> image_tangents;
  SquareMatrix J;

  int dim() const { return x.size(); }

  /// (d^M U)_{ij} = <du e_i, w_j>
  SquareMatrix restricted_differential() const {
    const int m = dim() - 1;
    SquareMatrix d(m);
    for (int i = 0; i < m; ++i) {
      const Vector je = J * tangents[i];
      for (int j = 0; j < m; ++j) d(i, j) = je.dot(image_tangents[j]);
    }
    return d;
  }

  /// Largest deviation of either frame from orthonormality.
  double orthonormality_error() const {
    auto check = [](const Vector& a, const std::vector<Vector>& rest) {
      std::vector<Vector> all{a};
      all.insert(all.end(), rest.begin(), rest.end());
      double err = 0.0;
      for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = 0; j < all.size(); ++j)
          err = std::max(err, std::abs(all[i].dot(all[j]) - (i == j ? 1.0 : 0.0)));
      return err;
    };
    return std::max(check(normal, tangents), check(image_normal, image_tangents));
  }
};

namespace detail {

/// Modified Gram-Schmidt of v against `basis`, with one re-orthogonalization pass.
inline Vector orthogonalize(Vector v, const std::vector<Vector>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const Vector& b : basis) v -= b * v.dot(b);
  return v;
}

inline double frame_det(const Vector& first, const std::vector<Vector>& rest) {
  const int n = first.size();
  SquareMatrix m(n);
  for (int i = 0; i < n; ++i) m(i, 0) = first[i];
  for (int c = 1; c < n; ++c)
    for (int i = 0; i < n; ++i) m(i, c) = rest[c - 1][i];
  return determinant(m);
}

}  // namespace detail

/// Dependency tolerance for the image tangents.
inline constexpr double kTangentDependencyTol = 1e-10;

/// Adapted frames for the Jacobian J at a point with unit normal `normal`.
inline AdaptedFrame adapted_frame(const SquareMatrix& j, const Vector& normal, const Vector& x) {
  const int n = j.size();
  check_dim(n, 3);
  checked_det(j);
  AdaptedFrame f{x, normal * (1.0 / normal.norm()), {}, Vector(n), {}, j};

  // Tangents from the n-1 standard axes least aligned with the normal.
  std::array<int, kMaxDim> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.begin() + n, [&](int a, int b) {
    return std::abs(f.normal[a]) < std::abs(f.normal[b]);
  });
  std::vector<Vector> basis{f.normal};
  for (int k = 0; k < n - 1; ++k) {
    Vector t = detail::orthogonalize(Vector::unit(n, order[k]), basis);
    t *= 1.0 / t.norm();
    basis.push_back(t);
    f.tangents.push_back(t);
  }
  if (detail::frame_det(f.normal, f.tangents) < 0.0) f.tangents.back() *= -1.0;

  for (int k = 0; k < n - 1; ++k) {
    const Vector v = j * f.tangents[k];
    Vector w = detail::orthogonalize(v, f.image_tangents);
    const double len = w.norm();
    if (!(len > kTangentDependencyTol * v.norm())) {
      throw Error(ErrorCode::DegenerateTangentImage, "du e_i are numerically dependent");
    }
    f.image_tangents.push_back(w * (1.0 / len));
  }
  Vector w0 = detail::orthogonalize(j * f.normal, f.image_tangents);
  f.image_normal = w0 * (1.0 / w0.norm());
  if (detail::frame_det(f.image_normal, f.image_tangents) < 0.0) f.image_tangents.back() *= -1.0;
  return f;
}

inline AdaptedFrame adapted_frame(const SmoothMap& map, const Hypersurface& m, const Vector& x) {
  m.require_on(x);
  return adapted_frame(map.jet(x).J, m.normal_at(x), x);
}

/// K_{u,M} = |d^M U| / det(d^M U)^{1/(n-1)}
inline double tangential_dilation(const AdaptedFrame& f) {
  const SquareMatrix d = f.restricted_differential();
  const double det = determinant(d);
  if (!(det > 0.0)) throw Error(ErrorCode::DegenerateTangentImage, "det d^M U <= 0");
  return hs_norm(d) / std::pow(det, 1.0 / (f.dim() - 1));
}

inline double tangential_dilation(const SmoothMap& map, const Hypersurface& m, const Vector& x) {
  return tangential_dilation(adapted_frame(map, m, x));
}

struct TraceInequality {
  double lhs = 0.0;  // K_{u,M}^2
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  double norm_identity_residual = 0.0;  // relative: |du|^2 vs |d^M U|^2 + |du n|^2
  double det_identity_residual = 0.0;   // relative: det du vs <du n, w_0> det d^M U
};

/// K_{u,M}^2 <= n^{1/(n-1)} K^{2n/(n-1)} - |du n|^2 <du n, w_0>^{2/(n-1)} / det(du)^{2/(n-1)}
inline TraceInequality trace_inequality_check(const AdaptedFrame& f) {
  const int n = f.dim();
  const double e = 1.0 / (n - 1.0);
  const SquareMatrix d = f.restricted_differential();
  const double det_du = checked_det(f.J);
  const double k = trace_dilation(f.J);
  const Vector jn = f.J * f.normal;
  const double a = jn.dot(f.image_normal);
  const double kt = tangential_dilation(f);

  TraceInequality r;
  r.lhs = kt * kt;
  r.rhs = std::pow(n, e) * std::pow(k, 2.0 * n * e) - jn.dot(jn) * std::pow(a / det_du, 2.0 * e);
  r.slack = r.rhs - r.lhs;
  const double norm_sq = f.J.contract(f.J);
  r.norm_identity_residual = std::abs(norm_sq - d.contract(d) - jn.dot(jn)) / norm_sq;
  r.det_identity_residual = std::abs(det_du - a * determinant(d)) / det_du;
  return r;
}

inline TraceInequality trace_inequality_check(const SmoothMap& map, const Hypersurface& m,
                                              const Vector& x) {
  return trace_inequality_check(adapted_frame(map, m, x));
}

struct CriticalEquality {
  double lhs = 0.0;  // (n-1)/n^{n/(n-1)} K^{2n/(n-1)}
  double rhs = 0.0;  // K_{u,M}^2 on the plane orthogonal to the normal
};

/// Equality case of the trace relation when the normal is an eigenvector of
/// J^T J with eigenvalue |J|^2/n.
inline CriticalEquality critical_equality_check(const SquareMatrix& j, const Vector& normal) {
  const int n = j.size();
  const Vector nu = normal * (1.0 / normal.norm());
  const double norm_sq = j.contract(j);
  const Vector resid = (j.transpose() * (j * nu)) - nu * (norm_sq / n);
  if (resid.norm() > 1e-8 * norm_sq) {
    throw Error(ErrorCode::HypothesisViolated, "normal is not an eigenvector of J^T J for |J|^2/n");
  }
  const double e = 1.0 / (n - 1.0);
  CriticalEquality c;
  c.lhs = (n - 1.0) / std::pow(n, n * e) * std::pow(trace_dilation(j), 2.0 * n * e);
  const double kt = tangential_dilation(adapted_frame(j, nu, Vector(n)));
  c.rhs = kt * kt;
  return c;
}

}  // namespace qcflow
