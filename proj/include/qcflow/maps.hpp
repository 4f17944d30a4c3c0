#pragma once

// Analytic test maps with exact second-order jets.

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qcflow/core.hpp"
#include "qcflow/error.hpp"
#include "qcflow/jet.hpp"
#include "qcflow/matrix.hpp"

namespace qcflow {

template <class T>
using Point = std::array<T, kMaxDim>;

/// Returns the reason a point is outside the map's domain, if it is.
using DomainGuard = std::function<std::optional<ErrorCode>(const Vector&)>;

/// A map R^n -> R^n that can be sampled for values and second-order jets.
/// Immutable after construction; copies share the underlying callables.
class SmoothMap {
 public:
  using ValueFn = std::function<Vector(const Vector&)>;
  using JetFn = std::function<Jet2Sample(const Vector&)>;

  SmoothMap(std::string name, std::vector<double> params, int n, ValueFn value, JetFn jet,
            DomainGuard guard = {})
      : name_(std::move(name)),
        params_(std::move(params)),
        n_(n),
        value_(std::move(value)),
        jet_(std::move(jet)),
        guard_(std::move(guard)) {
    check_dim(n, 2);
  }

  int dim() const { return n_; }
  const std::string& name() const { return name_; }
  const std::vector<double>& params() const { return params_; }

  std::optional<ErrorCode> guard(const Vector& x) const {
    return guard_ ? guard_(x) : std::nullopt;
  }
  bool in_domain(const Vector& x) const { return !guard(x).has_value(); }

  Vector value(const Vector& x) const {
    check(x);
    return value_(x);
  }
  Jet2Sample jet(const Vector& x) const {
    check(x);
    return jet_(x);
  }

 private:
  void check(const Vector& x) const {
    if (x.size() != n_) throw Error(ErrorCode::InvalidArgument, name_ + ": dimension mismatch");
    if (auto e = guard(x)) throw Error(*e, name_ + " sampled outside its domain");
  }

  std::string name_;
  std::vector<double> params_;
  int n_;
  ValueFn value_;
  JetFn jet_;
  DomainGuard guard_;
};

/// Builds a SmoothMap from a generic callable `f(const Point<T>&) -> Point<T>`,
/// instantiated with double for values and Dual2 for exact jets.
template <class F>
SmoothMap make_analytic(std::string name, std::vector<double> params, int n, F f,
                        DomainGuard guard = {}) {
  auto value = [f, n](const Vector& x) {
    Point<double> p{};
    for (int i = 0; i < n; ++i) p[i] = x[i];
    const Point<double> r = f(p);
    Vector out(n);
    for (int i = 0; i < n; ++i) out[i] = r[i];
    return out;
  };
  auto jet = [f, n](const Vector& x) {
    Point<Dual2> p{};
    for (int i = 0; i < n; ++i) p[i] = Dual2::variable(x[i], i);
    const Point<Dual2> r = f(p);
    Jet2Sample s{x, Vector(n), SquareMatrix(n), Hessian(n)};
    for (int k = 0; k < n; ++k) {
      s.u[k] = r[k].value();
      for (int j = 0; j < n; ++j) {
        s.J(k, j) = r[k].grad(j);
        for (int l = 0; l < n; ++l) s.H(k, j, l) = r[k].hess(j, l);
      }
    }
    return s;
  };
  return SmoothMap(std::move(name), std::move(params), n, value, jet, std::move(guard));
}

// ---------------------------------------------------------------------------
// Elementary maps

inline SmoothMap identity_map(int n) {
  return make_analytic("identity", {}, n, [](const auto& x) { return x; });
}

/// u(x) = A x + b
inline SmoothMap affine_map(const SquareMatrix& a, const Vector& b) {
  const int n = a.size();
  std::vector<double> params;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) params.push_back(a(i, j));
  for (int i = 0; i < n; ++i) params.push_back(b[i]);
  return make_analytic("affine", std::move(params), n, [a, b, n](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    Point<T> y{};
    for (int i = 0; i < n; ++i) {
      T s = T(b[i]);
      for (int j = 0; j < n; ++j) s += T(a(i, j)) * x[j];
      y[i] = s;
    }
    return y;
  });
}

namespace detail {

inline DomainGuard exclude_origin(double tol = 1e-12) {
  return [tol](const Vector& x) -> std::optional<ErrorCode> {
    if (x.norm() <= tol) return ErrorCode::OriginExcluded;
    return std::nullopt;
  };
}

template <class T>
T squared_norm(const Point<T>& x, int n) {
  T s = T(0.0);
  for (int i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

}  // namespace detail

/// Closed forms of the radial stretch u(x) = |x|^{alpha-1} x.
struct RadialClosedForms {
  double alpha;
  int n;

  double K2() const { return (n + alpha * alpha - 1.0) / std::pow(alpha, 2.0 / n); }

  SquareMatrix Sg(const Vector& x) const {
    const Vector xh = x * (1.0 / x.norm());
    SquareMatrix s = SquareMatrix::outer(xh, xh);
    for (int i = 0; i < n; ++i) s(i, i) -= 1.0 / n;
    return s * ((alpha * alpha - 1.0) / std::pow(alpha, 2.0 / n));
  }

  /// L_p u at x, derived from K constant and div(S(g) du^{-T}) = c (n-1)/alpha x/|x|^{alpha+1}.
  Vector Lp(const Vector& x, double p) const {
    const double a2 = alpha * alpha;
    const double coef = n * p * (n - 1.0) * (a2 - 1.0) / ((n + a2 - 1.0) * alpha) *
                        std::pow(K2(), n * p / 2.0);
    return x * (coef / std::pow(x.norm(), alpha + 1.0));
  }

  /// The same quantity as printed with the example:
  /// -((n+a^2-1)/a^2)^{np/2} n (a^2-1)(n-1)/((n+a^2-1) a) x/|x|^{a+1}.
  /// Differs from Lp() by the factor -p alpha^{(n-1)p}.
  Vector Lp_as_printed(const Vector& x, double p) const {
    const double a2 = alpha * alpha;
    const double coef = -std::pow((n + a2 - 1.0) / a2, n * p / 2.0) * n * (a2 - 1.0) * (n - 1.0) /
                        ((n + a2 - 1.0) * alpha);
    return x * (coef / std::pow(x.norm(), alpha + 1.0));
  }
};

inline SmoothMap radial_stretch(double alpha, int n) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "radial_stretch requires alpha > 0");
  return make_analytic(
      "radial", {alpha}, n,
      [alpha, n](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        using std::pow;
        const T scale = pow(detail::squared_norm(x, n), 0.5 * (alpha - 1.0));
        Point<T> y{};
        for (int i = 0; i < n; ++i) y[i] = scale * x[i];
        return y;
      },
      detail::exclude_origin());
}

/// Width of the angular band excluded around the wedge seams.
inline constexpr double kSeamBand = 1e-6;

/// Polar angle of (x1, x2) in [0, 2 pi).
inline double polar_angle(double x1, double x2) {
  double t = std::atan2(x2, x1);
  if (t < 0.0) t += 2.0 * std::numbers::pi;
  return t;
}

/// Piecewise-linear angular map: [0, alpha] -> [0, pi], (alpha, 2pi) -> (pi, 2pi),
/// identity in r and in the remaining coordinates.
inline SmoothMap wedge_map(double alpha, int n) {
  constexpr double pi = std::numbers::pi;
  if (!(alpha > 0.0 && alpha < 2.0 * pi)) {
    throw Error(ErrorCode::InvalidArgument, "wedge_map requires 0 < alpha < 2 pi");
  }
  DomainGuard guard = [alpha](const Vector& x) -> std::optional<ErrorCode> {
    if (std::hypot(x[0], x[1]) <= 1e-12) return ErrorCode::AxisExcluded;
    const double t = polar_angle(x[0], x[1]);
    if (t < kSeamBand || t > 2.0 * pi - kSeamBand || std::abs(t - alpha) < kSeamBand) {
      return ErrorCode::SeamExcluded;
    }
    return std::nullopt;
  };
  return make_analytic(
      "wedge", {alpha}, n,
      [alpha, n](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        using std::atan2;
        using std::cos;
        using std::sin;
        using std::sqrt;
        const double t0 = polar_angle(value_of(x[0]), value_of(x[1]));
        // Shift atan2's branch so that the sector's angle is continuous.
        T theta = atan2(x[1], x[0]);
        if (value_of(theta) < 0.0) theta = theta + T(2.0 * pi);
        T phi = t0 <= alpha ? theta * T(pi / alpha)
                            : T(pi) + (theta - T(alpha)) * T(pi / (2.0 * pi - alpha));
        const T r = sqrt(x[0] * x[0] + x[1] * x[1]);
        Point<T> y = x;
        y[0] = r * cos(phi);
        y[1] = r * sin(phi);
        (void)n;
        return y;
      },
      guard);
}

/// Closed forms of the wedge map on each sector.
struct WedgeClosedForms {
  double alpha;
  int n;

  bool first_sector(const Vector& x) const { return polar_angle(x[0], x[1]) <= alpha; }
  double slope(const Vector& x) const {
    return first_sector(x) ? std::numbers::pi / alpha
                           : std::numbers::pi / (2.0 * std::numbers::pi - alpha);
  }
  double det(const Vector& x) const { return slope(x); }
  double norm_sq(const Vector& x) const { return (n - 1.0) + slope(x) * slope(x); }
};

// ---------------------------------------------------------------------------
// Conformal maps

enum class MoebiusKind { Rotation, Dilation, Translation, Inversion };

/// A SmoothMap with dF^T dF = lambda I at every point, lambda = |dF|^2 / n.
class ConformalMap {
 public:
  explicit ConformalMap(SmoothMap map) : map_(std::move(map)) {}

  const SmoothMap& map() const { return map_; }
  int dim() const { return map_.dim(); }
  double conformal_factor(const Vector& x) const {
    const Jet2Sample s = map_.jet(x);
    return s.J.contract(s.J) / dim();
  }

 private:
  SmoothMap map_;
};

inline ConformalMap moebius_rotation(const SquareMatrix& q) {
  const int n = q.size();
  const SquareMatrix qtq = q.transpose() * q - SquareMatrix::identity(n);
  if (hs_norm(qtq) > 1e-10 || determinant(q) <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "rotation must be orthogonal with det +1");
  }
  SmoothMap m = affine_map(q, Vector(n));
  return ConformalMap(SmoothMap("rotation", m.params(), n,
                                [m](const Vector& x) { return m.value(x); },
                                [m](const Vector& x) { return m.jet(x); }));
}

inline ConformalMap moebius_dilation(int n, double s) {
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "dilation factor must be positive");
  return ConformalMap(make_analytic("dilation", {s}, n, [s, n](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    Point<T> y{};
    for (int i = 0; i < n; ++i) y[i] = T(s) * x[i];
    return y;
  }));
}

inline ConformalMap moebius_translation(const Vector& a) {
  const int n = a.size();
  std::vector<double> params(n);
  for (int i = 0; i < n; ++i) params[i] = a[i];
  return ConformalMap(make_analytic("translation", params, n, [a, n](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    Point<T> y{};
    for (int i = 0; i < n; ++i) y[i] = x[i] + T(a[i]);
    return y;
  }));
}

/// Orientation-preserving inversion x -> R x / |x|^2 with R the reflection
/// x1 -> -x1 (the bare inversion reverses orientation).
inline ConformalMap moebius_inversion(int n) {
  return ConformalMap(make_analytic(
      "inversion", {}, n,
      [n](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        const T r2 = detail::squared_norm(x, n);
        Point<T> y{};
        for (int i = 0; i < n; ++i) y[i] = x[i] / r2;
        y[0] = -y[0];
        return y;
      },
      detail::exclude_origin()));
}

/// Dispatch used by the registry. Parameters:
///   rotation: angle in the (x1, x2) plane; dilation: s; translation: a_1..a_n; inversion: none.
inline ConformalMap moebius(MoebiusKind kind, const std::vector<double>& params, int n) {
  auto need = [&](std::size_t k) {
    if (params.size() < k) throw Error(ErrorCode::InvalidArgument, "moebius: too few parameters");
  };
  switch (kind) {
    case MoebiusKind::Rotation: {
      need(1);
      SquareMatrix q = SquareMatrix::identity(n);
      q(0, 0) = std::cos(params[0]);
      q(0, 1) = -std::sin(params[0]);
      q(1, 0) = std::sin(params[0]);
      q(1, 1) = std::cos(params[0]);
      return moebius_rotation(q);
    }
    case MoebiusKind::Dilation:
      need(1);
      return moebius_dilation(n, params[0]);
    case MoebiusKind::Translation: {
      need(static_cast<std::size_t>(n));
      Vector a(n);
      for (int i = 0; i < n; ++i) a[i] = params[i];
      return moebius_translation(a);
    }
    case MoebiusKind::Inversion:
      return moebius_inversion(n);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown Moebius kind");
}

// ---------------------------------------------------------------------------
// Composition and perturbation

/// Second-order chain rule: v = outer(inner(x)).
inline Jet2Sample compose_jets(const Jet2Sample& outer, const Jet2Sample& inner) {
  const int n = inner.dim();
  Jet2Sample s{inner.x, outer.u, outer.J * inner.J, Hessian(n)};
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        double v = 0.0;
        for (int m = 0; m < n; ++m) {
          v += outer.J(k, m) * inner.H(m, j, l);
          for (int q = 0; q < n; ++q) v += outer.H(k, m, q) * inner.J(m, j) * inner.J(q, l);
        }
        s.H(k, j, l) = v;
      }
  return s;
}

inline SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner) {
  if (outer.dim() != inner.dim()) {
    throw Error(ErrorCode::InvalidArgument, "compose: dimension mismatch");
  }
  DomainGuard guard = [outer, inner](const Vector& x) -> std::optional<ErrorCode> {
    if (auto e = inner.guard(x)) return e;
    return outer.guard(inner.value(x));
  };
  return SmoothMap(
      outer.name() + "o" + inner.name(), {}, inner.dim(),
      [outer, inner](const Vector& x) { return outer.value(inner.value(x)); },
      [outer, inner](const Vector& x) {
        const Jet2Sample in = inner.jet(x);
        return compose_jets(outer.jet(in.u), in);
      },
      guard);
}

inline ConformalMap compose(const ConformalMap& outer, const ConformalMap& inner) {
  return ConformalMap(compose(outer.map(), inner.map()));
}

/// Smooth bump on the unit sphere: phi(w) = exp(1 - 1/(1 - s)) for
/// s = (1 - <w, c>)/(1 - cos(radius)) < 1 and 0 otherwise, so phi(c) = 1 and
/// the support is the geodesic cap of the given angular radius around c.
struct SphereBump {
  Vector center;  // unit
  double radius;  // angular radius in (0, pi)

  template <class T>
  T operator()(const Point<T>& w, int n) const {
    using std::exp;
    T dot = T(0.0);
    for (int i = 0; i < n; ++i) dot += w[i] * T(center[i]);
    const T s = (T(1.0) - dot) / T(1.0 - std::cos(radius));
    if (!(value_of(s) < 1.0)) return T(0.0);
    return exp(T(1.0) - T(1.0) / (T(1.0) - s));
  }
};

/// chi(x) = (1 - |x|^2) sum_l phi_l(x/|x|) v_l
inline SmoothMap competitor_field(std::vector<Vector> vectors, std::vector<SphereBump> bumps) {
  if (vectors.empty() || vectors.size() != bumps.size()) {
    throw Error(ErrorCode::InvalidArgument, "competitor: need one vector per bump");
  }
  const int n = vectors.front().size();
  return make_analytic(
      "chi", {}, n,
      [vectors, bumps, n](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        using std::sqrt;
        const T r2 = detail::squared_norm(x, n);
        const T r = sqrt(r2);
        Point<T> w{};
        for (int i = 0; i < n; ++i) w[i] = x[i] / r;
        Point<T> y{};
        for (std::size_t b = 0; b < bumps.size(); ++b) {
          const T phi = bumps[b](w, n);
          for (int i = 0; i < n; ++i) y[i] += phi * T(vectors[b][i]);
        }
        const T cutoff = T(1.0) - r2;
        for (int i = 0; i < n; ++i) y[i] = cutoff * y[i];
        return y;
      },
      detail::exclude_origin());
}

/// Pointwise a + lambda * b.
inline SmoothMap add_scaled(const SmoothMap& a, const SmoothMap& b, double lambda) {
  DomainGuard guard = [a, b](const Vector& x) -> std::optional<ErrorCode> {
    if (auto e = a.guard(x)) return e;
    return b.guard(x);
  };
  return SmoothMap(
      a.name() + "+chi", {lambda}, a.dim(),
      [a, b, lambda](const Vector& x) { return a.value(x) + b.value(x) * lambda; },
      [a, b, lambda](const Vector& x) {
        Jet2Sample s = a.jet(x);
        const Jet2Sample t = b.jet(x);
        const int n = s.dim();
        s.u += t.u * lambda;
        s.J += t.J * lambda;
        for (int k = 0; k < n; ++k)
          for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) s.H(k, j, l) += lambda * t.H(k, j, l);
        return s;
      },
      guard);
}

/// u + lambda chi with chi vanishing on the unit sphere.
inline SmoothMap competitor_perturbation(const SmoothMap& base, std::vector<Vector> vectors,
                                         std::vector<SphereBump> bumps, double lambda) {
  return add_scaled(base, competitor_field(std::move(vectors), std::move(bumps)), lambda);
}

/// Default finite-difference step for fd_map at x.
inline double default_fd_step(const Vector& x) { return 1e-4 * (1.0 + x.norm()); }

/// Jets of a value function by central differences; step h, or the default
/// 1e-4 (1 + |x|) when h <= 0. Hessians are symmetrized.
inline SmoothMap fd_map(SmoothMap::ValueFn value_fn, int n, double h = 0.0,
                        DomainGuard guard = {}) {
  auto jet = [value_fn, n, h](const Vector& x) {
    const double step = h > 0.0 ? h : default_fd_step(x);
    Jet2Sample s{x, value_fn(x), SquareMatrix(n), Hessian(n)};
    auto at = [&](int a, double da, int b, double db) {
      Vector y = x;
      y[a] += da;
      if (b >= 0) y[b] += db;
      return value_fn(y);
    };
    for (int j = 0; j < n; ++j) {
      const Vector up = at(j, step, -1, 0.0);
      const Vector dn = at(j, -step, -1, 0.0);
      for (int k = 0; k < n; ++k) {
        s.J(k, j) = (up[k] - dn[k]) / (2.0 * step);
        s.H(k, j, j) = (up[k] - 2.0 * s.u[k] + dn[k]) / (step * step);
      }
      for (int l = j + 1; l < n; ++l) {
        const Vector pp = at(j, step, l, step);
        const Vector pm = at(j, step, l, -step);
        const Vector mp = at(j, -step, l, step);
        const Vector mm = at(j, -step, l, -step);
        for (int k = 0; k < n; ++k) {
          const double v = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * step * step);
          s.H(k, j, l) = v;
          s.H(k, l, j) = v;
        }
      }
    }
    return s;
  };
  return SmoothMap("fd", {h}, n, value_fn, jet, std::move(guard));
}

inline SmoothMap fd_map(const SmoothMap& analytic, double h = 0.0) {
  return fd_map([analytic](const Vector& x) { return analytic.value(x); }, analytic.dim(), h,
                [analytic](const Vector& x) { return analytic.guard(x); });
}

}  // namespace qcflow
