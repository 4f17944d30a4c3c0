#pragma once

// Named test maps addressable by string id, plus seeded map generators.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qcflow/error.hpp"
#include "qcflow/maps.hpp"
#include "qcflow/random.hpp"

namespace qcflow {

/// u(x) = A x + eps * sum_{a<=b<=c} C^k_{abc} x_a x_b x_c with seeded A (det > 0) and C.
inline SmoothMap cubic_perturbation(std::uint64_t seed, double eps, int n) {
  Rng rng(seed);
  const SquareMatrix a = rng.positive_matrix(n, 10.0);
  std::vector<double> c(static_cast<std::size_t>(n * n * n * n));
  for (double& v : c) v = rng.normal();
  return make_analytic("cubic", {static_cast<double>(seed), eps}, n, [a, c, eps, n](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    Point<T> y{};
    for (int k = 0; k < n; ++k) {
      T s = T(0.0);
      for (int j = 0; j < n; ++j) s += T(a(k, j)) * x[j];
      T cub = T(0.0);
      for (int p = 0; p < n; ++p)
        for (int q = p; q < n; ++q)
          for (int r = q; r < n; ++r) {
            cub += T(c[((k * n + p) * n + q) * n + r]) * x[p] * x[q] * x[r];
          }
      y[k] = s + T(eps) * cub;
    }
    return y;
  });
}

/// Polynomial bump b(x) = prod_i (4 x_i (1 - x_i))^3 on [0,1]^n; b = 1 at the
/// centre and vanishes to third order on the faces.
template <class T>
T box_bump(const Point<T>& x, int n) {
  T b = T(1.0);
  for (int i = 0; i < n; ++i) {
    const T f = T(4.0) * x[i] * (T(1.0) - x[i]);
    b = b * f * f * f;
  }
  return b;
}

/// v(x) = delta * (y + amp * b(y) * (1, ..., 1)) with y = lambda x.
/// delta = lambda = 1 gives the unscaled initial datum x + amp * bump.
inline SmoothMap bump_map(double amp, int n, double delta = 1.0, double lambda = 1.0) {
  return make_analytic("bump", {amp, delta, lambda}, n, [amp, delta, lambda, n](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    Point<T> y{};
    for (int i = 0; i < n; ++i) y[i] = T(lambda) * x[i];
    const T b = box_bump(y, n);
    Point<T> out{};
    for (int i = 0; i < n; ++i) out[i] = T(delta) * (y[i] + T(amp) * b);
    return out;
  });
}

/// s * psi o A o phi with phi = inversion o T_a (|a| = 2.5), psi = inversion o T_b
/// (|b| = 3), A a seeded linear map of moderate distortion and the dilation s
/// chosen so that |du(0)| = sqrt(n). Conformal pre- and post-composition keep
/// K equal to the constant K_A.
inline SmoothMap teichmuller_map(std::uint64_t seed, int n) {
  Rng rng(seed);
  const Vector a = rng.unit_vector(n) * 2.5;
  const Vector b = rng.unit_vector(n) * 3.0;
  SquareMatrix lin = rng.positive_matrix(n, 4.0);
  lin *= 1.0 / std::pow(determinant(lin), 1.0 / n);
  const SmoothMap phi = compose(moebius_inversion(n).map(), moebius_translation(a).map());
  const SmoothMap psi = compose(moebius_inversion(n).map(), moebius_translation(b).map());
  const SmoothMap core = compose(psi, compose(affine_map(lin, Vector(n)), phi));
  const double s = std::sqrt(static_cast<double>(n)) / hs_norm(core.jet(Vector(n)).J);
  const SmoothMap m = compose(moebius_dilation(n, s).map(), core);
  return SmoothMap("teichmuller", {static_cast<double>(seed)}, n,
                   [m](const Vector& x) { return m.value(x); },
                   [m](const Vector& x) { return m.jet(x); },
                   [m](const Vector& x) { return m.guard(x); });
}

/// Random word of at most `max_len` Moebius generators. Inversions are always
/// preceded by a translation of length >= 3 so that bounded sets stay clear of
/// the pole.
inline ConformalMap random_moebius_word(Rng& rng, int n, int max_len) {
  const int len = 1 + static_cast<int>(rng.uniform() * max_len);
  ConformalMap word = moebius_dilation(n, 1.0);
  for (int w = 0; w < len; ++w) {
    const int kind = static_cast<int>(rng.uniform() * 4.0);
    ConformalMap g = moebius_dilation(n, 1.0);
    switch (kind) {
      case 0: g = moebius_rotation(rng.rotation(n)); break;
      case 1: g = moebius_dilation(n, rng.uniform(0.5, 2.0)); break;
      case 2: g = moebius_translation(rng.normal_vector(n)); break;
      default:
        g = compose(moebius_inversion(n), moebius_translation(rng.unit_vector(n) * rng.uniform(3.0, 4.0)));
        break;
    }
    word = compose(g, word);
  }
  return word;
}

namespace detail {

inline void need_params(const std::string& id, const std::vector<double>& p, std::size_t k) {
  if (p.size() < k) {
    throw Error(ErrorCode::InvalidArgument,
                "map '" + id + "' needs " + std::to_string(k) + " parameter(s)");
  }
}

inline double param_or(const std::vector<double>& p, std::size_t i, double fallback) {
  return i < p.size() ? p[i] : fallback;
}

}  // namespace detail

inline const std::vector<std::string>& registered_maps() {
  static const std::vector<std::string> ids = {
      "identity", "affine",      "radial",   "wedge",       "inversion", "dilation",
      "translation", "rotation", "teichmuller", "cubic",     "bump"};
  return ids;
}

/// Looks up a map by id. Parameters:
///   identity; affine [A row-major (n^2), optional b (n)]; radial [alpha];
///   wedge [alpha]; inversion; dilation [s]; translation [a_1..a_n];
///   rotation [angle in the x1-x2 plane]; teichmuller [seed];
///   cubic [seed, eps]; bump [amp, delta = 1, lambda = 1].
inline SmoothMap make_map(const std::string& id, const std::vector<double>& p, int n) {
  check_dim(n, 2);
  if (id == "identity") return identity_map(n);
  if (id == "affine") {
    detail::need_params(id, p, static_cast<std::size_t>(n * n));
    SquareMatrix a(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = p[i * n + j];
    Vector b(n);
    if (p.size() >= static_cast<std::size_t>(n * n + n))
      for (int i = 0; i < n; ++i) b[i] = p[n * n + i];
    return affine_map(a, b);
  }
  if (id == "radial") {
    detail::need_params(id, p, 1);
    return radial_stretch(p[0], n);
  }
  if (id == "wedge") {
    detail::need_params(id, p, 1);
    return wedge_map(p[0], n);
  }
  if (id == "inversion") return moebius(MoebiusKind::Inversion, p, n).map();
  if (id == "dilation") return moebius(MoebiusKind::Dilation, p, n).map();
  if (id == "translation") return moebius(MoebiusKind::Translation, p, n).map();
  if (id == "rotation") return moebius(MoebiusKind::Rotation, p, n).map();
  if (id == "teichmuller") {
    return teichmuller_map(static_cast<std::uint64_t>(detail::param_or(p, 0, 1.0)), n);
  }
  if (id == "cubic") {
    return cubic_perturbation(static_cast<std::uint64_t>(detail::param_or(p, 0, 1.0)),
                              detail::param_or(p, 1, 0.1), n);
  }
  if (id == "bump") {
    return bump_map(detail::param_or(p, 0, 0.05), n, detail::param_or(p, 1, 1.0),
                    detail::param_or(p, 2, 1.0));
  }
  throw Error(ErrorCode::UnknownMap, "unknown map id '" + id + "'");
}

}  // namespace qcflow
