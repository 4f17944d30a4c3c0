#pragma once

// Seeded case generation. Distributions are implemented on raw 64-bit draws so
// that streams are identical across standard library implementations.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "qcflow/matrix.hpp"

namespace qcflow {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by Box-Muller (one value per call, no caching).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t next() { return engine_(); }

  Vector normal_vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Vector unit_vector(int n) {
    Vector v = normal_vector(n);
    double r = v.norm();
    while (r < 1e-8) {
      v = normal_vector(n);
      r = v.norm();
    }
    return v * (1.0 / r);
  }

  /// Uniform point in the ball of radius r.
  Vector in_ball(int n, double r) {
    return unit_vector(n) * (r * std::pow(uniform(), 1.0 / n));
  }

  /// Point with |x| uniform in [r0, r1] and uniform direction.
  Vector in_shell(int n, double r0, double r1) { return unit_vector(n) * uniform(r0, r1); }

  /// Gaussian matrix with det > 0 and condition number at most `max_cond`
  /// (redrawn otherwise); the first row is negated if needed.
  SquareMatrix positive_matrix(int n, double max_cond = 50.0) {
    for (;;) {
      SquareMatrix m(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = normal();
      const double d = determinant(m);
      if (d == 0.0) continue;
      if (d < 0.0)
        for (int j = 0; j < n; ++j) m(0, j) = -m(0, j);
      const double nm = std::sqrt(m.contract(m));
      const SquareMatrix inv = inverse(m);
      if (nm * std::sqrt(inv.contract(inv)) <= max_cond) return m;
    }
  }

  /// Rotation (det +1) by Gram-Schmidt on a Gaussian matrix.
  SquareMatrix rotation(int n) {
    SquareMatrix q(n);
    for (int c = 0; c < n; ++c) {
      Vector v = normal_vector(n);
      for (int k = 0; k < c; ++k) {
        const Vector e = q.col(k);
        v -= e * v.dot(e);
      }
      v *= 1.0 / v.norm();
      for (int i = 0; i < n; ++i) q(i, c) = v[i];
    }
    if (determinant(q) < 0.0)
      for (int i = 0; i < n; ++i) q(i, 0) = -q(i, 0);
    return q;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qcflow
