#pragma once

// Explicit finite-difference solver for d_t u = L_p u with Dirichlet data.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <exception>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>
#include <utility>
#include <vector>

#include "qcflow/core.hpp"
#include "qcflow/error.hpp"
#include "qcflow/maps.hpp"
#include "qcflow/operators.hpp"

namespace qcflow {

/// Lattice origin + h * index on a box, values stored node-major (node * n + component).
/// Node order is row-major: the last axis varies fastest.
class GridField {
 public:
  GridField(int n, std::vector<int> shape, double h, Vector origin)
      : n_(n), shape_(std::move(shape)), h_(h), origin_(std::move(origin)) {
    if (n != 2 && n != 3) throw Error(ErrorCode::InvalidArgument, "grid dimension must be 2 or 3");
    if (static_cast<int>(shape_.size()) != n || origin_.size() != n) {
      throw Error(ErrorCode::InvalidArgument, "grid shape/origin do not match n");
    }
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
    nodes_ = 1;
    for (int a = n - 1; a >= 0; --a) {
      if (shape_[a] < 4) throw Error(ErrorCode::InvalidArgument, "need at least 4 nodes per axis");
      stride_[a] = nodes_;
      nodes_ *= shape_[a];
    }
    values_.assign(static_cast<std::size_t>(nodes_) * n, 0.0);
    boundary_.assign(nodes_, 0);
    det_.assign(nodes_, 0.0);
    for (int node = 0; node < nodes_; ++node) {
      const auto idx = index(node);
      for (int a = 0; a < n; ++a)
        if (idx[a] == 0 || idx[a] == shape_[a] - 1) boundary_[node] = 1;
    }
  }

  /// Samples `map` at every node and fills the determinant cache.
  static GridField sample(const SmoothMap& map, std::vector<int> shape, double h, Vector origin) {
    GridField g(map.dim(), std::move(shape), h, std::move(origin));
    for (int node = 0; node < g.nodes_; ++node) {
      const Vector u = map.value(g.position(node));
      for (int k = 0; k < g.n_; ++k) g.values_[node * g.n_ + k] = u[k];
    }
    g.refresh_det_cache();
    return g;
  }

  int dim() const { return n_; }
  const std::vector<int>& shape() const { return shape_; }
  double h() const { return h_; }
  const Vector& origin() const { return origin_; }
  int node_count() const { return nodes_; }
  bool is_boundary(int node) const { return boundary_[node] != 0; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  const std::vector<double>& det_cache() const { return det_; }

  double value(int node, int k) const { return values_[node * n_ + k]; }

  std::array<int, 3> index(int node) const {
    std::array<int, 3> idx{};
    for (int a = 0; a < n_; ++a) {
      idx[a] = node / stride_[a];
      node %= stride_[a];
    }
    return idx;
  }
  int node_at(const std::array<int, 3>& idx) const {
    int node = 0;
    for (int a = 0; a < n_; ++a) node += idx[a] * stride_[a];
    return node;
  }
  Vector position(int node) const {
    const auto idx = index(node);
    Vector x = origin_;
    for (int a = 0; a < n_; ++a) x[a] += h_ * idx[a];
    return x;
  }
  double volume() const {
    double v = 1.0;
    for (int a = 0; a < n_; ++a) v *= h_ * (shape_[a] - 1);
    return v;
  }

  /// Finite-difference jet at a node: central stencils in the interior,
  /// second-order one-sided stencils on the faces.
  Jet2Sample jet(int node) const;

  void refresh_det_cache() {
    for (int node = 0; node < nodes_; ++node) det_[node] = determinant(jet(node).J);
  }
  double min_det() const { return *std::min_element(det_.begin(), det_.end()); }

 private:
  int n_;
  std::vector<int> shape_;
  double h_;
  Vector origin_;
  int nodes_ = 0;
  std::array<int, 3> stride_{};
  std::vector<double> values_;
  std::vector<char> boundary_;
  std::vector<double> det_;
};

namespace detail {

struct Tap {
  int offset;
  double weight;
};

struct Stencil {
  std::array<Tap, 4> taps{};
  int size = 0;
};

/// d/dx at index i of an axis with m nodes, in units of 1/h.
inline Stencil first_derivative(int i, int m) {
  if (i == 0) return {{{{0, -1.5}, {1, 2.0}, {2, -0.5}}}, 3};
  if (i == m - 1) return {{{{0, 1.5}, {-1, -2.0}, {-2, 0.5}}}, 3};
  return {{{{-1, -0.5}, {1, 0.5}}}, 2};
}

/// d^2/dx^2 at index i, in units of 1/h^2.
inline Stencil second_derivative(int i, int m) {
  if (i == 0) return {{{{0, 2.0}, {1, -5.0}, {2, 4.0}, {3, -1.0}}}, 4};
  if (i == m - 1) return {{{{0, 2.0}, {-1, -5.0}, {-2, 4.0}, {-3, -1.0}}}, 4};
  return {{{{-1, 1.0}, {0, -2.0}, {1, 1.0}}}, 3};
}

}  // namespace detail

inline Jet2Sample GridField::jet(int node) const {
  const int n = n_;
  const auto idx = index(node);
  Jet2Sample s{position(node), Vector(n), SquareMatrix(n), Hessian(n)};
  for (int k = 0; k < n; ++k) s.u[k] = value(node, k);
  const double ih = 1.0 / h_;
  const double ih2 = ih * ih;
  for (int j = 0; j < n; ++j) {
    const detail::Stencil d1 = detail::first_derivative(idx[j], shape_[j]);
    const detail::Stencil d2 = detail::second_derivative(idx[j], shape_[j]);
    for (int k = 0; k < n; ++k) {
      double a = 0.0;
      for (int t = 0; t < d1.size; ++t) a += d1.taps[t].weight * value(node + d1.taps[t].offset * stride_[j], k);
      s.J(k, j) = a * ih;
      double b = 0.0;
      for (int t = 0; t < d2.size; ++t) b += d2.taps[t].weight * value(node + d2.taps[t].offset * stride_[j], k);
      s.H(k, j, j) = b * ih2;
    }
    for (int l = j + 1; l < n; ++l) {
      const detail::Stencil e1 = detail::first_derivative(idx[l], shape_[l]);
      for (int k = 0; k < n; ++k) {
        double c = 0.0;
        for (int t = 0; t < d1.size; ++t)
          for (int r = 0; r < e1.size; ++r) {
            const int nb = node + d1.taps[t].offset * stride_[j] + e1.taps[r].offset * stride_[l];
            c += d1.taps[t].weight * e1.taps[r].weight * value(nb, k);
          }
        s.H(k, j, l) = c * ih2;
        s.H(k, l, j) = c * ih2;
      }
    }
  }
  return s;
}

/// Discrete L_p u at a node: flux linearization contracted with the FD Hessian.
inline Vector discrete_lp(const GridField& g, int node, double p) { return lp_nondiv(g.jet(node), p); }

/// Max over boundary nodes of |A^{ik}_{jl}(du_0) d_j d_l u_0^k| with one-sided stencils.
inline double compatibility_check(const GridField& g, double p) {
  double worst = 0.0;
  for (int node = 0; node < g.node_count(); ++node) {
    if (!g.is_boundary(node)) continue;
    worst = std::max(worst, discrete_lp(g, node, p).norm());
  }
  return worst;
}

/// (1/|Omega|) * trapezoidal quadrature of K^{np}.
inline double energy(const GridField& g, double p) {
  const int n = g.dim();
  double sum = 0.0;
  for (int node = 0; node < g.node_count(); ++node) {
    const auto idx = g.index(node);
    double w = 1.0;
    for (int a = 0; a < n; ++a)
      if (idx[a] == 0 || idx[a] == g.shape()[a] - 1) w *= 0.5;
    const double k = trace_dilation(g.jet(node).J);
    sum += w * std::exp(n * p * std::log(k));
  }
  return sum * std::pow(g.h(), n) / g.volume();
}

/// How Lambda in dt = c h^2 / Lambda is bounded.
enum class DtPolicy {
  /// Frobenius norm of A^{ik}_{jl}(du); bounds the LH upper constant pointwise.
  Frobenius,
  /// The lemma's C_2(n) p^2 (...) bound; valid but very pessimistic.
  LemmaBound,
};

inline double dtmax(const GridField& g, double p, double safety = 0.2,
                    DtPolicy policy = DtPolicy::Frobenius) {
  double lambda = 0.0;
  for (int node = 0; node < g.node_count(); ++node) {
    const SquareMatrix j = g.jet(node).J;
    const double l = policy == DtPolicy::Frobenius ? flux_linearization(j, p).frobenius()
                                                   : lh_upper_bound(j, p);
    lambda = std::max(lambda, l);
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::NonFiniteValue, "ellipticity bound is not positive and finite");
  }
  return safety * g.h() * g.h() / lambda;
}

struct StepReport {
  double max_update = 0.0;  // max |dt L_p u| over interior nodes
  double min_det = 0.0;
};

namespace detail {

/// Runs body(begin, end) over [0, count) split into `threads` contiguous chunks.
template <class Body>
void parallel_chunks(int count, int threads, const Body& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    body(0, count);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int b = static_cast<int>(static_cast<long long>(count) * t / threads);
    const int e = static_cast<int>(static_cast<long long>(count) * (t + 1) / threads);
    pool.emplace_back([&, t, b, e] {
      try {
        body(b, e);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Coefficients for a step: either the current grid or a frozen one.
/// Interior nodes advance by dt * A(du_coeff) : d^2 u; boundary nodes are fixed.
/// On DeterminantCollapse or NonFiniteValue the grid is left unchanged.
inline StepReport explicit_step(GridField& g, double p, double dt, double det_floor, int threads = 1,
                                const GridField* coeff = nullptr) {
  const int n = g.dim();
  const int count = g.node_count();
  const GridField& cg = coeff ? *coeff : g;
  std::vector<double> next = g.values();
  detail::parallel_chunks(count, threads, [&](int b, int e) {
    for (int node = b; node < e; ++node) {
      if (g.is_boundary(node)) continue;
      const Tensor4 a = flux_linearization(cg.jet(node).J, p);
      const Vector l = contract_hessian(a, g.jet(node).H);
      for (int k = 0; k < n; ++k) next[node * n + k] += dt * l[k];
    }
  });
  StepReport rep;
  for (int node = 0; node < count; ++node) {
    for (int k = 0; k < n; ++k) {
      const double v = next[node * n + k];
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "non-finite value after step");
      rep.max_update = std::max(rep.max_update, std::abs(v - g.value(node, k)));
    }
  }
  std::vector<double> old = std::move(g.mutable_values());
  g.mutable_values() = std::move(next);
  g.refresh_det_cache();
  rep.min_det = g.min_det();
  if (!(rep.min_det >= det_floor)) {
    g.mutable_values() = std::move(old);
    g.refresh_det_cache();
    throw Error(ErrorCode::DeterminantCollapse,
                "det du fell to " + std::to_string(rep.min_det) + " below the floor");
  }
  return rep;
}

enum class FlowMode { Explicit, Picard };
enum class HaltReason { None, DeterminantCollapse, NonFiniteValue, EnergyIncrease };

inline const char* to_string(HaltReason r) {
  switch (r) {
    case HaltReason::None: return "none";
    case HaltReason::DeterminantCollapse: return "DeterminantCollapse";
    case HaltReason::NonFiniteValue: return "NonFiniteValue";
    case HaltReason::EnergyIncrease: return "EnergyIncrease";
  }
  return "unknown";
}

struct FlowOptions {
  double safety = 0.2;
  DtPolicy policy = DtPolicy::Frobenius;
  FlowMode mode = FlowMode::Explicit;
  int picard_iterations = 3;
  int threads = 1;
  int max_halvings = 5;
};

/// Series indexed by accepted step; entry 0 is the initial state.
struct FlowRunStats {
  std::vector<double> times;
  std::vector<double> energy;
  std::vector<double> minDet;
  std::vector<double> dtHistory;  // dtHistory[k] led from entry k to k+1
  HaltReason haltReason = HaltReason::None;
  double detFloor = 0.0;
  double compatibility = 0.0;
  int halvings = 0;
  int violations = 0;  // energy increases beyond tolerance (rejected in explicit mode)

  std::size_t steps() const { return dtHistory.size(); }
  bool halted() const { return haltReason != HaltReason::None; }

  /// energy[k+1] <= energy[k] + 1e-12 (1 + |energy[0]|) for every accepted step.
  bool energy_monotone() const {
    const double tol = 1e-12 * (1.0 + std::abs(energy.front()));
    for (std::size_t k = 1; k < energy.size(); ++k)
      if (energy[k] > energy[k - 1] + tol) return false;
    return true;
  }
};

namespace detail {

inline void record(FlowRunStats& st, double t, double e, double md) {
  st.times.push_back(t);
  st.energy.push_back(e);
  st.minDet.push_back(md);
}

inline FlowRunStats run_explicit(GridField& g, double p, double horizon, const FlowOptions& opt,
                                 FlowRunStats st) {
  const double tol = 1e-12 * (1.0 + std::abs(st.energy.front()));
  double t = 0.0;
  double scale = 1.0;
  int consecutive = 0;
  while (t < horizon * (1.0 - 1e-12)) {
    const double dt = std::min(scale * dtmax(g, p, opt.safety, opt.policy), horizon - t);
    const std::vector<double> saved = g.values();
    try {
      explicit_step(g, p, dt, st.detFloor, opt.threads);
    } catch (const Error& e) {
      st.haltReason = e.code() == ErrorCode::DeterminantCollapse ? HaltReason::DeterminantCollapse
                                                                 : HaltReason::NonFiniteValue;
      return st;
    }
    const double e = energy(g, p);
    if (!(e <= st.energy.back() + tol)) {
      ++st.violations;
      ++st.halvings;
      g.mutable_values() = saved;
      g.refresh_det_cache();
      scale *= 0.5;
      if (++consecutive >= opt.max_halvings) {
        st.haltReason = HaltReason::EnergyIncrease;
        return st;
      }
      continue;
    }
    consecutive = 0;
    t += dt;
    st.dtHistory.push_back(dt);
    record(st, t, e, g.min_det());
  }
  return st;
}

/// Outer iterations with coefficients A(du^{m-1}(t_k)) frozen from the previous
/// iterate's trajectory; iterate 0 is the constant-in-time initial datum.
inline FlowRunStats run_picard(GridField& g, double p, double horizon, const FlowOptions& opt,
                               FlowRunStats st) {
  const GridField initial = g;
  const double dt0 = dtmax(g, p, opt.safety, opt.policy);
  const int steps = std::max(1, static_cast<int>(std::ceil(horizon / dt0 - 1e-9)));
  const double dt = horizon / steps;
  std::vector<std::vector<double>> previous(steps, initial.values());
  GridField coeff = initial;
  const double tol = 1e-12 * (1.0 + std::abs(st.energy.front()));
  FlowRunStats base = st;
  for (int m = 0; m < opt.picard_iterations; ++m) {
    st = base;
    g = initial;
    std::vector<std::vector<double>> current;
    current.reserve(steps);
    for (int k = 0; k < steps; ++k) {
      current.push_back(g.values());
      coeff.mutable_values() = previous[k];
      try {
        explicit_step(g, p, dt, st.detFloor, opt.threads, &coeff);
      } catch (const Error& e) {
        st.haltReason = e.code() == ErrorCode::DeterminantCollapse ? HaltReason::DeterminantCollapse
                                                                   : HaltReason::NonFiniteValue;
        return st;
      }
      const double e = energy(g, p);
      if (e > st.energy.back() + tol) ++st.violations;
      st.dtHistory.push_back(dt);
      record(st, (k + 1) * dt, e, g.min_det());
    }
    previous = std::move(current);
  }
  return st;
}

}  // namespace detail

/// Runs d_t u = L_p u to time `horizon` with det floor = min initial det / 2.
/// Explicit mode halves dt on each energy increase and halts after
/// `max_halvings` consecutive ones.
inline FlowRunStats run_flow(GridField& g, double p, double horizon, const FlowOptions& opt = {}) {
  if (!(horizon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 0");
  const double md = g.min_det();
  if (!(md > 0.0)) throw Error(ErrorCode::NonPositiveDeterminant, "initial grid has det <= 0");
  FlowRunStats st;
  st.detFloor = 0.5 * md;
  st.compatibility = compatibility_check(g, p);
  detail::record(st, 0.0, energy(g, p), md);
  return opt.mode == FlowMode::Explicit ? detail::run_explicit(g, p, horizon, opt, std::move(st))
                                        : detail::run_picard(g, p, horizon, opt, std::move(st));
}

/// CSV with columns step, t, energy, minDet, dt (dt of the step that reached the row; 0 for row 0).
inline void write_stats_csv(std::ostream& os, const FlowRunStats& st) {
  const auto flags = os.flags();
  os << "step,t,energy,minDet,dt\n" << std::setprecision(17);
  for (std::size_t k = 0; k < st.energy.size(); ++k) {
    os << k << ',' << st.times[k] << ',' << st.energy[k] << ',' << st.minDet[k] << ','
       << (k == 0 ? 0.0 : st.dtHistory[k - 1]) << '\n';
  }
  os.flags(flags);
}

namespace detail {

inline void put_le(std::ostream& os, const void* src, std::size_t bytes) {
  unsigned char buf[8];
  std::memcpy(buf, src, bytes);
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + bytes);
  os.write(reinterpret_cast<const char*>(buf), static_cast<std::streamsize>(bytes));
}

}  // namespace detail

/// Flat binary grid dump: uint32 n, uint32 shape[n], float64 h, then node values
/// in row-major node order, n float64 per node; all little-endian.
inline void write_snapshot(std::ostream& os, const GridField& g) {
  const auto n = static_cast<std::uint32_t>(g.dim());
  detail::put_le(os, &n, 4);
  for (int s : g.shape()) {
    const auto v = static_cast<std::uint32_t>(s);
    detail::put_le(os, &v, 4);
  }
  const double h = g.h();
  detail::put_le(os, &h, 8);
  for (double v : g.values()) detail::put_le(os, &v, 8);
}

}  // namespace qcflow
