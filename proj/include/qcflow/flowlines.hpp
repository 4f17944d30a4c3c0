#pragma once

// Integral curves of the rows of S(g) du^{-T}.

#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <vector>

#include "qcflow/error.hpp"
#include "qcflow/maps.hpp"
#include "qcflow/operators.hpp"

namespace qcflow {

/// Bounded region given by a signed function: negative inside, zero on the boundary.
struct Domain {
  std::function<double(const Vector&)> level;

  static Domain ball(const Vector& center, double radius) {
    return {[center, radius](const Vector& x) {
      const Vector d = x - center;
      return d.dot(d) - radius * radius;
    }};
  }
  static Domain everywhere() {
    return {[](const Vector&) { return -1.0; }};
  }
  bool inside(const Vector& x) const { return level(x) < 0.0; }
};

struct FlowSample {
  double s = 0.0;  // ODE parameter (not normalized arc length)
  Vector x;
  double K = 0.0;
  int row = -1;  // 0-based active row, -1 when the field vanished
  double speed = 0.0;
  double sign = 1.0;  // orientation of the active row
};

enum class Termination { Boundary, MaxLength, Degenerate };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Boundary: return "boundary";
    case Termination::MaxLength: return "maxLength";
    case Termination::Degenerate: return "degenerate";
  }
  return "unknown";
}

struct FlowTrajectory {
  std::vector<FlowSample> samples;
  Termination terminated = Termination::MaxLength;

  double max_K_drift() const {
    double d = 0.0;
    for (const auto& s : samples) d = std::max(d, std::abs(s.K - samples.front().K));
    return d;
  }
  bool switched_rows() const {
    for (const auto& s : samples)
      if (s.row != samples.front().row) return true;
    return false;
  }
};

/// Hysteresis used by trace_flowline when reselecting rows.
inline constexpr double kRowSwitchThreshold = 0.5;

inline double row_norm(const SquareMatrix& f, int i) { return f.row(i).norm(); }

/// Field whose rows are the flow directions at x.
inline SquareMatrix flow_field(const SmoothMap& map, const Vector& x) {
  return flow_matrix(map.jet(x).J);
}

inline bool field_degenerate(const SquareMatrix& field, double K) {
  return hs_norm(field) <= 1e-12 * (1.0 + K * K);
}

/// Keeps `current` while its norm is at least threshold * (largest row norm);
/// otherwise returns the largest row. `current` < 0 means no active row.
inline int select_row(const SquareMatrix& field, int current, double threshold = kRowSwitchThreshold,
                      double K = 0.0) {
  if (field_degenerate(field, K)) {
    throw Error(ErrorCode::AllRowsDegenerate, "flow field vanishes (near-conformal point)");
  }
  const int n = field.size();
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (row_norm(field, i) > row_norm(field, best)) best = i;
  if (current >= 0 && current < n && row_norm(field, current) >= threshold * row_norm(field, best)) {
    return current;
  }
  return best;
}

namespace detail {

struct FlowState {
  SquareMatrix field;
  double K;
};

inline FlowState flow_state(const SmoothMap& map, const Vector& x) {
  if (auto e = map.guard(x)) throw Error(ErrorCode::StepFailure, "RK4 stage left the map's domain");
  const Jet2Sample s = map.jet(x);
  return {flow_matrix(s.J), trace_dilation(s.J)};
}

inline Vector rk4(const SmoothMap& map, const Vector& x, int row, double sign, double h) {
  auto vel = [&](const Vector& y) { return detail::flow_state(map, y).field.row(row) * sign; };
  const Vector k1 = vel(x);
  const Vector k2 = vel(x + k1 * (0.5 * h));
  const Vector k3 = vel(x + k2 * (0.5 * h));
  const Vector k4 = vel(x + k3 * h);
  return x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
}

}  // namespace detail

/// Fixed-step RK4 along sign * row_i(S(g) du^{-T}); rows are reselected after
/// every accepted step and a new row is oriented to keep the velocity within
/// 90 degrees of the previous one.
inline FlowTrajectory trace_flowline(const SmoothMap& map, const Vector& x0, double ds,
                                     double max_len, const Domain& domain) {
  if (!(ds > 0.0) || !(max_len >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "trace_flowline: ds > 0 and maxLen >= 0 required");
  }
  if (!domain.inside(x0)) throw Error(ErrorCode::InvalidArgument, "x0 is not interior to the domain");

  FlowTrajectory traj;
  double s = 0.0;
  Vector x = x0;
  detail::FlowState st = detail::flow_state(map, x);
  if (field_degenerate(st.field, st.K)) {
    traj.samples.push_back({0.0, x, st.K, -1, 0.0, 1.0});
    traj.terminated = Termination::Degenerate;
    return traj;
  }
  int row = select_row(st.field, -1, kRowSwitchThreshold, st.K);
  double sign = 1.0;
  traj.samples.push_back({0.0, x, st.K, row, row_norm(st.field, row), sign});

  while (s < max_len * (1.0 - 1e-14)) {
    const double h = std::min(ds, max_len - s);
    const Vector prev_vel = st.field.row(row) * sign;
    Vector next = detail::rk4(map, x, row, sign, h);
    double taken = h;
    bool hit = false;
    if (!domain.inside(next)) {
      // Bisect on the step length for the crossing of the zero level.
      double lo = 0.0;
      double hi = h;
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (domain.inside(detail::rk4(map, x, row, sign, mid))) lo = mid; else hi = mid;
      }
      taken = hi;
      next = detail::rk4(map, x, row, sign, hi);
      hit = true;
    }
    s += taken;
    x = next;
    st = detail::flow_state(map, x);
    if (hit) {
      traj.samples.push_back({s, x, st.K, row, row_norm(st.field, row), sign});
      traj.terminated = Termination::Boundary;
      return traj;
    }
    if (field_degenerate(st.field, st.K)) {
      traj.samples.push_back({s, x, st.K, -1, 0.0, sign});
      traj.terminated = Termination::Degenerate;
      return traj;
    }
    const int next_row = select_row(st.field, row, kRowSwitchThreshold, st.K);
    if (next_row != row) {
      row = next_row;
      sign = st.field.row(row).dot(prev_vel) >= 0.0 ? 1.0 : -1.0;
    }
    traj.samples.push_back({s, x, st.K, row, row_norm(st.field, row), sign});
  }
  traj.terminated = Termination::MaxLength;
  return traj;
}

/// dK/ds along sign * row predicted by the flow-form identity:
/// sign * K^3 / (n^2 |du|^4) * (L_inf u)^row.
inline double predicted_dK_ds(const Jet2Sample& s, int row, double sign) {
  const int n = s.dim();
  const double k = trace_dilation(s.J);
  const double norm_sq = s.J.contract(s.J);
  return sign * k * k * k / (n * n * norm_sq * norm_sq) * linfty_factored(s)[row];
}

struct RecoveryResiduals {
  /// max_j |du_ij(end) - du_ij(start) - int K d_j K ds|, the identity as stated.
  double remark = 0.0;
  /// max_j |du_ij(end) - du_ij(start) - int sign (S du^{-T})_ik u^i_jk ds|, the chain rule.
  double chain = 0.0;
};

/// Trapezoidal check of the differential-recovery identity along a single-row
/// trajectory of row i = row_index.
inline RecoveryResiduals du_recovery_check(const SmoothMap& map, const FlowTrajectory& traj,
                                           int row_index) {
  if (traj.samples.size() < 2) throw Error(ErrorCode::InvalidArgument, "trajectory too short");
  for (const auto& smp : traj.samples) {
    if (smp.row != row_index) throw Error(ErrorCode::RowSwitched, "trajectory changed rows");
  }
  const int n = map.dim();
  const int i = row_index;
  std::vector<double> remark_int(n, 0.0), chain_int(n, 0.0);
  auto integrands = [&](const FlowSample& smp, std::vector<double>& rem, std::vector<double>& chn) {
    const Jet2Sample jet = map.jet(smp.x);
    const double k = trace_dilation(jet.J);
    const Vector grad_k = dilation_gradient(jet);
    const SquareMatrix f = flow_matrix(jet.J);
    for (int j = 0; j < n; ++j) {
      rem[j] = k * grad_k[j];
      double c = 0.0;
      for (int m = 0; m < n; ++m) c += f(i, m) * jet.H(i, j, m);
      chn[j] = smp.sign * c;
    }
    return jet.J;
  };
  std::vector<double> r0(n), c0(n), r1(n), c1(n);
  const SquareMatrix j_start = integrands(traj.samples.front(), r0, c0);
  SquareMatrix j_end = j_start;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    j_end = integrands(traj.samples[k], r1, c1);
    const double w = 0.5 * (traj.samples[k].s - traj.samples[k - 1].s);
    for (int j = 0; j < n; ++j) {
      remark_int[j] += w * (r0[j] + r1[j]);
      chain_int[j] += w * (c0[j] + c1[j]);
    }
    r0.swap(r1);
    c0.swap(c1);
  }
  RecoveryResiduals res;
  for (int j = 0; j < n; ++j) {
    const double drift = j_end(i, j) - j_start(i, j);
    res.remark = std::max(res.remark, std::abs(drift - remark_int[j]));
    res.chain = std::max(res.chain, std::abs(drift - chain_int[j]));
  }
  return res;
}

/// CSV with columns s, x1..xn, K, row (1-based, 0 when degenerate), speed.
inline void write_csv(std::ostream& os, const FlowTrajectory& traj, int n) {
  os << "s";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  os << ",K,row,speed\n";
  const auto flags = os.flags();
  os << std::setprecision(17);
  for (const auto& smp : traj.samples) {
    os << smp.s;
    for (int i = 0; i < n; ++i) os << ',' << smp.x[i];
    os << ',' << smp.K << ',' << (smp.row + 1) << ',' << smp.speed << '\n';
  }
  os.flags(flags);
}

}  // namespace qcflow
