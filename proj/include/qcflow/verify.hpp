#pragma once

// Seeded verification suites. Every case compares one measured number with an
// expected value or bound; reports are deterministic given the seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "qcflow/core.hpp"
#include "qcflow/error.hpp"
#include "qcflow/flowlines.hpp"
#include "qcflow/gradientflow.hpp"
#include "qcflow/operators.hpp"
#include "qcflow/random.hpp"
#include "qcflow/registry.hpp"
#include "qcflow/traces.hpp"

namespace qcflow {

/// How the expected value of a case was obtained.
enum class Basis { ClosedForm, Trivial, Oracle };

inline const char* to_string(Basis b) {
  switch (b) {
    case Basis::ClosedForm: return "closed-form";
    case Basis::Trivial: return "trivial";
    case Basis::Oracle: return "oracle";
  }
  return "unknown";
}

/// near: |measured - expected| <= tolerance; at_most: measured <= expected + tolerance;
/// at_least: measured >= expected - tolerance.
enum class Comparison { Near, AtMost, AtLeast };

inline const char* to_string(Comparison c) {
  switch (c) {
    case Comparison::Near: return "near";
    case Comparison::AtMost: return "at_most";
    case Comparison::AtLeast: return "at_least";
  }
  return "unknown";
}

struct VerificationCase {
  std::string id;
  Basis basis = Basis::Oracle;
  Comparison comparison = Comparison::Near;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerificationReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<VerificationCase> cases;
  double wallSeconds = 0.0;

  std::size_t passed() const {
    return static_cast<std::size_t>(
        std::count_if(cases.begin(), cases.end(), [](const auto& c) { return c.passed; }));
  }
  std::size_t failed() const { return cases.size() - passed(); }
  bool all_passed() const { return failed() == 0; }
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  int threads = 1;
  std::map<std::string, double> tolerance;  // per-case overrides, keyed by case id
};

inline const std::vector<std::string>& verification_suites() {
  static const std::vector<std::string> names = {"core",   "operators", "examples",
                                                 "flowlines", "traces", "flow"};
  return names;
}

/// Max over a trajectory of |five-point dK/ds - predicted dK/ds|, divided by the
/// largest predicted |dK/ds| on the path. Stencils that straddle a row switch or
/// a shortened final step are skipped.
inline double pathwise_dK_ds_error(const SmoothMap& map, const FlowTrajectory& tr, double ds) {
  const auto& s = tr.samples;
  double scale = 0.0;
  double worst = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k].row < 0) continue;
    scale = std::max(scale, std::abs(predicted_dK_ds(map.jet(s[k].x), s[k].row, s[k].sign)));
  }
  for (std::size_t k = 2; k + 2 < s.size(); ++k) {
    bool ok = s[k].row >= 0;
    for (std::size_t m = k - 2; ok && m <= k + 2; ++m) {
      ok = s[m].row == s[k].row && s[m].sign == s[k].sign;
      if (ok && m > k - 2) ok = std::abs(s[m].s - s[m - 1].s - ds) <= 1e-12;
    }
    if (!ok) continue;
    const double fd = (s[k - 2].K - 8.0 * s[k - 1].K + 8.0 * s[k + 1].K - s[k + 2].K) / (12.0 * ds);
    worst = std::max(worst, std::abs(fd - predicted_dK_ds(map.jet(s[k].x), s[k].row, s[k].sign)));
  }
  return scale > 0.0 ? worst / scale : worst;
}

/// J = Q diag(l0, B) R^T with |B|^2 = (n-1) l0^2; `normal` = R e1 is then an
/// eigenvector of J^T J for the eigenvalue |J|^2 / n.
inline SquareMatrix eigen_constructed_jacobian(Rng& rng, int n, Vector& normal) {
  const SquareMatrix q = rng.rotation(n);
  const SquareMatrix r = rng.rotation(n);
  const double l0 = rng.uniform(0.3, 3.0);
  const SquareMatrix b = rng.positive_matrix(n - 1);
  const double scale = std::sqrt((n - 1) * l0 * l0 / b.contract(b));
  SquareMatrix s(n);
  s(0, 0) = l0;
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j) s(i, j) = scale * b(i - 1, j - 1);
  normal = r.col(0);
  return q * s * r.transpose();
}

namespace detail {

class CaseLog {
 public:
  CaseLog(VerificationReport& report, const VerifyOptions& opt) : report_(report), opt_(opt) {}

  void near(const std::string& id, Basis b, double measured, double expected, double tol) {
    add(id, b, Comparison::Near, measured, expected, tol);
  }
  void at_most(const std::string& id, Basis b, double measured, double bound, double tol = 0.0) {
    add(id, b, Comparison::AtMost, measured, bound, tol);
  }
  void at_least(const std::string& id, Basis b, double measured, double bound, double tol = 0.0) {
    add(id, b, Comparison::AtLeast, measured, bound, tol);
  }

 private:
  void add(const std::string& id, Basis b, Comparison c, double measured, double expected, double tol) {
    if (auto it = opt_.tolerance.find(id); it != opt_.tolerance.end()) tol = it->second;
    VerificationCase vc{id, b, c, measured, expected, tol, false};
    switch (c) {
      case Comparison::Near: vc.passed = std::abs(measured - expected) <= tol; break;
      case Comparison::AtMost: vc.passed = measured <= expected + tol; break;
      case Comparison::AtLeast: vc.passed = measured >= expected - tol; break;
    }
    report_.cases.push_back(vc);
  }

  VerificationReport& report_;
  const VerifyOptions& opt_;
};

inline double rel_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double distance(const SquareMatrix& a, const SquareMatrix& b) { return hs_norm(a - b); }

/// Random points with a positive Jacobian for a cubic perturbation.
inline Jet2Sample positive_jet(Rng& rng, std::uint64_t seed, int n) {
  for (std::uint64_t k = 0;; ++k) {
    const SmoothMap u = cubic_perturbation(seed + 7919 * k, 0.3, n);
    const Jet2Sample s = u.jet(rng.in_ball(n, 0.5));
    if (determinant(s.J) > 0.0) return s;
  }
}

inline void suite_core(CaseLog& log, Rng& rng) {
  log.near("K.identity2", Basis::Trivial, trace_dilation(SquareMatrix::identity(2)), std::sqrt(2.0), 1e-15);
  log.near("K.diag2_half", Basis::Trivial, trace_dilation(SquareMatrix::diagonal(Vector{2.0, 0.5})),
           std::sqrt(17.0) / 2.0, 1e-14);
  {
    const double k = trace_dilation(SquareMatrix::diagonal(Vector{2.0, 1.0, 1.0}));
    log.near("K2.radial_alpha2_e1", Basis::ClosedForm, k * k, RadialClosedForms{2.0, 3}.K2(), 1e-13);
  }
  log.at_most("ahlfors.identity", Basis::Trivial, hs_norm(ahlfors(SquareMatrix::identity(3))), 1e-15);
  log.at_most("ahlfors.antisymmetric", Basis::Trivial,
              hs_norm(ahlfors(SquareMatrix{{0.0, 2.0}, {-2.0, 0.0}})), 1e-15);
  log.at_most("g.rotation", Basis::Trivial,
              distance(distortion_tensor(rng.rotation(3) * 2.0), SquareMatrix::identity(3)), 1e-13);

  double cof = 0.0;
  double detg = 0.0;
  double trace_s = 0.0;
  double kmin = 1e300;
  double factoring = 0.0;
  int inconsistent = 0;
  for (int n = 2; n <= 4; ++n)
    for (int trial = 0; trial < 100; ++trial) {
      const SquareMatrix j = rng.positive_matrix(n);
      const double d = determinant(j);
      cof = std::max(cof, distance(cofactor(j).transpose() * j, SquareMatrix::identity(n) * d) /
                              (1.0 + std::pow(hs_norm(j), n)));
      const DilationReport r = analyze(j);
      detg = std::max(detg, std::abs(determinant(r.g) - 1.0));
      trace_s = std::max(trace_s, std::abs(r.Sg.trace()) / (r.K * r.K));
      kmin = std::min(kmin, r.K / std::sqrt(double(n)));
      factoring = std::max(factoring, factoring_residual(j) / (1.0 + hs_norm(inverse(j))));
      const SquareMatrix q = rng.rotation(n) * rng.uniform(0.2, 5.0);
      const DilationReport rq = analyze(q);
      if (!rq.conformal || !rq.criteria.consistent()) ++inconsistent;
      if (std::sqrt(r.SgNormSq) > 1e-3 && (r.conformal || !r.criteria.consistent())) ++inconsistent;
    }
  log.at_most("cofactor.identity_random", Basis::Oracle, cof, 1e-12);
  log.at_most("g.unit_determinant", Basis::Oracle, detg, 1e-10);
  log.at_most("ahlfors.traceless", Basis::Oracle, trace_s, 1e-12);
  log.at_least("K.lower_bound_ratio", Basis::Oracle, kmin, 1.0, 1e-15);
  log.at_most("K.factoring_residual", Basis::Oracle, factoring, 1e-10);
  log.at_most("conformality.criteria_disagreements", Basis::Oracle, inconsistent, 0.0);
}

inline void suite_operators(CaseLog& log, Rng& rng, std::uint64_t seed) {
  // Flux linearization against central differences of the flux.
  double lin = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 3;
    const double p = 1.0 + trial % 4;
    const SquareMatrix q = rng.positive_matrix(n);
    const Tensor4 a = flux_linearization(q, p);
    const double h = 1e-5;
    double scale = 0.0;
    double err = 0.0;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        SquareMatrix qp = q;
        SquareMatrix qm = q;
        qp(k, l) += h;
        qm(k, l) -= h;
        const SquareMatrix d = (flux(qp, p) - flux(qm, p)) * (1.0 / (2.0 * h));
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            err = std::max(err, std::abs(a(i, j, k, l) - d(i, j)));
            scale = std::max(scale, std::abs(d(i, j)));
          }
      }
    lin = std::max(lin, err / scale);
  }
  log.at_most("linearization.fd_relative", Basis::Oracle, lin, 1e-6);

  const std::pair<int, double> regimes[] = {{2, 2.0}, {2, 5.0}, {3, 1.0}, {3, 2.0}, {3, 5.0}};
  for (const auto& [n, p] : regimes) {
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      if (!lh_witness(rng.positive_matrix(n), rng.normal_vector(n), rng.normal_vector(n), p).holds()) {
        ++violations;
      }
    }
    log.at_most("legendre_hadamard.violations.n" + std::to_string(n) + "_p" + std::to_string(int(p)),
                Basis::Oracle, violations, 0.0);
  }

  double forms = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Jet2Sample s = positive_jet(rng, seed + 1000 + trial, 2 + trial % 3);
    const Vector a = linfty_factored(s);
    forms = std::max(forms, (a - linfty_flowform(s)).norm() / std::max(a.norm(), 1e-300));
  }
  log.at_most("linfty.factored_vs_flowform", Basis::Oracle, forms, 1e-8);

  {
    const SmoothMap u = cubic_perturbation(seed + 11, 0.2, 3);
    const auto jac = [&](const Vector& y) { return u.jet(y).J; };
    Vector x = rng.in_ball(3, 0.3);
    while (determinant(u.jet(x).J) <= 0.0) x = rng.in_ball(3, 0.3);
    const Vector ref = lp_nondiv(u.jet(x), 2.0);
    const double e1 = (lp_divergence(jac, x, 2.0, 2e-2) - ref).norm();
    const double e2 = (lp_divergence(jac, x, 2.0, 1e-2) - ref).norm();
    log.near("lp.divergence_convergence_ratio", Basis::Oracle, e1 / e2, 4.0, 0.8);
  }

  {
    const Jet2Sample s = positive_jet(rng, seed + 2000, 3);
    const Vector limit = linfty_factored(s) * kAsymptoticSign;
    const double d10 = (lp_asymptotic_ratio(s, 10.0) - limit).norm();
    const double d100 = (lp_asymptotic_ratio(s, 100.0) - limit).norm();
    const double d1000 = (lp_asymptotic_ratio(s, 1000.0) - limit).norm();
    log.near("lp.asymptotic_rate_10_100", Basis::Oracle, d10 / d100, 10.0, 3.0);
    log.near("lp.asymptotic_rate_100_1000", Basis::Oracle, d100 / d1000, 10.0, 3.0);
    log.at_most("lp.asymptotic_p1000_relative", Basis::Oracle, d1000 / limit.norm(), 1e-2);
  }

  {
    const SmoothMap a = affine_map(rng.positive_matrix(3), rng.normal_vector(3));
    log.at_most("lp.affine", Basis::Trivial, lp_nondiv(a.jet(rng.in_ball(3, 1.0)), 2.0).norm(), 1e-14);
  }

  const SquareMatrix b = b_tensor(SquareMatrix::diagonal(Vector{2.0, 0.5}), 1.0);
  log.near("b_tensor.e1", Basis::Oracle, b_quadratic_form(b, Vector{1.0, 0.0}), -15.0 / 4.0, 1e-13);
  log.near("b_tensor.e2", Basis::Oracle, b_quadratic_form(b, Vector{0.0, 1.0}), 15.0 / 4.0, 1e-13);
}

inline void suite_examples(CaseLog& log, Rng& rng) {
  constexpr double pi = std::numbers::pi;
  for (double alpha : {0.5, 2.0, 3.0}) {
    const RadialClosedForms cf{alpha, 3};
    const SmoothMap u = radial_stretch(alpha, 3);
    double k2 = 0.0;
    double sg = 0.0;
    double linf = 0.0;
    double lp = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Vector x = rng.in_shell(3, 0.5, 2.0);
      const Jet2Sample s = u.jet(x);
      const DilationReport r = analyze(s.J);
      k2 = std::max(k2, rel_gap(r.K * r.K, cf.K2()));
      sg = std::max(sg, distance(r.Sg, cf.Sg(x)));
      linf = std::max(linf, linfty_factored(s).norm());
      const Vector expected = cf.Lp(x, 2.0);
      lp = std::max(lp, (lp_nondiv(s, 2.0) - expected).norm() / expected.norm());
    }
    const std::string tag = "radial.alpha" + std::to_string(alpha).substr(0, 3);
    log.at_most(tag + ".K2_relative", Basis::ClosedForm, k2, 1e-12);
    log.at_most(tag + ".Sg", Basis::ClosedForm, sg, 1e-12);
    log.at_most(tag + ".linfty", Basis::ClosedForm, linf, 1e-8);
    log.at_most(tag + ".lp2_relative", Basis::Oracle, lp, 1e-8);
  }

  const double alpha = pi / 2.0;
  const SmoothMap w = wedge_map(alpha, 3);
  const WedgeClosedForms wc{alpha, 3};
  double det1 = 0.0, norm1 = 0.0, det2 = 0.0, norm2 = 0.0, linf = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double theta = rng.uniform(0.01, 2.0 * pi - 0.01);
    if (std::abs(theta - alpha) < 0.01) continue;
    const double r = rng.uniform(0.2, 2.0);
    const Vector x{r * std::cos(theta), r * std::sin(theta), rng.uniform(-1.0, 1.0)};
    const Jet2Sample s = w.jet(x);
    const double dd = std::abs(determinant(s.J) - wc.det(x));
    const double nn = std::abs(s.J.contract(s.J) - wc.norm_sq(x));
    if (wc.first_sector(x)) {
      det1 = std::max(det1, dd);
      norm1 = std::max(norm1, nn);
    } else {
      det2 = std::max(det2, dd);
      norm2 = std::max(norm2, nn);
    }
    linf = std::max(linf, linfty_factored(s).norm());
  }
  log.at_most("wedge.first_sector.det", Basis::ClosedForm, det1, 1e-12);
  log.at_most("wedge.first_sector.norm_sq", Basis::ClosedForm, norm1, 1e-12);
  log.at_most("wedge.second_sector.det", Basis::Oracle, det2, 1e-12);
  log.at_most("wedge.second_sector.norm_sq", Basis::Oracle, norm2, 1e-12);
  log.at_most("wedge.linfty", Basis::ClosedForm, linf, 1e-8);
  log.near("wedge.det_at_pi_over_4", Basis::ClosedForm,
           determinant(w.jet(Vector{std::cos(pi / 4), std::sin(pi / 4), 0.0}).J), 2.0, 1e-12);

  {
    const DilationReport r = analyze(moebius_inversion(3).map().jet(Vector{1.0, 0.0, 0.0}).J);
    log.near("inversion.K_at_e1", Basis::Trivial, r.K, std::sqrt(3.0), 1e-14);
  }
  {
    const SmoothMap a = affine_map(SquareMatrix::diagonal(Vector{2.0, 1.0, 0.5}), Vector(3));
    log.at_most("affine.linfty", Basis::Trivial, linfty_factored(a.jet(rng.normal_vector(3))).norm(), 1e-14);
  }
}

inline void suite_flowlines(CaseLog& log, Rng& rng, std::uint64_t seed) {
  for (int n : {2, 3}) {
    const SmoothMap t = teichmuller_map(seed, n);
    double drift = 0.0;
    int degenerate = 0;
    for (int k = 0; k < 20; ++k) {
      const FlowTrajectory tr = trace_flowline(t, rng.in_ball(n, 0.9), 1e-3, 1.0, Domain::ball(Vector(n), 1.0));
      drift = std::max(drift, tr.max_K_drift());
      if (tr.terminated == Termination::Degenerate) ++degenerate;
    }
    log.at_most("teichmuller.n" + std::to_string(n) + ".K_drift", Basis::Oracle, drift, 1e-6);
    log.at_most("teichmuller.n" + std::to_string(n) + ".degenerate_terminations", Basis::Oracle, degenerate, 0.0);
  }

  {
    const FlowTrajectory tr = trace_flowline(moebius_dilation(3, 2.0).map(), rng.in_ball(3, 0.5), 1e-3,
                                             1.0, Domain::everywhere());
    log.near("conformal.degenerate_at_start", Basis::Trivial,
             tr.terminated == Termination::Degenerate && tr.samples.size() == 1 ? 1.0 : 0.0, 1.0, 0.0);
  }

  {
    const SmoothMap c = cubic_perturbation(5, 0.3, 3);
    const double ds = 1e-3;
    const FlowTrajectory tr = trace_flowline(c, Vector{0.1, 0.2, -0.1}, ds, 1.0, Domain::ball(Vector(3), 0.5));
    log.at_most("pathwise.dK_ds_normalized", Basis::Oracle, pathwise_dK_ds_error(c, tr, ds), 1e-5);
  }

  {
    const SmoothMap a = affine_map(SquareMatrix{{2.0, 0.3, 0.0}, {0.0, 1.0, 0.1}, {0.0, 0.0, 0.7}}, Vector(3));
    const FlowTrajectory tr = trace_flowline(a, Vector(3), 1e-2, 0.5, Domain::everywhere());
    const RecoveryResiduals r = du_recovery_check(a, tr, tr.samples[0].row);
    log.at_most("recovery.affine", Basis::Trivial, std::max(r.remark, r.chain), 1e-14);
  }
  {
    const SmoothMap c = cubic_perturbation(5, 0.3, 3);
    const Vector x0{0.1, 0.2, -0.1};
    const FlowTrajectory coarse = trace_flowline(c, x0, 1e-2, 0.2, Domain::everywhere());
    const FlowTrajectory fine = trace_flowline(c, x0, 5e-3, 0.2, Domain::everywhere());
    const double e1 = du_recovery_check(c, coarse, coarse.samples[0].row).chain;
    const double e2 = du_recovery_check(c, fine, fine.samples[0].row).chain;
    log.near("recovery.chain_convergence_ratio", Basis::Oracle, e1 / e2, 4.0, 0.8);
  }
}

inline void suite_traces(CaseLog& log, Rng& rng) {
  double slack = 1e300;
  double block = 0.0;
  double ortho = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const SquareMatrix j = rng.positive_matrix(3);
    const Vector c = rng.normal_vector(3);
    const double r = rng.uniform(0.5, 2.0);
    const Vector x = c + rng.unit_vector(3) * r;
    const AdaptedFrame f = adapted_frame(affine_map(j, Vector(3)), Hypersurface::sphere(c, r), x);
    const TraceInequality t = trace_inequality_check(f);
    slack = std::min(slack, t.slack);
    block = std::max({block, t.norm_identity_residual, t.det_identity_residual});
    ortho = std::max(ortho, f.orthonormality_error());
  }
  log.at_least("inequality.min_slack", Basis::Oracle, slack, 0.0, 1e-10);
  log.at_most("block_identities.relative", Basis::Oracle, block, 1e-10);
  log.at_most("frames.orthonormality", Basis::Oracle, ortho, 1e-12);

  {
    const double kt = tangential_dilation(identity_map(3), Hypersurface::sphere(Vector(3), 1.0),
                                          rng.unit_vector(3));
    log.near("tangential.identity", Basis::Trivial, kt, std::sqrt(2.0), 1e-14);
  }
  {
    const double kt = tangential_dilation(radial_stretch(2.0, 3), Hypersurface::sphere(Vector(3), 1.0),
                                          rng.unit_vector(3));
    log.near("tangential.radial_unit_sphere", Basis::ClosedForm, kt * kt, 2.0, 1e-12);
  }
  {
    const CriticalEquality c = critical_equality_check(
        SquareMatrix::diagonal(Vector{std::sqrt(2.0), 1.0, std::sqrt(3.0)}), Vector{1.0, 0.0, 0.0});
    log.near("critical.diag_lhs", Basis::Oracle, c.lhs, 4.0 / std::sqrt(3.0), 1e-12);
    log.near("critical.diag_rhs", Basis::Oracle, c.rhs, 4.0 / std::sqrt(3.0), 1e-12);
  }
  double crit = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Vector nu;
    const SquareMatrix j = eigen_constructed_jacobian(rng, 3, nu);
    const CriticalEquality c = critical_equality_check(j, nu);
    crit = std::max(crit, rel_gap(c.rhs, c.lhs));
  }
  log.at_most("critical.eigen_constructed_relative", Basis::Oracle, crit, 1e-9);
}

inline void suite_flow(CaseLog& log, int threads) {
  FlowOptions opt;
  opt.threads = threads;
  {
    GridField g = GridField::sample(affine_map(SquareMatrix::diagonal(Vector{2.0, 0.5}), Vector(2)), {17, 17},
                                    1.0 / 16, Vector(2));
    const FlowRunStats st = run_flow(g, 1.0, 0.005, opt);
    double spread = 0.0;
    for (double e : st.energy) spread = std::max(spread, std::abs(e - 17.0 / 4.0));
    log.at_most("affine.energy_constant", Basis::Trivial, spread, 1e-12);
  }
  GridField g = GridField::sample(bump_map(0.05, 2), {17, 17}, 1.0 / 16, Vector(2));
  const FlowRunStats st = run_flow(g, 2.0, 0.01, opt);
  log.near("bump.halted", Basis::Oracle, st.halted() ? 1.0 : 0.0, 0.0, 0.0);
  log.at_most("bump.energy_violations", Basis::Oracle, st.violations, 0.0);
  double worst_increase = -1e300;
  for (std::size_t k = 1; k < st.energy.size(); ++k)
    worst_increase = std::max(worst_increase, st.energy[k] - st.energy[k - 1]);
  log.at_most("bump.max_energy_increase", Basis::Oracle, worst_increase, 0.0,
              1e-12 * (1.0 + std::abs(st.energy.front())));
  log.at_least("bump.min_det_over_floor", Basis::Oracle,
               *std::min_element(st.minDet.begin(), st.minDet.end()) / st.detFloor, 1.0);
  log.at_least("bump.final_energy_above_affine", Basis::Oracle, st.energy.back(), 4.0);
  log.at_most("bump.final_energy_below_initial", Basis::Oracle, st.energy.back(), st.energy.front());
}

}  // namespace detail

/// Runs one named suite. Throws UnknownSuite for names outside verification_suites().
inline VerificationReport run_verification(const std::string& suite, const VerifyOptions& opt = {}) {
  const auto& names = verification_suites();
  const auto it = std::find(names.begin(), names.end(), suite);
  if (it == names.end()) throw Error(ErrorCode::UnknownSuite, "unknown suite '" + suite + "'");

  VerificationReport report;
  report.suite = suite;
  report.seed = opt.seed;
  detail::CaseLog log(report, opt);
  Rng rng(opt.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(it - names.begin()));
  const auto start = std::chrono::steady_clock::now();
  if (suite == "core") detail::suite_core(log, rng);
  if (suite == "operators") detail::suite_operators(log, rng, opt.seed);
  if (suite == "examples") detail::suite_examples(log, rng);
  if (suite == "flowlines") detail::suite_flowlines(log, rng, opt.seed);
  if (suite == "traces") detail::suite_traces(log, rng);
  if (suite == "flow") detail::suite_flow(log, opt.threads);
  report.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace qcflow
