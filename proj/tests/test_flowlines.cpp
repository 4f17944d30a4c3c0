#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qcflow/flowlines.hpp"
#include "qcflow/registry.hpp"

using namespace qcflow;

namespace {

/// Five-point derivative of K along the path at sample k, or NaN when the
/// stencil straddles a row switch or a non-uniform step.
double path_dK_ds(const FlowTrajectory& tr, std::size_t k, double ds) {
  if (k < 2 || k + 2 >= tr.samples.size()) return std::nan("");
  for (std::size_t m = k - 2; m <= k + 2; ++m) {
    if (tr.samples[m].row != tr.samples[k].row || tr.samples[m].sign != tr.samples[k].sign) {
      return std::nan("");
    }
    if (m > k - 2 && std::abs(tr.samples[m].s - tr.samples[m - 1].s - ds) > 1e-12) return std::nan("");
  }
  const auto& s = tr.samples;
  return (s[k - 2].K - 8.0 * s[k - 1].K + 8.0 * s[k + 1].K - s[k + 2].K) / (12.0 * ds);
}

}  // namespace

TEST(FlowField, VanishesForConformalMaps) {
  const Vector x{0.3, -0.2, 0.5};
  EXPECT_LT(hs_norm(flow_field(identity_map(3), x)), 1e-15);
  EXPECT_LT(hs_norm(flow_field(moebius_dilation(3, 2.5).map(), x)), 1e-14);
  EXPECT_LT(hs_norm(flow_field(moebius_inversion(3).map(), x)), 1e-13);
}

TEST(FlowField, RadialStretchAtE1) {
  // u = |x| x has du(e1) = diag(2, 1, 1), det 2.
  const SquareMatrix f = flow_field(radial_stretch(2.0, 3), Vector{1.0, 0.0, 0.0});
  const Vector e1{1.0, 0.0, 0.0};
  const SquareMatrix expected = (SquareMatrix::outer(e1, e1) - SquareMatrix::identity(3) * (1.0 / 3.0)) *
                                SquareMatrix::diagonal(Vector{0.5, 1.0, 1.0}) *
                                (3.0 * std::pow(2.0, -2.0 / 3.0));
  EXPECT_LT(oracle::distance(f, expected), 1e-14);
}

TEST(SelectRow, SingleNonzeroRow) {
  SquareMatrix f(3);
  f(1, 0) = 0.3;
  f(1, 2) = -0.4;
  EXPECT_EQ(select_row(f, -1), 1);
  EXPECT_EQ(select_row(f, 0), 1);
}

TEST(SelectRow, HysteresisKeepsCurrentRow) {
  const SquareMatrix f = SquareMatrix::diagonal(Vector{1.0, 0.6, 0.4});
  EXPECT_EQ(select_row(f, -1), 0);
  EXPECT_EQ(select_row(f, 1), 1);
  EXPECT_EQ(select_row(f, 2), 0);
  EXPECT_EQ(select_row(f, 2, 0.3), 2);
}

TEST(SelectRow, SelectedRowDominatesFieldNorm) {
  Rng rng(301);
  for (int n = 2; n <= 4; ++n)
    for (int trial = 0; trial < 200; ++trial) {
      SquareMatrix f(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f(i, j) = rng.normal() * (rng.uniform() < 0.3 ? 1e-3 : 1.0);
      const int current = static_cast<int>(rng.uniform() * n);
      const int r = select_row(f, current);
      double largest = 0.0;
      for (int i = 0; i < n; ++i) largest = std::max(largest, f.row(i).norm());
      EXPECT_GE(f.row(r).norm(), hs_norm(f) / (n * n));
      EXPECT_GE(f.row(r).norm(), kRowSwitchThreshold * largest);
    }
}

TEST(SelectRow, ZeroFieldThrows) {
  try {
    select_row(SquareMatrix(3), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllRowsDegenerate);
  }
}

TEST(TraceFlowline, ConformalMapIsDegenerateAtStart) {
  const FlowTrajectory tr =
      trace_flowline(moebius_dilation(3, 2.0).map(), Vector{0.1, 0.2, 0.3}, 1e-3, 1.0, Domain::everywhere());
  EXPECT_EQ(tr.terminated, Termination::Degenerate);
  ASSERT_EQ(tr.samples.size(), 1u);
  EXPECT_EQ(tr.samples[0].row, -1);
}

TEST(TraceFlowline, RejectsBadArguments) {
  const SmoothMap m = cubic_perturbation(1, 0.1, 3);
  const Domain ball = Domain::ball(Vector(3), 1.0);
  EXPECT_THROW(trace_flowline(m, Vector(3), 0.0, 1.0, ball), Error);
  EXPECT_THROW(trace_flowline(m, Vector(3), 1e-3, -1.0, ball), Error);
  EXPECT_THROW(trace_flowline(m, Vector{2.0, 0.0, 0.0}, 1e-3, 1.0, ball), Error);
}

TEST(TraceFlowline, DilationIsConstantForTeichmullerMaps) {
  for (int n = 2; n <= 3; ++n) {
    const SmoothMap t = teichmuller_map(3, n);
    Rng rng(302);
    for (int k = 0; k < 20; ++k) {
      const Vector x0 = rng.in_ball(n, 0.9);
      const FlowTrajectory tr = trace_flowline(t, x0, 1e-3, 1.0, Domain::ball(Vector(n), 1.0));
      EXPECT_LE(tr.max_K_drift(), 1e-6);
      EXPECT_NE(tr.terminated, Termination::Degenerate);
      EXPECT_GT(tr.samples.front().K, std::sqrt(double(n)) + 1e-3);
    }
  }
}

TEST(TraceFlowline, BoundaryTerminationLandsOnTheBoundary) {
  const SmoothMap t = teichmuller_map(3, 3);
  const FlowTrajectory tr = trace_flowline(t, Vector(3), 1e-2, 10.0, Domain::ball(Vector(3), 1.0));
  ASSERT_EQ(tr.terminated, Termination::Boundary);
  const double r = tr.samples.back().x.norm();
  EXPECT_GE(r, 1.0);
  EXPECT_LT(r - 1.0, 1e-8);
}

TEST(TraceFlowline, StepsAreBoundedBySpeed) {
  const SmoothMap c = cubic_perturbation(5, 0.3, 3);
  const FlowTrajectory tr = trace_flowline(c, Vector{0.1, 0.2, -0.1}, 1e-2, 2.0, Domain::ball(Vector(3), 1.0));
  double vmax = 0.0;
  for (const auto& s : tr.samples) {
    vmax = std::max(vmax, flow_field(c, s.x).row(s.row < 0 ? 0 : s.row).norm());
    for (int i = 0; i < 3; ++i) vmax = std::max(vmax, flow_field(c, s.x).row(i).norm());
  }
  for (std::size_t k = 1; k < tr.samples.size(); ++k) {
    const double step = (tr.samples[k].x - tr.samples[k - 1].x).norm();
    EXPECT_LE(step, vmax * (tr.samples[k].s - tr.samples[k - 1].s) * 1.05);
  }
}

TEST(TraceFlowline, RowSwitchesOnlyBelowThreshold) {
  Rng rng(303);
  int switches = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const SmoothMap c = cubic_perturbation(100 + trial, 0.15, 3);
    const FlowTrajectory tr = trace_flowline(c, rng.in_ball(3, 0.4), 1e-2, 3.0, Domain::ball(Vector(3), 0.6));
    for (std::size_t k = 1; k < tr.samples.size(); ++k) {
      const auto& prev = tr.samples[k - 1];
      const auto& cur = tr.samples[k];
      if (cur.row < 0 || cur.row == prev.row) continue;
      ++switches;
      const SquareMatrix f = flow_field(c, cur.x);
      double largest = 0.0;
      for (int i = 0; i < 3; ++i) largest = std::max(largest, f.row(i).norm());
      EXPECT_LT(f.row(prev.row).norm(), kRowSwitchThreshold * largest);
      // The new orientation keeps the velocity within 90 degrees.
      const Vector before = flow_field(c, prev.x).row(prev.row) * prev.sign;
      EXPECT_GE((f.row(cur.row) * cur.sign).dot(before), 0.0);
    }
  }
  EXPECT_GT(switches, 0);
}

TEST(TraceFlowline, PathwiseDilationDerivative) {
  const SmoothMap c = cubic_perturbation(5, 0.3, 3);
  const double ds = 1e-3;
  const FlowTrajectory tr = trace_flowline(c, Vector{0.1, 0.2, -0.1}, ds, 1.0, Domain::ball(Vector(3), 0.5));
  double scale = 0.0;
  double worst = 0.0;
  int checked = 0;
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    const auto& s = tr.samples[k];
    if (s.row < 0) continue;
    const double predicted = predicted_dK_ds(c.jet(s.x), s.row, s.sign);
    scale = std::max(scale, std::abs(predicted));
    const double fd = path_dK_ds(tr, k, ds);
    if (std::isnan(fd)) continue;
    worst = std::max(worst, std::abs(fd - predicted));
    ++checked;
  }
  EXPECT_GT(checked, 100);
  EXPECT_GT(scale, 1e-3);
  EXPECT_LE(worst / scale, 1e-5);
}

TEST(TraceFlowline, CsvHasDocumentedColumns) {
  const SmoothMap t = teichmuller_map(3, 2);
  const FlowTrajectory tr = trace_flowline(t, Vector(2), 1e-2, 0.05, Domain::ball(Vector(2), 1.0));
  std::ostringstream os;
  write_csv(os, tr, 2);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "s,x1,x2,K,row,speed");
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(tr.samples.size()));
}

TEST(DuRecovery, AffineMapHasNoDrift) {
  const SmoothMap a = affine_map(SquareMatrix{{2.0, 0.3, 0.0}, {0.0, 1.0, 0.1}, {0.0, 0.0, 0.7}}, Vector(3));
  const FlowTrajectory tr = trace_flowline(a, Vector(3), 1e-2, 0.5, Domain::everywhere());
  ASSERT_FALSE(tr.switched_rows());
  const RecoveryResiduals r = du_recovery_check(a, tr, tr.samples[0].row);
  EXPECT_LT(r.remark, 1e-14);
  EXPECT_LT(r.chain, 1e-14);
}

TEST(DuRecovery, ConstantDilationMapMatchesDirectSampling) {
  const SmoothMap t = teichmuller_map(3, 3);
  const FlowTrajectory tr = trace_flowline(t, Vector{0.1, 0.0, 0.0}, 1e-3, 0.3, Domain::everywhere());
  ASSERT_FALSE(tr.switched_rows());
  const int i = tr.samples[0].row;
  const RecoveryResiduals r = du_recovery_check(t, tr, i);
  EXPECT_LT(r.chain, 1e-6);
  // K grad K vanishes, so the stated integral is zero and the residual is the raw drift.
  const SquareMatrix j0 = t.jet(tr.samples.front().x).J;
  const SquareMatrix j1 = t.jet(tr.samples.back().x).J;
  double drift = 0.0;
  for (int j = 0; j < 3; ++j) drift = std::max(drift, std::abs(j1(i, j) - j0(i, j)));
  EXPECT_NEAR(r.remark, drift, 1e-6);
}

TEST(DuRecovery, ChainResidualConvergesQuadratically) {
  const SmoothMap c = cubic_perturbation(5, 0.3, 3);
  const Vector x0{0.1, 0.2, -0.1};
  const FlowTrajectory coarse = trace_flowline(c, x0, 1e-2, 0.2, Domain::everywhere());
  const FlowTrajectory fine = trace_flowline(c, x0, 5e-3, 0.2, Domain::everywhere());
  ASSERT_FALSE(coarse.switched_rows());
  ASSERT_FALSE(fine.switched_rows());
  const double e1 = du_recovery_check(c, coarse, coarse.samples[0].row).chain;
  const double e2 = du_recovery_check(c, fine, fine.samples[0].row).chain;
  EXPECT_NEAR(e1 / e2, 4.0, 0.8);
}

TEST(DuRecovery, RowSwitchIsRejected) {
  FlowTrajectory tr;
  tr.samples.push_back({0.0, Vector(3), 2.0, 0, 1.0, 1.0});
  tr.samples.push_back({0.1, Vector(3), 2.0, 1, 1.0, 1.0});
  try {
    du_recovery_check(cubic_perturbation(5, 0.3, 3), tr, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RowSwitched);
  }
}
