#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qcflow/operators.hpp"
#include "qcflow/random.hpp"
#include "qcflow/registry.hpp"

using namespace qcflow;

namespace {

/// Max-entry error of the closed-form linearization against central
/// differences of the flux with step h.
double linearization_fd_error(const SquareMatrix& q, double p, double h) {
  const int n = q.size();
  const Tensor4 a = flux_linearization(q, p);
  double err = 0.0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      const SquareMatrix d =
          oracle::fd_matrix_derivative([p](const SquareMatrix& m) { return flux(m, p); }, q, k, l, h);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) err = std::max(err, std::abs(a(i, j, k, l) - d(i, j)));
    }
  return err;
}

double vec_distance(const Vector& a, const Vector& b) { return (a - b).norm(); }

}  // namespace

TEST(Flux, VanishesOnConformalMatrices) {
  Rng rng(301);
  for (int n = 2; n <= 4; ++n) {
    EXPECT_LT(hs_norm(flux(SquareMatrix::identity(n), 2.0)), 1e-14);
    const SquareMatrix q = rng.rotation(n) * rng.uniform(0.5, 2.0);
    // Weight |q|^{np}/det^p = n^{np/2}; the bracket cancels to round-off.
    const double scale = 3.0 * std::pow(n, n * 3.0 / 2.0) * hs_norm(inverse(q));
    EXPECT_LT(hs_norm(flux(q, 3.0)), 1e-14 * scale);
  }
}

TEST(Flux, ContractionWithArgumentVanishes) {
  Rng rng(302);
  for (int n = 2; n <= 4; ++n)
    for (int trial = 0; trial < 200; ++trial) {
      const SquareMatrix q = rng.positive_matrix(n);
      const SquareMatrix a = flux(q, 2.0);
      EXPECT_LE(std::abs(a.contract(q)), 1e-9 * hs_norm(a) * hs_norm(q));
    }
}

TEST(Flux, RejectsNonPositiveDeterminant) {
  EXPECT_THROW(flux(SquareMatrix::diagonal(Vector{1.0, -1.0}), 2.0), Error);
  EXPECT_THROW(flux_linearization(SquareMatrix(2), 2.0), Error);
}

TEST(FluxLinearization, MatchesFiniteDifferencesAtExamples) {
  EXPECT_LE(linearization_fd_error(SquareMatrix::identity(2), 2.0, 1e-5), 1e-6);
  EXPECT_LE(linearization_fd_error(SquareMatrix::diagonal(Vector{2.0, 1.0}), 2.0, 1e-5), 1e-6);
}

TEST(FluxLinearization, MatchesFiniteDifferencesOnRandomMatrices) {
  Rng rng(303);
  for (int n = 2; n <= 4; ++n)
    for (double p : {1.0, 2.0, 3.5}) {
      const SquareMatrix q = rng.positive_matrix(n, 8.0);
      const double h = 1e-5 * (1.0 + hs_norm(q));
      const double scale = flux_linearization(q, p).frobenius();
      EXPECT_LE(linearization_fd_error(q, p, h), 1e-6 * (1.0 + scale)) << "n=" << n << " p=" << p;
    }
}

TEST(FluxLinearization, FiniteDifferenceErrorIsSecondOrder) {
  Rng rng(304);
  const SquareMatrix q = rng.positive_matrix(3, 5.0);
  const double e1 = linearization_fd_error(q, 2.0, 2e-3);
  const double e2 = linearization_fd_error(q, 2.0, 1e-3);
  EXPECT_NEAR(e1 / e2, 4.0, 0.8);
}

TEST(LegendreHadamard, Constants) {
  EXPECT_DOUBLE_EQ(lh_lower_constant(2, 2.0), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(lh_lower_constant(3, 1.0), 1.5);
  EXPECT_DOUBLE_EQ(lh_lower_constant(3, 5.0), 3.0);
  EXPECT_DOUBLE_EQ(lh_lower_constant(4, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(lh_upper_constant(3), 2700.0);
  try {
    lh_lower_constant(2, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedRegime);
  }
  EXPECT_THROW(lh_witness(SquareMatrix::identity(2), Vector{1.0, 0.0}, Vector{1.0, 0.0}, 1.0), Error);
}

TEST(LegendreHadamard, Examples) {
  Rng rng(305);
  const EllipticityWitness w1 =
      lh_witness(SquareMatrix::identity(3), rng.unit_vector(3), rng.unit_vector(3), 1.0);
  EXPECT_TRUE(w1.holds());
  const EllipticityWitness w2 =
      lh_witness(SquareMatrix::identity(2), Vector{1.0, 0.0}, Vector{1.0, 0.0}, 2.0);
  EXPECT_TRUE(w2.holds());
  EXPECT_NEAR(w2.lower, (2.0 / 3.0) * 2.0 * std::pow(std::sqrt(2.0), 2.0), 1e-13);
}

TEST(LegendreHadamard, SandwichOnRandomInputs) {
  Rng rng(306);
  const std::pair<int, double> regimes[] = {{2, 2.0}, {2, 5.0}, {3, 1.0}, {3, 2.0}, {3, 5.0}, {4, 2.0}};
  for (const auto& [n, p] : regimes) {
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const EllipticityWitness w =
          lh_witness(rng.positive_matrix(n), rng.normal_vector(n), rng.normal_vector(n), p);
      if (!w.holds()) ++violations;
    }
    EXPECT_EQ(violations, 0) << "n=" << n << " p=" << p;
  }
}

TEST(LegendreHadamard, LargerThreeDimensionalConstantIsNotALowerBound) {
  // With C1 = (6p-3)/(p+1) = 4.5 at n = 3, p = 5 the identity already violates
  // the lower bound (ratio 3); the library uses min(n, (6p-3)/(p+1)).
  const Tensor4 a = flux_linearization(SquareMatrix::identity(3), 5.0);
  const double weight = 5.0 * std::pow(std::sqrt(3.0), 3 * 5.0 - 2.0);
  const double ratio = lh_quadratic_form(a, Vector{1.0, 0.0, 0.0}, Vector{0.0, 1.0, 0.0}) / weight;
  EXPECT_LT(ratio, 4.5);
  EXPECT_GE(ratio, lh_lower_constant(3, 5.0) * (1.0 - 1e-12));
}

TEST(LpNonDiv, AffineMapsGiveZero) {
  Rng rng(307);
  const SmoothMap u = affine_map(rng.positive_matrix(3), rng.normal_vector(3));
  EXPECT_LT(lp_nondiv(u.jet(rng.normal_vector(3)), 2.0).norm(), 1e-14);
  EXPECT_LT(lp_nondiv(radial_stretch(1.0, 3).jet(Vector{0.3, 0.1, -0.4}), 2.0).norm(), 1e-12);
}

TEST(LpNonDiv, RadialStretchMatchesDerivedClosedForm) {
  Rng rng(308);
  for (double alpha : {0.5, 2.0, 3.0})
    for (double p : {1.0, 2.0, 3.0}) {
      const RadialClosedForms cf{alpha, 3};
      const SmoothMap u = radial_stretch(alpha, 3);
      for (int trial = 0; trial < 10; ++trial) {
        const Vector x = rng.in_shell(3, 0.5, 2.0);
        const Vector expected = cf.Lp(x, p);
        EXPECT_LE(vec_distance(lp_nondiv(u.jet(x), p), expected), 1e-8 * expected.norm())
            << "alpha=" << alpha << " p=" << p;
      }
    }
}

TEST(LpNonDiv, PrintedRadialFormulaDiffersByAFixedFactor) {
  // The printed closed form equals the derived one times -1/(p alpha^{(n-1)p}).
  for (double alpha : {0.5, 2.0})
    for (double p : {1.0, 2.0}) {
      const RadialClosedForms cf{alpha, 3};
      const Vector x{0.4, -0.8, 0.6};
      const Vector printed = cf.Lp_as_printed(x, p);
      const Vector derived = cf.Lp(x, p);
      const double factor = -p * std::pow(alpha, 2.0 * p);
      EXPECT_LE(vec_distance(printed * factor, derived), 1e-12 * derived.norm());
      EXPECT_GT(vec_distance(printed, derived), 1e-3 * derived.norm());
    }
}

TEST(LpDivergence, AffineGivesZero) {
  Rng rng(309);
  const SmoothMap u = affine_map(rng.positive_matrix(3), rng.normal_vector(3));
  const auto jac = [&](const Vector& y) { return u.jet(y).J; };
  EXPECT_LT(lp_divergence(jac, Vector{0.1, 0.2, 0.3}, 2.0, 1e-3).norm(), 1e-10);
}

TEST(LpDivergence, RadialMatchesClosedForm) {
  const SmoothMap u = radial_stretch(2.0, 3);
  const RadialClosedForms cf{2.0, 3};
  const auto jac = [&](const Vector& y) { return u.jet(y).J; };
  const Vector x{0.7, -0.5, 0.9};
  const Vector expected = cf.Lp(x, 2.0);
  EXPECT_LE(vec_distance(lp_divergence(jac, x, 2.0, 1e-3), expected), 1e-4 * expected.norm());
}

TEST(LpDivergence, ConvergesToNonDivergenceAtSecondOrder) {
  const SmoothMap u = cubic_perturbation(11, 0.2, 3);
  const auto jac = [&](const Vector& y) { return u.jet(y).J; };
  const Vector x{0.2, -0.1, 0.15};
  const Vector ref = lp_nondiv(u.jet(x), 2.0);
  const double e1 = vec_distance(lp_divergence(jac, x, 2.0, 2e-2), ref);
  const double e2 = vec_distance(lp_divergence(jac, x, 2.0, 1e-2), ref);
  EXPECT_NEAR(e1 / e2, 4.0, 0.8);
}

TEST(LpDivergence, GuardViolationOnStencilPropagates) {
  const SmoothMap u = radial_stretch(2.0, 3);
  const auto jac = [&](const Vector& y) { return u.jet(y).J; };
  EXPECT_THROW(lp_divergence(jac, Vector{1e-3, 0.0, 0.0}, 2.0, 1e-3), Error);
}

TEST(LInfinity, RadialStretchIsASolution) {
  Rng rng(310);
  for (double alpha : {0.5, 2.0, 3.0}) {
    const SmoothMap u = radial_stretch(alpha, 3);
    for (int trial = 0; trial < 50; ++trial) {
      const Jet2Sample s = u.jet(rng.in_shell(3, 0.5, 2.0));
      EXPECT_LE(linfty_factored(s).norm(), 1e-8);
      EXPECT_LE(linfty_flowform(s).norm(), 1e-8);
    }
  }
}

TEST(LInfinity, WedgeMapIsASolutionOnBothSectors) {
  const SmoothMap u = wedge_map(std::numbers::pi / 2.0, 3);
  Rng rng(311);
  for (int trial = 0; trial < 100; ++trial) {
    const double theta = rng.uniform(0.01, 2.0 * std::numbers::pi - 0.01);
    if (std::abs(theta - std::numbers::pi / 2.0) < 0.01) continue;
    const double r = rng.uniform(0.2, 2.0);
    const Vector x{r * std::cos(theta), r * std::sin(theta), rng.uniform(-1.0, 1.0)};
    EXPECT_LE(linfty_factored(u.jet(x)).norm(), 1e-8);
  }
}

TEST(LInfinity, FactoredAndFlowFormsAgree) {
  Rng rng(312);
  for (int n = 2; n <= 4; ++n)
    for (int trial = 0; trial < 100; ++trial) {
      const SmoothMap u = cubic_perturbation(1000 + trial, 0.3, n);
      const Jet2Sample s = u.jet(rng.in_ball(n, 0.5));
      if (determinant(s.J) <= 0.0) continue;
      const Vector a = linfty_factored(s);
      const Vector b = linfty_flowform(s);
      EXPECT_LE(vec_distance(a, b), 1e-8 * a.norm()) << "n=" << n;
    }
}

TEST(LInfinity, ConformalAndAffineMapsGiveZero) {
  const SmoothMap f = moebius_inversion(3).map();
  const Jet2Sample s = f.jet(Vector{0.5, 0.3, -0.2});
  EXPECT_LE(linfty_flowform(s).norm(), 1e-10 * hs_norm(s.J));
  EXPECT_LE(linfty_factored(affine_map(SquareMatrix::diagonal(Vector{1.0, 2.0}), Vector(2))
                                .jet(Vector{0.1, 0.1}))
                .norm(),
            1e-14);
}

TEST(Asymptotics, SignCalibrationAtLargeP) {
  Rng rng(313);
  const SmoothMap u = cubic_perturbation(17, 0.3, 3);
  const Jet2Sample s = u.jet(rng.in_ball(3, 0.5));
  const Vector limit = linfty_factored(s);
  const Vector r = lp_asymptotic_ratio(s, 1000.0);
  EXPECT_LE(vec_distance(r, limit * kAsymptoticSign), 1e-2 * limit.norm());
  EXPECT_GT(vec_distance(r, limit * -kAsymptoticSign), limit.norm());
}

TEST(Asymptotics, RatioMatchesDirectQuotientAtModerateP) {
  Rng rng(314);
  const SmoothMap u = cubic_perturbation(19, 0.3, 3);
  const Jet2Sample s = u.jet(rng.in_ball(3, 0.5));
  const int n = 3;
  for (double p : {1.0, 2.0, 4.0}) {
    const double norm = hs_norm(s.J);
    const double weight = p * p * std::pow(norm, n * p - 4.0) / std::pow(determinant(s.J), p);
    const Vector direct = lp_nondiv(s, p) * (1.0 / weight);
    const Vector r = lp_asymptotic_ratio(s, p);
    EXPECT_LE(vec_distance(direct, r), 1e-10 * r.norm());
  }
}

TEST(Asymptotics, ConvergenceIsFirstOrderInOneOverP) {
  Rng rng(315);
  for (int trial = 0; trial < 20; ++trial) {
    const SmoothMap u = cubic_perturbation(400 + trial, 0.3, 3);
    const Jet2Sample s = u.jet(rng.in_ball(3, 0.5));
    if (determinant(s.J) <= 0.0) continue;
    const Vector limit = linfty_factored(s) * kAsymptoticSign;
    const double d10 = vec_distance(lp_asymptotic_ratio(s, 10.0), limit);
    const double d100 = vec_distance(lp_asymptotic_ratio(s, 100.0), limit);
    const double d1000 = vec_distance(lp_asymptotic_ratio(s, 1000.0), limit);
    EXPECT_NEAR(d10 / d100, 10.0, 3.0);
    EXPECT_NEAR(d100 / d1000, 10.0, 3.0);
  }
}

TEST(Asymptotics, AffineAndConformalGiveZero) {
  const SmoothMap a = affine_map(SquareMatrix::diagonal(Vector{2.0, 1.0, 0.5}), Vector(3));
  EXPECT_LT(lp_asymptotic_ratio(a.jet(Vector{0.1, 0.2, 0.3}), 50.0).norm(), 1e-14);
  const SmoothMap f = moebius_inversion(3).map();
  const Jet2Sample s = f.jet(Vector{0.5, 0.3, -0.2});
  EXPECT_LT(lp_asymptotic_ratio(s, 50.0).norm(), 1e-9 * hs_norm(s.J) * hs_norm(s.J));
}

TEST(BTensor, ConformalGivesZeroForm) {
  Rng rng(316);
  const SquareMatrix b = b_tensor(SquareMatrix::identity(2) * 3.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) EXPECT_LT(std::abs(b_quadratic_form(b, rng.unit_vector(2))), 1e-12);
}

TEST(BTensor, ModelCaseFormula) {
  for (double l1 : {0.5, 2.0, 3.0})
    for (double l2 : {0.7, 1.0})
      for (double p : {1.0, 2.0}) {
        const SquareMatrix b = b_tensor(SquareMatrix::diagonal(Vector{l1, l2}), p);
        const double s = l1 * l1 + l2 * l2;
        const double expected = p * (1.0 - l1 * l1 / (s / 2.0)) * std::pow(s / (l1 * l2), p);
        EXPECT_NEAR(b_quadratic_form(b, Vector{1.0, 0.0}), expected, 1e-12 * (1.0 + std::abs(expected)));
        EXPECT_LT(oracle::distance(b, b.transpose()), 1e-14);
      }
}

TEST(BTensor, QuadraticFormIsIndefinite) {
  const SquareMatrix b = b_tensor(SquareMatrix::diagonal(Vector{2.0, 0.5}), 1.0);
  EXPECT_NEAR(b_quadratic_form(b, Vector{1.0, 0.0}), -15.0 / 4.0, 1e-13);
  EXPECT_NEAR(b_quadratic_form(b, Vector{0.0, 1.0}), 15.0 / 4.0, 1e-13);
}
