#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qcflow/matrix.hpp"
#include "qcflow/random.hpp"

using namespace qcflow;

namespace {

SquareMatrix gaussian(Rng& rng, int n) {
  SquareMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST(Matrix, RejectsDimensionsOutsideRange) {
  EXPECT_THROW(SquareMatrix(0), Error);
  EXPECT_THROW(SquareMatrix(5), Error);
  EXPECT_NO_THROW(SquareMatrix(4));
}

TEST(Matrix, IdentityDiagonalAndOuter) {
  const SquareMatrix i3 = SquareMatrix::identity(3);
  EXPECT_DOUBLE_EQ(i3.trace(), 3.0);
  const SquareMatrix d = SquareMatrix::diagonal(Vector{2.0, 3.0});
  EXPECT_DOUBLE_EQ(d(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(d(1, 1), 3.0);
  EXPECT_DOUBLE_EQ(d(0, 1), 0.0);
  const SquareMatrix o = SquareMatrix::outer(Vector{1.0, 2.0}, Vector{3.0, 4.0});
  EXPECT_DOUBLE_EQ(o(1, 0), 6.0);
  EXPECT_DOUBLE_EQ(o(0, 1), 4.0);
}

TEST(Matrix, DeterminantMatchesPermutationExpansion) {
  Rng rng(101);
  for (int n = 1; n <= 4; ++n)
    for (int trial = 0; trial < 200; ++trial) {
      const SquareMatrix m = gaussian(rng, n);
      const double ref = oracle::permutation_det(m);
      EXPECT_NEAR(determinant(m), ref, 1e-12 * (1.0 + std::abs(ref))) << "n=" << n;
    }
}

TEST(Matrix, CofactorMatchesSignedMinors) {
  Rng rng(102);
  for (int n = 2; n <= 4; ++n)
    for (int trial = 0; trial < 100; ++trial) {
      const SquareMatrix m = gaussian(rng, n);
      EXPECT_LT(oracle::distance(cofactor(m), oracle::minor_cofactor(m)), 1e-12) << "n=" << n;
    }
}

TEST(Matrix, CofactorTransposeTimesMatrixIsDeterminantIdentity) {
  Rng rng(103);
  for (int n = 2; n <= 4; ++n)
    for (int trial = 0; trial < 200; ++trial) {
      const SquareMatrix m = gaussian(rng, n);
      const double d = determinant(m);
      const SquareMatrix lhs = cofactor(m).transpose() * m;
      const double scale = std::sqrt(m.contract(m));
      EXPECT_LT(oracle::distance(lhs, SquareMatrix::identity(n) * d),
                1e-12 * std::pow(scale, n) * n)
          << "n=" << n;
    }
}

TEST(Matrix, CofactorExamples) {
  EXPECT_LT(oracle::distance(cofactor(SquareMatrix::identity(3)), SquareMatrix::identity(3)), 1e-15);
  const SquareMatrix c = cofactor(SquareMatrix::diagonal(Vector{2.0, 5.0}));
  EXPECT_DOUBLE_EQ(c(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(c(1, 1), 2.0);
}

TEST(Matrix, InverseTimesMatrixIsIdentity) {
  Rng rng(104);
  for (int n = 2; n <= 4; ++n) {
    const SquareMatrix m = rng.positive_matrix(n);
    EXPECT_LT(oracle::distance(inverse(m) * m, SquareMatrix::identity(n)), 1e-12);
  }
}

TEST(Matrix, InverseOfSingularThrows) {
  EXPECT_THROW(inverse(SquareMatrix::diagonal(Vector{1.0, 0.0})), std::runtime_error);
}

TEST(Matrix, ProductTransposeTraceContract) {
  const SquareMatrix a{{1.0, 2.0}, {3.0, 4.0}};
  const SquareMatrix b{{0.0, 1.0}, {1.0, 0.0}};
  const SquareMatrix ab = a * b;
  EXPECT_DOUBLE_EQ(ab(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(ab(1, 1), 3.0);
  EXPECT_DOUBLE_EQ(a.transpose()(0, 1), 3.0);
  EXPECT_DOUBLE_EQ(a.contract(a), 30.0);
  const Vector v = a * Vector{1.0, 1.0};
  EXPECT_DOUBLE_EQ(v[0], 3.0);
  EXPECT_DOUBLE_EQ(v[1], 7.0);
}

TEST(Matrix, RotationsAreOrthogonalWithUnitDeterminant) {
  Rng rng(105);
  for (int n = 2; n <= 4; ++n) {
    const SquareMatrix q = rng.rotation(n);
    EXPECT_LT(oracle::distance(q.transpose() * q, SquareMatrix::identity(n)), 1e-13);
    EXPECT_NEAR(determinant(q), 1.0, 1e-13);
  }
}

TEST(Matrix, RngIsReproducible) {
  Rng a(7);
  Rng b(7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  Rng c(8);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Matrix, StreamsRows) {
  std::ostringstream os;
  os << SquareMatrix::identity(2);
  EXPECT_NE(os.str().find('1'), std::string::npos);
}
