#include "fluidlb/jacobi.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fluidlb/common.h"
#include "oracles.h"

namespace fluidlb {
namespace {

Matrix random_symmetric(int n, std::mt19937_64& gen) {
  Matrix m(n, n);
  std::normal_distribution<double> d;
  for (int r = 0; r < n; ++r) {
    for (int c = r; c < n; ++c) m(r, c) = m(c, r) = d(gen);
  }
  return m;
}

TEST(JacobiTest, TwoByTwoClosedForm) {
  Matrix m(2, 2);
  m(0, 0) = 0.5;
  m(0, 1) = m(1, 0) = -0.5;
  m(1, 1) = 0.5;
  const auto e = symmetric_eigenvalues(m);
  EXPECT_NEAR(e[0], 0.0, 1e-15);
  EXPECT_NEAR(e[1], 1.0, 1e-15);
}

TEST(JacobiTest, DiagonalIsSorted) {
  Matrix m(3, 3);
  m(0, 0) = 3.0;
  m(1, 1) = -1.0;
  m(2, 2) = 2.0;
  EXPECT_EQ(symmetric_eigenvalues(m), (std::vector<double>{-1.0, 2.0, 3.0}));
}

TEST(JacobiTest, MatchesCharacteristicPolynomialRoots) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix m = random_symmetric(3, gen);
    const auto e = symmetric_eigenvalues(m);
    const auto ref = oracle::eigenvalues_3x3(m);
    for (int k = 0; k < 3; ++k) ASSERT_NEAR(e[k], ref[k], 1e-9) << trial;
  }
}

TEST(JacobiTest, PreservesTraceAndFrobeniusNorm) {
  std::mt19937_64 gen(32);
  for (int n : {1, 4, 10, 30}) {
    const Matrix m = random_symmetric(n, gen);
    const auto e = symmetric_eigenvalues(m);
    double trace = 0.0, fro = 0.0, sum = 0.0, sq = 0.0;
    for (int r = 0; r < n; ++r) {
      trace += m(r, r);
      for (int c = 0; c < n; ++c) fro += m(r, c) * m(r, c);
    }
    for (double v : e) {
      sum += v;
      sq += v * v;
    }
    EXPECT_NEAR(sum, trace, 1e-10 * n);
    EXPECT_NEAR(sq, fro, 1e-10 * n * n);
  }
}

TEST(JacobiTest, RejectsBadInput) {
  EXPECT_THROW(symmetric_eigenvalues(Matrix(2, 3)), Error);
  Matrix m(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(symmetric_eigenvalues(m), Error);
}

}  // namespace
}  // namespace fluidlb
