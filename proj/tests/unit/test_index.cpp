#include <gtest/gtest.h>

#include <cmath>

#include "stabhom/index.hpp"
#include "stabhom/sampling.hpp"

using namespace stabhom;

namespace {

Mat m2(double a, double b, double c, double d) {
  Mat A(2, 2);
  A << a, b, c, d;
  return A;
}

}  // namespace

TEST(Hurwitz, TriangularSpectrumIsDiagonal) {
  const auto r = hurwitz_check({m2(-1, 10, 0, -1)});
  EXPECT_NEAR(r.max_real_part, -1.0, 1e-12);
  EXPECT_TRUE(r.is_hurwitz);
}

TEST(Hurwitz, SymmetricMidpointIsUnstable) {
  const auto r = hurwitz_check({m2(-1, 5, 5, -1)});
  EXPECT_NEAR(r.max_real_part, 4.0, 1e-9);
  EXPECT_FALSE(r.is_hurwitz);
}

TEST(Hurwitz, ComplexPairUsesRealPart) {
  const auto r = hurwitz_check({m2(-0.1, -1, 1, -0.1)});
  EXPECT_NEAR(r.max_real_part, -0.1, 1e-12);
}

TEST(LyapunovEquation, ResidualVanishesForRandomHurwitz) {
  sampling::SplitMix64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
    A -= (hurwitz_check({A}).max_real_part + 0.5) * Mat::Identity(n, n);
    const Mat Q = Mat::Identity(n, n);
    const Mat P = lyapunov_equation({A}, Q);
    EXPECT_LT((A.transpose() * P + P * A + Q).norm(), 1e-9);
    EXPECT_LT((P - P.transpose()).norm(), 1e-12);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(P).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(LyapunovEquation, ScalarClosedForm) {
  Mat A(1, 1);
  A << -2.0;
  Mat Q(1, 1);
  Q << 3.0;
  EXPECT_NEAR(lyapunov_equation({A}, Q)(0, 0), 0.75, 1e-14);
}

TEST(LyapunovEquation, RejectsUnstable) {
  try {
    (void)lyapunov_equation({m2(-1, 5, 5, -1)}, Mat::Identity(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotHurwitz);
  }
}

TEST(WindingNumber, SinkSourceAndSaddle) {
  EXPECT_EQ(winding_number(linear_field(-Mat::Identity(2, 2)), 1.0), 1);
  EXPECT_EQ(winding_number(linear_field(Mat::Identity(2, 2)), 1.0), 1);
  EXPECT_EQ(winding_number(linear_field(m2(1, 0, 0, -1)), 1.0), -1);
}

TEST(WindingNumber, QuadraticDipoleHasIndexTwo) {
  const auto f = make_field("z^2", 2, [](const Vec& x) {
    Vec v(2);
    v << x(0) * x(0) - x(1) * x(1), 2.0 * x(0) * x(1);
    return v;
  });
  EXPECT_EQ(winding_number(f, 0.5), 2);
}

TEST(WindingNumber, VanishingOnCircleIsReported) {
  const auto f = make_field("ring", 2, [](const Vec& x) -> Vec { return (x.squaredNorm() - 1.0) * x; });
  try {
    (void)winding_number(f, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::VanishesOnCircle);
  }
}
