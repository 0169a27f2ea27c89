#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "stabhom/core.hpp"
#include "stabhom/sampling.hpp"

using namespace stabhom;

namespace {

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

Vec v1(double a) { return Vec::Constant(1, a); }

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

FieldDescription neg_sign_field() {
  return make_field("neg_sign", 1, [](const Vec& x) { return v1(-sgn(x(0))); },
                    Regularity::SetValuedAtOrigin, {0.0});
}

}  // namespace

TEST(EvalField, CanonicalField) {
  const auto f = make_field("canonical", 2, [](const Vec& x) -> Vec { return -x; });
  const Vec y = eval_field(f, v2(1, 2));
  EXPECT_DOUBLE_EQ(y(0), -1.0);
  EXPECT_DOUBLE_EQ(y(1), -2.0);
}

TEST(EvalField, PolynomialFieldAtOneOne) {
  const auto f = make_field("x1", 2, [](const Vec& x) {
    return v2(-x(0) + x(0) * x(1), -x(1));
  });
  const Vec y = eval_field(f, v2(1, 1));
  EXPECT_DOUBLE_EQ(y(0), 0.0);
  EXPECT_DOUBLE_EQ(y(1), -1.0);
}

TEST(EvalField, SetValuedPointIsUndefined) {
  try {
    (void)eval_field(neg_sign_field(), v1(0.0));
    FAIL() << "expected UndefinedAtPoint";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UndefinedAtPoint);
  }
}

TEST(EvalField, DimensionMismatch) {
  const auto f = make_field("canonical", 2, [](const Vec& x) -> Vec { return -x; });
  try {
    (void)eval_field(f, v1(1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(FilippovHull, SignAtDiscontinuity) {
  const auto hull = filippov_hull_1d(neg_sign_field(), 0.0, 0.1);
  ASSERT_EQ(hull.vertices.size(), 2u);
  EXPECT_DOUBLE_EQ(hull.vertices[0](0), -1.0);
  EXPECT_DOUBLE_EQ(hull.vertices[1](0), 1.0);
}

TEST(FilippovHull, SignAwayFromDiscontinuity) {
  const auto hull = filippov_hull_1d(neg_sign_field(), 1.0, 0.1);
  ASSERT_EQ(hull.vertices.size(), 1u);
  EXPECT_DOUBLE_EQ(hull.vertices[0](0), -1.0);
}

TEST(FilippovHull, ContinuousFieldRange) {
  const auto f = make_field("neg", 1, [](const Vec& x) -> Vec { return -x; });
  const auto hull = filippov_hull_1d(f, 0.0, 0.1);
  ASSERT_EQ(hull.vertices.size(), 2u);
  EXPECT_NEAR(hull.vertices[0](0), -0.1, 1e-12);
  EXPECT_NEAR(hull.vertices[1](0), 0.1, 1e-12);
}

TEST(FilippovHull, ContinuousFieldDegeneratesAsDeltaShrinks) {
  const auto f = make_field("cubic", 1, [](const Vec& x) { return v1(-x(0) * x(0) * x(0) - x(0)); });
  double prev = std::numeric_limits<double>::infinity();
  double delta = 0.4;
  for (int k = 0; k < 4; ++k, delta /= 2) {
    const auto hull = filippov_hull_1d(f, 0.7, delta);
    const double diam = hull.vertices.back()(0) - hull.vertices.front()(0);
    EXPECT_LT(diam, prev);
    prev = diam;
  }
}

TEST(FilippovHull, RejectsHigherDimension) {
  const auto f = make_field("canonical", 2, [](const Vec& x) -> Vec { return -x; });
  EXPECT_THROW((void)filippov_hull_1d(f, 0.0, 0.1), Error);
}

TEST(ClassKInverse, SqrtGauge) {
  const double tol = 1e-10;
  EXPECT_NEAR(classk_inverse(classk::sqrt_gauge(), 2.0, tol), 4.0, 1e-8);
}

TEST(ClassKInverse, ZeroMapsToZero) {
  EXPECT_EQ(classk_inverse(classk::power(3.0), 0.0, 1e-12), 0.0);
}

TEST(ClassKInverse, Square) {
  const double r = classk_inverse(classk::power(2.0), 9.0, 1e-10);
  EXPECT_NEAR(r * r, 9.0, 1e-10);
  EXPECT_NEAR(r, 3.0, 1e-9);
}

TEST(ClassKInverse, DetectsNonMonotone) {
  ClassKFn bad;
  bad.forward = [](double r) { return std::sin(r); };
  EXPECT_THROW((void)classk_inverse(bad, 2.0, 1e-9), Error);
}

TEST(GammaFromAlpha, LinearAlphaGivesSqrt) {
  const auto g = gamma_from_alpha(classk::power(1.0, 2.0), 256);
  EXPECT_NEAR(g(4.0), 2.0, 1e-8);
  EXPECT_NEAR(g(9.0), 3.0, 1e-8);
  EXPECT_GT(g.deriv(1e-6), 100.0);
  EXPECT_NEAR(g.deriv(1e-6), 1.0 / (2.0 * std::sqrt(1e-6)), 1e-3);
}

TEST(GammaFromAlpha, ConstantAlphaGivesIdentity) {
  ClassKFn one;
  one.forward = [](double) { return 1.0; };
  const auto g = gamma_from_alpha(one, 64);
  for (double y : {0.0, 0.5, 3.0, 40.0}) EXPECT_NEAR(g(y), y, 1e-9 * (1 + y));
}

TEST(GammaFromAlpha, RejectsCoarseQuadrature) {
  EXPECT_THROW((void)gamma_from_alpha(classk::power(1.0), 10), Error);
}

TEST(GammaFromAlpha, QuadratureFailureOnNonFiniteIntegrand) {
  ClassKFn blow;
  blow.forward = [](double r) { return r > 0.5 ? std::numeric_limits<double>::infinity() : r; };
  try {
    (void)gamma_from_alpha(blow, 64);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::QuadratureFailure);
  }
}

TEST(GammaFromAlpha, RoundTripOnRandomTargets) {
  const auto g = gamma_from_alpha(classk::power(1.0, 2.0), 256);
  sampling::SplitMix64 rng(17);
  const double tol = 1e-9;
  for (int k = 0; k < 100; ++k) {
    const double y = rng.uniform(0.0, 100.0);
    const double r = classk_inverse(g, y, tol);
    EXPECT_NEAR(g(r), y, 2 * tol);
  }
}

TEST(GammaCapital, SqrtGauge) {
  const auto g = classk::sqrt_gauge();
  EXPECT_NEAR(gamma_capital(g, 1.0, 256), 4.0 / 3.0, 1e-6);
  EXPECT_NEAR(gamma_capital(g, 4.0, 256), 32.0 / 3.0, 1e-6);
  EXPECT_EQ(gamma_capital(g, 0.0, 256), 0.0);
}

TEST(GammaCapital, CubeRootGauge) {
  // 1/gamma' = 3 r^{2/3} integrates to (9/5) r^{5/3}.
  const auto g = classk::power(1.0 / 3.0);
  EXPECT_NEAR(gamma_capital(g, 2.0, 512), 9.0 / 5.0 * std::pow(2.0, 5.0 / 3.0), 1e-6);
}

TEST(ClassK, GridAndGrowthChecks) {
  const std::vector<double> grid = {0.0, 0.1, 1.0, 10.0, 100.0};
  EXPECT_TRUE(is_classk_on_grid(classk::sqrt_gauge(), grid));
  EXPECT_TRUE(kinfty_growth_check(classk::sqrt_gauge()));
  ClassKFn saturating;
  saturating.forward = [](double r) { return r / (1.0 + r); };
  EXPECT_TRUE(is_classk_on_grid(saturating, grid));
  EXPECT_FALSE(kinfty_growth_check(saturating));
  ClassKFn shifted;
  shifted.forward = [](double r) { return r + 1.0; };
  EXPECT_FALSE(is_classk_on_grid(shifted, grid));
}

TEST(ClassK, PiecewiseLinearInterpolatesAndInverts) {
  const auto g = classk::piecewise_linear({1.0, 2.0}, {2.0, 6.0});
  EXPECT_DOUBLE_EQ(g(0.5), 1.0);
  EXPECT_DOUBLE_EQ(g(1.5), 4.0);
  EXPECT_DOUBLE_EQ(g(3.0), 10.0);
  EXPECT_NEAR(g.inv(4.0), 1.5, 1e-12);
}

TEST(LyapunovPairTest, PositivityOnAnnulus) {
  LyapunovPair p;
  p.V = [](const Vec& x) { return 0.5 * std::log(1 + x(0) * x(0)) + 0.5 * x(1) * x(1); };
  p.W = [](const Vec& x) { return x.squaredNorm() / (1 + x.squaredNorm()); };
  EXPECT_TRUE(pair_positive_on_annulus(p, 2, 1000, 1e-3, 10.0));
  LyapunovPair bad = p;
  bad.V = [](const Vec& x) { return x(0) * x(0) - 0.1 * x(1) * x(1); };
  EXPECT_FALSE(pair_positive_on_annulus(bad, 2, 1000, 1e-3, 10.0));
}

TEST(LyapunovPairTest, SublevelProxy) {
  LyapunovPair p;
  p.V = [](const Vec& x) { return 0.5 * std::log(1 + x(0) * x(0)) + 0.5 * x(1) * x(1); };
  p.W = p.V;
  EXPECT_TRUE(sublevel_proxy_increasing(p, 2, {0.5, 1, 2, 4, 8}));
  LyapunovPair bounded = p;
  bounded.V = [](const Vec& x) { return x.squaredNorm() / (1 + x.squaredNorm()) * (1 + std::cos(3 * x.norm())); };
  EXPECT_FALSE(sublevel_proxy_increasing(bounded, 2, {0.5, 1, 2, 4, 8}));
}

TEST(LyapunovPairTest, AnalyticGradientMatchesFiniteDifferences) {
  LyapunovPair p;
  p.V = [](const Vec& x) { return 0.5 * std::log(1 + x(0) * x(0)) + 0.5 * x(1) * x(1); };
  p.gradV = [](const Vec& x) { return v2(x(0) / (1 + x(0) * x(0)), x(1)); };
  for (const Vec& x : sampling::annulus(2, 100, 0.1, 10.0)) {
    const Vec g = p.gradV(x);
    const Vec fd = fd_gradient(p.V, x);
    EXPECT_LE((g - fd).norm(), 1e-4 * std::max(1.0, g.norm()));
  }
}

TEST(LyapunovPairTest, GradientFallsBackToFiniteDifferences) {
  LyapunovPair p;
  p.V = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  const Vec g = p.gradient(v2(3, -4));
  EXPECT_NEAR(g(0), 3.0, 1e-8);
  EXPECT_NEAR(g(1), -4.0, 1e-8);
}

TEST(Simpson, PolynomialExact) {
  EXPECT_NEAR(simpson([](double x) { return x * x * x; }, 0.0, 2.0, 3), 4.0, 1e-13);
}

TEST(Sampling, AnnulusRespectsRadiiAndIsPrefixStable) {
  const auto a = sampling::annulus(3, 200, 1e-3, 10.0);
  const auto b = sampling::annulus(3, 400, 1e-3, 10.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_GE(a[i].norm(), 1e-3 * (1 - 1e-12));
    EXPECT_LE(a[i].norm(), 10.0 * (1 + 1e-12));
    EXPECT_EQ(a[i], b[i]);
  }
}

TEST(Sampling, SplitMixIsReproducible) {
  sampling::SplitMix64 a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
}
