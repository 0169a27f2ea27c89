#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "stabhom/integrate.hpp"
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

FieldDescription canonical(int n) {
  return make_field("canonical", n, [](const Vec& x) -> Vec { return -x; });
}

FieldDescription neg_sign() {
  return make_field("neg_sign", 1, [](const Vec& x) { return v1(-sgn(x(0))); },
                    Regularity::SetValuedAtOrigin, {0.0});
}

FieldDescription blend(double s) {
  return make_field("blend", 1, [s](const Vec& x) { return v1(-(1 - s) * sgn(x(0)) - s * x(0)); },
                    s < 1 ? Regularity::SetValuedAtOrigin : Regularity::Smooth, {0.0});
}

FieldDescription polynomial_x1() {
  return make_field("x1", 2, [](const Vec& x) { return v2(-x(0) + x(0) * x(1), -x(1)); });
}

// x' = -gamma'(|x|) x/|x| with gamma = sqrt.
FieldDescription radial_sqrt() {
  return make_field(
      "radial", 2,
      [](const Vec& x) -> Vec {
        const double r = x.norm();
        if (r == 0.0) return Vec::Zero(2);
        return -x / (2.0 * std::pow(r, 1.5));
      },
      Regularity::LipschitzOffOrigin);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

}  // namespace

TEST(Integrate, ExponentialDecay) {
  const Vec x = flow(canonical(2), v2(1, 0), std::log(2.0));
  EXPECT_NEAR(x(0), 0.5, 1e-8);
  EXPECT_NEAR(x(1), 0.0, 1e-12);
}

TEST(Integrate, TrajectoryTimesStrictlyIncreasing) {
  const auto traj = integrate(polynomial_x1(), v2(1, 1), 3.0);
  ASSERT_EQ(traj.times.size(), traj.states.size());
  for (std::size_t i = 1; i < traj.times.size(); ++i) EXPECT_GT(traj.times[i], traj.times[i - 1]);
  EXPECT_DOUBLE_EQ(traj.final_time(), 3.0);
}

TEST(Integrate, SelfConvergenceOnPolynomialField) {
  IntegratorConfig tight;
  tight.rel_tol = 1e-11;
  tight.abs_tol = 1e-14;
  const Vec ref = flow(polynomial_x1(), v2(1, 1), 1.0, tight);
  const Vec x = flow(polynomial_x1(), v2(1, 1), 1.0);
  EXPECT_LE((x - ref).norm(), 1e-6);
}

TEST(Integrate, RadialFieldExtinguishesAtGammaOfOne) {
  const auto traj = integrate(radial_sqrt(), v2(0.6, 0.8), 2.0);
  const auto te = traj.event_time(EventTag::Extinction);
  ASSERT_TRUE(te.has_value());
  EXPECT_NEAR(*te, 4.0 / 3.0, 1e-3);
  EXPECT_EQ(traj.final_state(), Vec::Zero(2));
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    if (traj.times[i] >= *te) EXPECT_EQ(traj.states[i], Vec::Zero(2));
}

TEST(Integrate, RadialFieldMatchesClosedFormBeforeExtinction) {
  const auto gamma = classk::sqrt_gauge();
  const auto times = linspace(0.0, 1.3, 27);
  for (const Vec& x0 : {v2(1, 0), v2(0.6, 0.8), v2(-0.3, 0.4)}) {
    const auto traj = integrate_at(radial_sqrt(), x0, times);
    ASSERT_EQ(traj.times.size(), times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      const Vec ref = closed_semiflow_radial(x0, times[k], gamma);
      EXPECT_LE((traj.states[k] - ref).norm(), 1e-4) << "t=" << times[k];
    }
  }
}

TEST(Integrate, BlowUpDetected) {
  const auto f = make_field("quad", 1, [](const Vec& x) { return v1(x(0) * x(0)); });
  try {
    (void)integrate(f, v1(1.0), 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.kind() == ErrorKind::BlowUp || e.kind() == ErrorKind::StepUnderflow);
  }
}

TEST(Integrate, StartAtEquilibriumIsStationary) {
  const auto traj = integrate(neg_sign(), v1(0.0), 5.0);
  EXPECT_EQ(traj.final_state()(0), 0.0);
}

TEST(Integrate, SemigroupProperty) {
  sampling::SplitMix64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const Vec x0 = v2(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const double t1 = rng.uniform(0, 2), t2 = rng.uniform(0, 2);
    const Vec direct = flow(polynomial_x1(), x0, t1 + t2);
    const Vec split = flow(polynomial_x1(), flow(polynomial_x1(), x0, t1), t2);
    EXPECT_LE((direct - split).norm(), 1e-5 * (1 + x0.norm()));
  }
}

TEST(Integrate, ConfigValidation) {
  IntegratorConfig cfg;
  cfg.snap_radius = 1e-2;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.snap_radius = 1e-9;
  cfg.rel_tol = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(ClosedSemiflowSign, Branches) {
  EXPECT_DOUBLE_EQ(closed_semiflow_sign(5, 2), 3);
  EXPECT_DOUBLE_EQ(closed_semiflow_sign(0, 7), 0);
  EXPECT_DOUBLE_EQ(closed_semiflow_sign(-1, 3), 0);
  EXPECT_DOUBLE_EQ(closed_semiflow_sign(-4, 1), -3);
}

TEST(ClosedSemiflowBlend, Limits) {
  EXPECT_NEAR(closed_semiflow_blend(5, 2, 1e-9), 3.0, 1e-8);
  EXPECT_DOUBLE_EQ(closed_semiflow_blend(5, 2, 0.0), 3.0);
  EXPECT_NEAR(closed_semiflow_blend(5, 2, 1.0), 5 * std::exp(-2.0), 1e-15);
  EXPECT_EQ(closed_semiflow_blend(0, 3, 0.4), 0.0);
  EXPECT_NEAR(closed_semiflow_blend(-5, 2, 1.0), -5 * std::exp(-2.0), 1e-15);
}

TEST(ClosedSemiflowBlend, SeriesBranchContinuous) {
  // Either side of the series switch agrees with the s -> 0 expansion.
  const double below = closed_semiflow_blend(2, 1, 0.99e-4);
  const double above = closed_semiflow_blend(2, 1, 1.01e-4);
  EXPECT_NEAR(below, above, 1e-5);
}

TEST(ClosedSemiflowRadial, Oracles) {
  const auto g = classk::sqrt_gauge();
  EXPECT_EQ(closed_semiflow_radial(v2(1, 0), 4.0 / 3.0, g), Vec::Zero(2));
  const Vec same = closed_semiflow_radial(v2(1, 0), 0.0, g);
  EXPECT_NEAR(same(0), 1.0, 1e-12);
  const Vec mid = closed_semiflow_radial(v2(4, 0), 32.0 / 3.0 - 4.0 / 3.0, g);
  EXPECT_NEAR(mid.norm(), 1.0, 1e-9);
  EXPECT_NEAR(mid(1), 0.0, 1e-15);
}

TEST(SignField, MatchesClosedSemiflow) {
  const auto times = linspace(0.0, 10.0, 201);
  for (int x0 = -5; x0 <= 5; ++x0) {
    const auto traj = integrate_at(neg_sign(), v1(x0), times);
    for (std::size_t k = 0; k < times.size(); ++k)
      EXPECT_NEAR(traj.states[k](0), closed_semiflow_sign(x0, times[k]), 1e-6);
    if (x0 != 0) {
      const auto te = traj.event_time(EventTag::Extinction);
      ASSERT_TRUE(te.has_value());
      EXPECT_NEAR(*te, std::abs(x0), 1e-9);
    }
  }
}

TEST(BlendField, MatchesClosedSemiflow) {
  const auto times = linspace(0.0, 10.0, 201);
  for (double s : {0.1, 0.5, 0.9}) {
    for (double x0 = -5; x0 <= 5; x0 += 0.5) {
      const auto traj = integrate_at(blend(s), v1(x0), times);
      for (std::size_t k = 0; k < times.size(); ++k)
        EXPECT_NEAR(traj.states[k](0), closed_semiflow_blend(x0, times[k], s), 1e-6)
            << "s=" << s << " x0=" << x0 << " t=" << times[k];
    }
  }
}

TEST(SlidingOnset, OffEquilibriumDiscontinuity) {
  // x' = -sgn(x - 1) slides into x = 1, which is not the equilibrium of the tag.
  auto g = make_field("shifted", 1, [](const Vec& x) { return v1(-sgn(x(0) - 1.0)); },
                      Regularity::Smooth, {1.0});
  g.equilibrium = v1(5.0);
  const auto traj = integrate(g, v1(3.0), 4.0);
  const auto ts = traj.event_time(EventTag::SlidingOnset);
  ASSERT_TRUE(ts.has_value());
  EXPECT_NEAR(*ts, 2.0, 1e-9);
  EXPECT_EQ(traj.final_state()(0), 1.0);
}

TEST(LevelEvent, StopsOnLevelCrossing) {
  const auto traj = integrate_to_level(canonical(2), v2(2, 0),
                                       [](const Vec& x) { return x.norm() - 1.0; }, 10.0);
  const auto th = traj.event_time(EventTag::LevelHit);
  ASSERT_TRUE(th.has_value());
  EXPECT_NEAR(*th, std::log(2.0), 1e-8);
  EXPECT_NEAR(traj.final_state().norm(), 1.0, 1e-8);
}

TEST(LevelEvent, TruncatedWhenUnreached) {
  const auto traj = integrate_to_level(canonical(2), v2(2, 0),
                                       [](const Vec& x) { return x.norm() - 10.0; }, 1.0);
  EXPECT_TRUE(traj.event_time(EventTag::Truncated).has_value());
}

TEST(ExtendedFlow, FrozenParameterAndEquilibrium) {
  HomotopyPath path;
  path.dim = 2;
  path.field_at = [](double s) {
    return make_field("blend2", 2, [s](const Vec& x) {
      return Vec((1 - s) * v2(-x(0) + x(0) * x(1), -x(1)) - s * x);
    });
  };
  const Vec a = extended_flow(path, 0.0, v2(1, 1), 1.0).final_state();
  const Vec b = flow(polynomial_x1(), v2(1, 1), 1.0);
  EXPECT_LE((a - b).norm(), 1e-9);
  EXPECT_EQ(extended_flow(path, 0.4, Vec::Zero(2), 3.0).final_state(), Vec::Zero(2));
}

TEST(Csv, HeaderAndEventColumn) {
  const auto traj = integrate(neg_sign(), v1(1.0), 2.0);
  std::ostringstream out;
  write_csv(traj, out);
  const std::string s = out.str();
  EXPECT_EQ(s.rfind("t,x1,event\n", 0), 0u);
  EXPECT_NE(s.find("Extinction"), std::string::npos);
}
