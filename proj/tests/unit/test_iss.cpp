#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stabhom/iss.hpp"
#include "stabhom/normalize.hpp"
#include "stabhom/sampling.hpp"

using namespace stabhom;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

}  // namespace

TEST(Signals, EvaluationAndSupNorm) {
  const auto c = constant_signal(v2(3, 4));
  EXPECT_EQ(c(12.0), v2(3, 4));
  EXPECT_DOUBLE_EQ(c.sup_norm, 5.0);
  const auto p = piecewise_signal({0.0, 1.0, 2.5}, {v1(1), v1(-3), v1(2)});
  EXPECT_EQ(p(0.5)(0), 1.0);
  EXPECT_EQ(p(1.0)(0), -3.0);
  EXPECT_EQ(p(9.0)(0), 2.0);
  EXPECT_DOUBLE_EQ(p.sup_norm, 3.0);
  const auto r1 = random_hold_signal(2, 5.0, 0.5, 20.0, 42);
  const auto r2 = random_hold_signal(2, 5.0, 0.5, 20.0, 42);
  EXPECT_EQ(r1.breaks.size(), 40u);
  for (std::size_t k = 0; k < r1.levels.size(); ++k) {
    EXPECT_EQ(r1.levels[k], r2.levels[k]);
    EXPECT_LE(r1.levels[k].norm(), 5.0);
  }
  EXPECT_THROW((void)piecewise_signal({0.5}, {v1(1)}), Error);
}

TEST(Simulate, ClosedForms) {
  const auto sys = canonical_disturbed(1);
  const auto zero = constant_signal(v1(0));
  EXPECT_NEAR(simulate_disturbed(sys, v1(1), zero, 1.0).final_state()(0), std::exp(-1.0), 1e-9);
  const auto sine = sinusoid_signal(v1(1), v1(1), v1(0));
  for (double t : {0.5, 2.0, 7.0}) {
    const double expect = 0.5 * (std::sin(t) - std::cos(t) + std::exp(-t));
    EXPECT_NEAR(simulate_disturbed(sys, v1(0), sine, t).final_state()(0), expect, 1e-7);
  }
}

TEST(Simulate, PiecewiseSegmentsMatchClosedForm) {
  const auto sys = canonical_disturbed(1);
  const auto d = piecewise_signal({0.0, 1.0}, {v1(2.0), v1(-1.0)});
  const double x1 = 2.0 * (1 - std::exp(-1.0));
  const double x3 = -1.0 + (x1 + 1.0) * std::exp(-2.0);
  EXPECT_NEAR(simulate_disturbed(sys, v1(0), d, 3.0).final_state()(0), x3, 1e-9);
  const auto u = simulate_disturbed_uniform(sys, v1(0), d, 3.0, 0.01);
  EXPECT_EQ(u.times.size(), 301u);
  EXPECT_NEAR(u.states[100](0), x1, 1e-9);
  EXPECT_NEAR(u.final_state()(0), x3, 1e-9);
}

TEST(Simulate, Ex41ConstantDisturbanceEquilibrium) {
  const auto x = simulate_disturbed(ex4_1_system(), v2(0, 0), constant_signal(v2(1, 1)), 40.0).final_state();
  EXPECT_LT((x - v2(1, -1)).norm(), 1e-9);
}

TEST(IsesBound, CanonicalPassesUnstableFails) {
  const auto sys = canonical_disturbed(2);
  sampling::SplitMix64 rng(9);
  std::vector<std::pair<Vec, DisturbanceSignal>> batch;
  for (int k = 0; k < 20; ++k)
    batch.emplace_back(v2(rng.uniform(-3, 3), rng.uniform(-3, 3)),
                       random_hold_signal(2, rng.uniform(0, 4), 0.7, 10.0, 100 + k));
  std::vector<double> grid;
  for (int k = 0; k <= 100; ++k) grid.push_back(0.1 * k);
  const ISSBoundSpec spec{2.0, 1.0, classk::power(1.0, 2.0)};
  EXPECT_TRUE(check_ises_bound(sys, spec, batch, grid).pass);

  DisturbedSystem bad = sys;
  bad.name = "x' = x + d";
  bad.f = [](const Vec& x, const Vec& d) -> Vec { return x + d; };
  EXPECT_FALSE(check_ises_bound(bad, spec, batch, grid).pass);
}

TEST(L2Gain, CanonicalAndEx41Pass) {
  const auto sine = sinusoid_signal(v1(1), v1(1), v1(0));
  const auto traj = simulate_disturbed_uniform(canonical_disturbed(1), v1(0), sine, 20.0, 0.01);
  EXPECT_TRUE(check_l2_gain(traj, sine).pass);
  const auto zero = constant_signal(v1(0));
  const auto decay = simulate_disturbed_uniform(canonical_disturbed(1), v1(1), zero, 5.0, 0.01);
  const auto c = check_l2_gain(decay, zero);
  EXPECT_TRUE(c.pass);
  EXPECT_NEAR(c.worst_margin, 0.5 * (1 - std::exp(-10.0)) - 1.0, 1e-3);
  const auto d = random_hold_signal(2, 3.0, 0.5, 20.0, 77);
  EXPECT_TRUE(check_l2_gain(simulate_disturbed_uniform(ex4_1_system(), v2(1, -2), d, 20.0, 0.01), d).pass);
}

TEST(L2Gain, AmplifyingSystemFails) {
  DisturbedSystem amp = canonical_disturbed(1);
  amp.f = [](const Vec& x, const Vec& d) -> Vec { return -x + 3.0 * d; };
  const auto d = constant_signal(v1(1));
  EXPECT_FALSE(check_l2_gain(simulate_disturbed_uniform(amp, v1(0), d, 10.0, 0.01), d).pass);
}

TEST(L2Gain, CoarseSamplingRejected) {
  const auto d = constant_signal(v1(0));
  EXPECT_THROW((void)check_l2_gain(simulate_disturbed_uniform(canonical_disturbed(1), v1(1), d, 1.0, 0.1), d),
               Error);
}

TEST(AlphaTilde, CanonicalSupIsSquare) {
  const auto at = estimate_alpha_tilde(canonical_disturbed(2), classk::power(1.0, 2.0),
                                       {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}, 512);
  for (double r : {0.5, 1.0, 2.0, 4.0}) EXPECT_NEAR(at(r), r * r, 0.02 * r * r);
  EXPECT_EQ(at(0.0), 0.0);
  const auto finer = estimate_alpha_tilde(canonical_disturbed(2), classk::power(1.0, 2.0),
                                          {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}, 1024);
  for (double r : {0.5, 1.0, 2.0, 4.0}) EXPECT_NEAR(finer(r), at(r), 0.05 * at(r));
  EXPECT_TRUE(is_classk_on_grid(at, {0.0, 0.1, 0.3, 1.0, 3.0, 8.0}));
}

TEST(RTransform, RadialGauge) {
  const auto square = classk::power(2.0);
  EXPECT_LT((build_R_transform(square, v2(3, -1)) - v2(3, -1)).norm(), 1e-14);
  EXPECT_EQ(build_R_transform(square, v2(0, 0)).norm(), 0.0);
  EXPECT_LT((build_R_transform(classk::power(4.0), v2(3, 0)) - v2(9, 0)).norm(), 1e-12);
  const Vec z = v2(0.6, 1.3);
  const Vec flipped = build_R_transform(classk::power(3.0), z, true);
  EXPECT_NEAR(flipped.norm(), std::pow(z.norm(), 1.5), 1e-12);
  EXPECT_LT((invert_R_transform(classk::power(3.0), flipped, true) - z).norm(), 1e-9);
}

TEST(Dissipation, CanonicalAndTransformed) {
  const auto sys = canonical_disturbed(2);
  LyapunovPair V;
  V.V = [](const Vec& x) { return x.squaredNorm(); };
  V.gradV = [](const Vec& x) -> Vec { return 2.0 * x; };
  const auto grid = dissipation_grid(2, 2, 5.0, 5.0, 2000);
  const auto supply = [](const Vec& x, const Vec& d) { return -x.squaredNorm() + d.squaredNorm(); };
  EXPECT_TRUE(dissipation_check(sys, V, supply, grid).pass);

  const auto at = estimate_alpha_tilde(sys, classk::power(1.0, 2.0), {0.5, 1.0, 2.0, 4.0, 8.0}, 512);
  const auto hat = transformed_system(sys, at);
  const auto vgrid = dissipation_grid(2, 2, 5.0, hat.d_radius, 2000);
  EXPECT_TRUE(dissipation_check(hat, V, supply, vgrid).pass);

  DisturbedSystem bad = sys;
  bad.f = [](const Vec& x, const Vec& d) -> Vec { return x + d; };
  EXPECT_FALSE(dissipation_check(bad, V, supply, grid).pass);
}

TEST(Ex41, DisturbanceMatrixReversesOrientation) {
  const Mat R = ex4_1_R();
  const VectorMap map = [R](const Vec& d) -> Vec { return R * d; };
  EXPECT_EQ(orientation_sign(map, v2(0.3, 0.8)), -1);
}

TEST(Csv, DisturbedColumns) {
  const auto d = constant_signal(v1(0.5));
  const auto traj = simulate_disturbed_uniform(canonical_disturbed(1), v1(1), d, 0.05, 0.01);
  std::ostringstream os;
  write_disturbed_csv(traj, d, os);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "t,x1,d1");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 7);
}
