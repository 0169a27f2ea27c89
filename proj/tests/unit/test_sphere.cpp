#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "stabhom/sampling.hpp"
#include "stabhom/sphere.hpp"

using namespace stabhom;

namespace {

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

Vec v3(double a, double b, double c) {
  Vec x(3);
  x << a, b, c;
  return x;
}

}  // namespace

TEST(Stereo, PolesAndEquator) {
  EXPECT_EQ(stereo_fwd(south_pole()), v2(0, 0));
  EXPECT_LT((stereo_fwd(v3(1, 0, 0)) - v2(1, 0)).norm(), 1e-15);
  EXPECT_LT((stereo_inv(v2(0, 0)) - south_pole()).norm(), 1e-15);
  try {
    (void)stereo_fwd(north_pole());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AtProjectionPole);
  }
}

TEST(Stereo, RoundTrip) {
  sampling::SplitMix64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const Vec x = v2(rng.uniform(-5, 5), rng.uniform(-5, 5));
    EXPECT_NEAR(stereo_inv(x).norm(), 1.0, 1e-15);
    EXPECT_LT((stereo_fwd(stereo_inv(x)) - x).norm(), 1e-12 * (1 + x.norm()));
  }
}

TEST(Stereo, JacobianMatchesDifferences) {
  const Vec x = v2(0.7, -1.3);
  const Mat J = stereo_inv_jacobian(x);
  for (int j = 0; j < 2; ++j) {
    const Vec e = Vec::Unit(2, j) * 1e-6;
    EXPECT_LT((J.col(j) - (stereo_inv(x + e) - stereo_inv(x - e)) / 2e-6).norm(), 1e-8);
  }
}

TEST(Pushforward, TangentAndEquilibrium) {
  const auto X = sphere_example_X();
  const auto Y = sphere_example_Y();
  EXPECT_EQ(pushforward(X, south_pole()).norm(), 0.0);
  for (const Vec& x : sampling::annulus(2, 200, 1e-2, 50.0)) {
    const Vec p = stereo_inv(x);
    EXPECT_LE(std::abs(pushforward(X, p).dot(p)), 1e-9);
    EXPECT_LE(std::abs(pushforward(Y, p).dot(p)), 1e-9);
  }
}

TEST(SphereFlow, ChartConjugacy) {
  std::vector<double> times;
  for (int k = 1; k <= 10; ++k) times.push_back(0.5 * k);
  for (const auto& f : {sphere_example_X(), sphere_example_Y()}) {
    const Vec x0 = v2(1.2, -0.4);
    const auto on_sphere = simulate_on_sphere_at(f, stereo_inv(x0), times);
    const auto in_plane = integrate_at(f, x0, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      EXPECT_NEAR(on_sphere.states[i].norm(), 1.0, 1e-12);
      EXPECT_LT((stereo_fwd(on_sphere.states[i]) - in_plane.states[i]).norm(), 1e-5);
    }
  }
}

TEST(SphereFlow, YConvergesToSouthPole) {
  const auto traj = simulate_on_sphere(sphere_example_Y(), v3(1, 0, 0), 20.0);
  EXPECT_LT((traj.final_state() - south_pole()).norm(), 1e-3);
  const auto rest = simulate_on_sphere(sphere_example_Y(), south_pole(), 5.0);
  EXPECT_EQ(rest.final_state(), south_pole());
}

TEST(SphereFlow, ChartLyapunovDecreases) {
  for (const auto& f : {sphere_example_X(), sphere_example_Y()}) {
    const auto traj = simulate_on_sphere(f, v3(0, 0.6, 0.8), 10.0);
    const auto c = check_traj_decrease(traj, [](const Vec& p) { return 0.5 * stereo_fwd(p).squaredNorm(); },
                                       south_pole());
    EXPECT_TRUE(c.pass) << c.to_report();
  }
}

TEST(SphereFlow, NearPoleAborts) {
  const auto source = make_field("x", 2, [](const Vec& x) -> Vec { return x; });
  try {
    (void)simulate_on_sphere(source, stereo_inv(v2(1, 0)), 30.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NearProjectionPole);
  }
}

TEST(SpherePath, ChartCertificate) {
  const auto path = sphere_chart_path();
  const Vec x = v2(0.3, 0.4);
  EXPECT_LT((path.field_at(0.0).evaluator(x) - sphere_example_X().evaluator(x)).norm(), 1e-15);
  EXPECT_LT((path.field_at(0.5).evaluator(x) + x).norm(), 1e-15);
  EXPECT_LT((path.field_at(1.0).evaluator(x) - sphere_example_Y().evaluator(x)).norm(), 1e-15);
  const auto c = check_sphere_path(path, uniform_grid(11), {1e-2, 10.0}, 256);
  EXPECT_TRUE(c.pass) << c.to_report();
}

TEST(SphereCsv, Header) {
  const auto traj = simulate_on_sphere(sphere_example_Y(), v3(1, 0, 0), 0.3);
  std::ostringstream os;
  write_sphere_csv(traj, os);
  EXPECT_EQ(os.str().substr(0, 11), "t,p1,p2,p3\n");
}
