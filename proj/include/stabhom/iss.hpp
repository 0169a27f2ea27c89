#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "stabhom/core.hpp"
#include "stabhom/integrate.hpp"
#include "stabhom/lyapunov.hpp"

namespace stabhom {

using DisturbedRhs = std::function<Vec(const Vec& x, const Vec& d)>;

/// x' = f(x, d) with d taking values in the ball of radius d_radius in R^m.
struct DisturbedSystem {
  std::string name;
  int dim = 1;
  int d_dim = 1;
  double d_radius = 1.0;
  DisturbedRhs f;
};

enum class SignalKind { Constant, Sinusoid, PiecewiseConstant, SeededRandomHold };

/// Disturbance d(t). Piecewise signals expose their switching times as `breaks`.
struct DisturbanceSignal {
  SignalKind kind = SignalKind::Constant;
  int d_dim = 1;
  Vec value;                       // Constant
  Vec amplitude, omega, phase;     // Sinusoid: amplitude_i sin(omega_i t + phase_i)
  std::vector<double> breaks;      // PiecewiseConstant / SeededRandomHold: segment start times
  std::vector<Vec> levels;         // value on [breaks[k], breaks[k+1])
  double sup_norm = 0.0;

  [[nodiscard]] Vec operator()(double t) const;
};

[[nodiscard]] DisturbanceSignal constant_signal(const Vec& value);
[[nodiscard]] DisturbanceSignal sinusoid_signal(const Vec& amplitude, const Vec& omega,
                                                const Vec& phase);
[[nodiscard]] DisturbanceSignal piecewise_signal(std::vector<double> breaks, std::vector<Vec> levels);
/// Holds uniform draws from the ball of radius sup_bound for `hold` time units on [0, t_end].
[[nodiscard]] DisturbanceSignal random_hold_signal(int d_dim, double sup_bound, double hold,
                                                   double t_end, std::uint64_t seed);

/// ISES proxy: |x(t)| <= max(M e^{-a t} |x0|, alpha(|d|_inf)).
struct ISSBoundSpec {
  double M = 1.0;
  double a = 1.0;
  ClassKFn alpha;
};

/// Trajectory of x' = f(x, d(t)); piecewise-constant signals are integrated segment by segment.
[[nodiscard]] Trajectory simulate_disturbed(const DisturbedSystem& sys, const Vec& x0,
                                            const DisturbanceSignal& d, double t_end,
                                            const IntegratorConfig& cfg = {});

/// Samples on a uniform grid of spacing `dt` (dense output), as needed by check_l2_gain.
[[nodiscard]] Trajectory simulate_disturbed_uniform(const DisturbedSystem& sys, const Vec& x0,
                                                    const DisturbanceSignal& d, double t_end,
                                                    double dt, const IntegratorConfig& cfg = {});

[[nodiscard]] Certificate check_ises_bound(const DisturbedSystem& sys, const ISSBoundSpec& spec,
                                           const std::vector<std::pair<Vec, DisturbanceSignal>>& batch,
                                           const std::vector<double>& t_grid,
                                           const IntegratorConfig& cfg = {});

/// int |x|^2 <= |x0|^2 + int |d|^2 at every prefix time: trapezoid rule on the left,
/// exact disturbance energy on the right. Sampling gaps above 1e-2 are rejected.
[[nodiscard]] Certificate check_l2_gain(const Trajectory& traj, const DisturbanceSignal& d);

/// Monotone envelope of r -> sup { 2<f(xi, u), xi> + |xi|^2 : |xi| <= alpha(r), |u| <= r }.
[[nodiscard]] ClassKFn estimate_alpha_tilde(const DisturbedSystem& sys, const ClassKFn& alpha,
                                            const std::vector<double>& r_grid, int search_samples);

/// R(z) = alpha_tilde(|z|)^{1/2} z/|z|, R(0) = 0, last coordinate reflected when flip is set.
[[nodiscard]] Vec build_R_transform(const ClassKFn& alpha_tilde, const Vec& z, bool flip = false);
/// Inverse of build_R_transform.
[[nodiscard]] Vec invert_R_transform(const ClassKFn& alpha_tilde, const Vec& v, bool flip = false);

/// <grad V(x), f(x, d)> <= supply(x, d) on the given (x, d) samples.
[[nodiscard]] Certificate dissipation_check(const DisturbedSystem& sys, const LyapunovPair& V,
                                            const std::function<double(const Vec&, const Vec&)>& supply,
                                            const std::vector<std::pair<Vec, Vec>>& grid);

/// Quasi-random (x, d) pairs with |x| <= x_radius, |d| <= d_radius.
[[nodiscard]] std::vector<std::pair<Vec, Vec>> dissipation_grid(int dim, int d_dim, double x_radius,
                                                                double d_radius, int count);

/// f^(x, v) = f(x, R^{-1}(v)) with R built from 2 * alpha_tilde (safety factor).
[[nodiscard]] DisturbedSystem transformed_system(const DisturbedSystem& sys, const ClassKFn& alpha_tilde,
                                                 bool flip = false);

/// x' = -x + d on R^n.
[[nodiscard]] DisturbedSystem canonical_disturbed(int n);
/// x' = -x + R d with R = diag(1, -1).
[[nodiscard]] DisturbedSystem ex4_1_system();
[[nodiscard]] Mat ex4_1_R();

/// CSV `t,x1..xn,d1..dm`.
void write_disturbed_csv(const Trajectory& traj, const DisturbanceSignal& d, std::ostream& out);

}  // namespace stabhom
