#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "stabhom/core.hpp"
#include "stabhom/path.hpp"

namespace stabhom {

enum class EventTag { SlidingOnset, Extinction, LevelHit, Truncated };

[[nodiscard]] const char* to_string(EventTag tag);

struct TrajectoryEvent {
  double time = 0.0;
  EventTag tag = EventTag::Truncated;
};

/// Time-stamped states. After an Extinction event every state equals the
/// equilibrium exactly.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<TrajectoryEvent> events;

  [[nodiscard]] const Vec& final_state() const { return states.back(); }
  [[nodiscard]] double final_time() const { return times.back(); }
  [[nodiscard]] std::optional<double> event_time(EventTag tag) const;
};

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = 0.1;
  double snap_radius = 1e-9;

  /// Throws InvalidArgument unless all fields are positive and snap_radius < 1e-3.
  void validate() const;
};

/// Right-hand side of a possibly time-dependent ODE.
using TimeRhs = std::function<Vec(double, const Vec&)>;

/// Behaviour switches for the low-level solver.
struct SolverHooks {
  /// Snap to `equilibrium` once inside the snap radius with an inward-pointing field.
  bool snap = false;
  Vec equilibrium;
  VectorMap autonomous_field;

  /// 1-D only: declared discontinuity points and whether the Filippov hull there
  /// contains 0 (the solution stops on arrival).
  std::vector<double> discontinuities;
  std::vector<bool> attracting;

  /// Applied to every accepted state (e.g. renormalization onto a sphere).
  std::function<void(Vec&)> project;
  /// Called on every accepted state; may throw to abort.
  std::function<void(double, const Vec&)> guard;

  /// Terminal event at the first sign change of level(x).
  ScalarMap level;

  /// When non-empty the trajectory holds exactly these (strictly increasing) times.
  std::vector<double> output_times;
};

/// Embedded Dormand-Prince 5(4) with 4th-order dense output.
[[nodiscard]] Trajectory solve_ode(const TimeRhs& rhs, const Vec& x0, double t0, double t_end,
                                   const IntegratorConfig& cfg, const SolverHooks& hooks = {});

/// Trajectory of the field from x0 over [0, t_end], one sample per accepted step.
[[nodiscard]] Trajectory integrate(const FieldDescription& field, const Vec& x0, double t_end,
                                   const IntegratorConfig& cfg = {});

/// States at the requested (strictly increasing, nonnegative) times via dense output.
[[nodiscard]] Trajectory integrate_at(const FieldDescription& field, const Vec& x0,
                                      const std::vector<double>& times,
                                      const IntegratorConfig& cfg = {});

/// Time-t map.
[[nodiscard]] Vec flow(const FieldDescription& field, const Vec& x0, double t,
                       const IntegratorConfig& cfg = {});

/// Integrates until level(x) changes sign (LevelHit) or t_max (Truncated).
[[nodiscard]] Trajectory integrate_to_level(const FieldDescription& field, const Vec& x0,
                                            const ScalarMap& level, double t_max,
                                            const IntegratorConfig& cfg = {});

/// Exact semiflow of x' = -sgn(x).
[[nodiscard]] double closed_semiflow_sign(double x, double t);

/// Exact semiflow of x' = (1-s)(-sgn x) + s(-x); s = 0 gives the sign semiflow.
[[nodiscard]] double closed_semiflow_blend(double x, double t, double s);

/// Exact semiflow of x' = -grad gamma(|x|): radius Gamma^{-1}(Gamma(|x|) - t), 0 after extinction.
[[nodiscard]] Vec closed_semiflow_radial(const Vec& x, double t, const ClassKFn& gamma,
                                         int quad_steps = 256);

/// Frozen-s flow of the extended system (s' = 0, x' = H(s, x)); returns the x block.
[[nodiscard]] Trajectory extended_flow(const HomotopyPath& path, double s, const Vec& x0, double t,
                                       const IntegratorConfig& cfg = {});

/// CSV with header `t,x1,...,xn,event`.
void write_csv(const Trajectory& traj, std::ostream& out);

}  // namespace stabhom
