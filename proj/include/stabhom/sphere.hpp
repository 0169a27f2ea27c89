#pragma once

#include <iosfwd>

#include "stabhom/core.hpp"
#include "stabhom/integrate.hpp"
#include "stabhom/lyapunov.hpp"
#include "stabhom/path.hpp"

namespace stabhom {

/// Stereographic projection from the North Pole (0, 0, 1) onto the equatorial plane.
[[nodiscard]] Vec stereo_fwd(const Vec& p);
[[nodiscard]] Vec stereo_inv(const Vec& x);
/// 3x2 Jacobian of stereo_inv at x.
[[nodiscard]] Mat stereo_inv_jacobian(const Vec& x);

[[nodiscard]] Vec north_pole();
[[nodiscard]] Vec south_pole();

/// D(stereo_inv)(stereo_fwd(p)) * field(stereo_fwd(p)); tangent to the sphere at p.
[[nodiscard]] Vec pushforward(const FieldDescription& field, const Vec& p);

/// Integrates the pushforward in R^3, renormalizing to the sphere after every accepted step.
/// Throws NearProjectionPole within 1e-6 of the North Pole.
[[nodiscard]] Trajectory simulate_on_sphere(const FieldDescription& field2d, const Vec& p0,
                                            double t_end, const IntegratorConfig& cfg = {});
/// Same, sampled at the given increasing times.
[[nodiscard]] Trajectory simulate_on_sphere_at(const FieldDescription& field2d, const Vec& p0,
                                               const std::vector<double>& times,
                                               const IntegratorConfig& cfg = {});

/// (-0.1 x1 - x2, x1 - 0.1 x2).
[[nodiscard]] FieldDescription sphere_example_X();
/// (-x1 - x1 x2^2, -x2 + x1^2 x2).
[[nodiscard]] FieldDescription sphere_example_Y();

/// Chart homotopy X -> -x -> Y (straight lines certified by |x|^2/2).
[[nodiscard]] HomotopyPath sphere_chart_path();

/// At every s, the chart Lyapunov function |stereo_fwd(p)|^2/2 decreases along the
/// pushed-forward field at sphere points whose chart images fill the annulus:
/// <grad V(x), D(stereo_fwd)(p) v(p)> + W(x) <= 0 with the Jacobian by central differences.
[[nodiscard]] Certificate check_sphere_path(const HomotopyPath& chart_path,
                                            const std::vector<double>& s_grid, Annulus annulus,
                                            int N);

/// CSV `t,p1,p2,p3`.
void write_sphere_csv(const Trajectory& traj, std::ostream& out);

}  // namespace stabhom
