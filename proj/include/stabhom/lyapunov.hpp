#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stabhom/core.hpp"
#include "stabhom/integrate.hpp"
#include "stabhom/path.hpp"

namespace stabhom {

struct SliceMargin {
  double s = 0.0;
  double worst_margin = 0.0;
  bool pass = false;
};

/// Verdict of a sampled inequality check. `witnesses` holds failing points, worst first.
struct Certificate {
  std::string property;
  int sample_count = 0;
  double worst_margin = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<Vec> witnesses;
  std::vector<SliceMargin> slices;

  /// `key: value` lines; byte-identical for identical inputs.
  [[nodiscard]] std::string to_report() const;
};

struct Annulus {
  double rmin = 1e-3;
  double rmax = 10.0;
};

/// Huber-type gauge: r^2/2 on [0, 1], r - 1/2 beyond.
[[nodiscard]] double huber(double r);

/// Pair with W = -<grad V, f>/2, i.e. certification reduces to strict decrease.
[[nodiscard]] LyapunovPair half_decrement_pair(std::string label, ScalarMap V, VectorMap gradV,
                                               VectorMap field);

/// m(x) = <grad V(x), f(x)> + W(x) on N quasi-random points of the annulus about the
/// field's equilibrium; pass iff max m <= 0 and W > 0 at every sample.
[[nodiscard]] Certificate check_decrease_grid(const FieldDescription& field,
                                              const LyapunovPair& pair, Annulus annulus, int N);

/// max over hull vertices of <grad V(x), v> <= -W(x); samples at the origin are vacuous.
[[nodiscard]] Certificate check_strong_pair(const FieldDescription& field, const LyapunovPair& pair,
                                            const std::vector<SetValuedSample>& hulls);

/// check_decrease_grid at every s with pair_family(s); slices are reported in grid order.
[[nodiscard]] Certificate check_path(const HomotopyPath& path,
                                     const std::function<LyapunovPair(double)>& pair_family,
                                     const std::vector<double>& s_grid, Annulus annulus, int N,
                                     bool parallel = true);
/// Same, certified by the path's own lyap_at.
[[nodiscard]] Certificate check_path(const HomotopyPath& path, const std::vector<double>& s_grid,
                                     Annulus annulus, int N, bool parallel = true);

/// V(x(t)) nonincreasing within 1e-9 (1 + V(x(0))) and strictly decreasing while
/// |x - eq| exceeds the snap radius.
[[nodiscard]] Certificate check_traj_decrease(const Trajectory& traj, const ScalarMap& V,
                                              const Vec& equilibrium = Vec(),
                                              double snap_radius = 1e-9);

/// Uniform grid {0, 1/(k-1), ..., 1}.
[[nodiscard]] std::vector<double> uniform_grid(int k);

}  // namespace stabhom
