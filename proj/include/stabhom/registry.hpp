#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "stabhom/core.hpp"
#include "stabhom/integrate.hpp"
#include "stabhom/lyapunov.hpp"
#include "stabhom/path.hpp"

namespace stabhom {

/// Named fields and pairs shared by the registry, the command line tool and the tests.
namespace examples {
[[nodiscard]] FieldDescription canonical(int n);
/// x' = -sgn(x) with a declared discontinuity at 0.
[[nodiscard]] FieldDescription neg_sign();
/// x' = -gamma'(|x|) x/|x| with gamma = sqrt, extinguishing in finite time.
[[nodiscard]] FieldDescription radial_sqrt();
/// (-x1 + x1 x2, -x2).
[[nodiscard]] FieldDescription polynomial_x1();
/// V1 = log(1 + x1^2)/2 + x2^2/2 with W = -<grad V1, X1>/2.
[[nodiscard]] LyapunovPair log_pair();
/// |x|^2/2 with W = |x|^2/2.
[[nodiscard]] LyapunovPair quadratic();
/// V = sqrt|x| with W = |grad V|^2/2.
[[nodiscard]] LyapunovPair sqrt_radial_pair();
}  // namespace examples

struct RunOptions {
  int s_steps = 21;
  int samples = 2048;
  IntegratorConfig cfg;
  std::uint64_t seed = 20240601;
  /// Disturbances for the ISS examples: random_hold, sinusoid or constant.
  std::string disturbance_kind = "random_hold";
  double disturbance_amplitude = 5.0;
  double disturbance_hold = 0.5;
};

/// One certificate of an example run. Negative controls carry expect_pass = false.
struct CheckResult {
  std::string name;
  Certificate cert;
  bool expect_pass = true;
};

struct Artifact {
  std::string filename;
  std::string content;
};

struct Outcome {
  std::vector<CheckResult> checks;
  std::vector<Artifact> artifacts;
  std::vector<std::string> notes;
};

struct Example {
  std::string name;
  std::string summary;
  /// Planar fields that live on the sphere through the stereographic chart.
  bool on_sphere = false;
  /// A negative control is expected to fail its own certificate.
  bool negative_control = false;
  std::function<HomotopyPath()> path;
  std::function<Outcome(const RunOptions&)> run;
  /// Potential P(s, x) drawn instead of the field for graph frames.
  std::function<double(double, double)> potential;
};

[[nodiscard]] const std::vector<Example>& registry();
/// Throws UnknownExample.
[[nodiscard]] const Example& find_example(const std::string& name);

/// Certificate for a list of oracle deviations: pass iff every error is <= tol.
[[nodiscard]] Certificate oracle_certificate(std::string property,
                                             const std::vector<std::pair<double, Vec>>& errors,
                                             double tol);

}  // namespace stabhom
