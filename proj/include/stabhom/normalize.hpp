#pragma once

#include <iosfwd>
#include <optional>

#include "stabhom/core.hpp"
#include "stabhom/integrate.hpp"

namespace stabhom {

/// Data of the normalizing homeomorphism T(x) = gamma^{-1}(V(x)) Q(x), where Q sends x
/// along the flow of grad V/|grad V|^2 onto the level set V = c and then radially onto
/// the unit sphere (optionally reflecting the last coordinate).
struct NormalizerData {
  LyapunovPair pair;
  int dim = 1;
  double c = 1.0;
  ClassKFn gamma = classk::sqrt_gauge();
  bool orientation_flip = false;
  /// Fraction of the exact decrement |grad V|^2 certified by the transported pairs.
  double decrease_fraction = 0.5;
  /// Largest radius searched when locating the level set along a ray.
  double r_max = 1e4;
  IntegratorConfig cfg = {1e-12, 1e-14, 0.1, 1e-9};
};

/// Validates the level set (star-shaped about 0 along 256 rays) and, unless
/// `orientation_flip` is given, composes the reflection exactly when T would reverse
/// orientation.
[[nodiscard]] NormalizerData make_normalizer(LyapunovPair pair, int dim, double c = 1.0,
                                             ClassKFn gamma = classk::sqrt_gauge(),
                                             std::optional<bool> orientation_flip = std::nullopt);

/// Throws StarShapeViolated unless r -> V(r u) crosses c exactly once on (0, r_max].
void check_star_shaped(const NormalizerData& nd, int directions = 256);

/// psi(tau, x) for x' = grad V/|grad V|^2, so that V(psi(tau, x)) = V(x) + tau.
[[nodiscard]] Vec psi_flow(const LyapunovPair& pair, const Vec& x, double tau,
                           const IntegratorConfig& cfg = {1e-12, 1e-14, 0.1, 1e-9});

/// pi_c(x) = psi(c - V(x), x), polished by one Newton step along grad V.
[[nodiscard]] Vec project_to_level(const NormalizerData& nd, const Vec& x);

/// The point r u on V^{-1}(c) (radial bisection).
[[nodiscard]] Vec level_point(const NormalizerData& nd, const Vec& u);

/// Q(x) = pi_c(x)/|pi_c(x)|, reflected in the last coordinate when orientation_flip is set.
[[nodiscard]] Vec sphere_map(const NormalizerData& nd, const Vec& x);

[[nodiscard]] Vec build_T(const NormalizerData& nd, const Vec& x);
[[nodiscard]] Vec invert_T(const NormalizerData& nd, const Vec& y);

/// Sign of the determinant of the central-difference Jacobian of `map` at x.
[[nodiscard]] int orientation_sign(const VectorMap& map, const Vec& x);

/// F(y) = -DT(T^{-1} y) grad V(T^{-1} y), with DT applied by a central difference along grad V.
[[nodiscard]] Vec conjugated_field(const NormalizerData& nd, const Vec& y);
[[nodiscard]] FieldDescription conjugated_field_description(const NormalizerData& nd);

/// Exact decrement of V along -grad V, transported: |grad V(T^{-1} y)|^2.
[[nodiscard]] double transported_decrement(const NormalizerData& nd, const Vec& y);

/// (V_gamma(y) = gamma(|y|), W = decrease_fraction * transported decrement).
[[nodiscard]] LyapunovPair gamma_pair(const NormalizerData& nd);

/// (V_q = |y|^2/2, W_q = a(y) W with a(y) = |y|/gamma'(|y|)).
[[nodiscard]] LyapunovPair canonical_pair(const NormalizerData& nd);

/// CSV `x1,...,xn,T1,...,Tn` on a uniform grid of [-extent, extent]^n (n <= 2).
void write_warp_grid(const NormalizerData& nd, double extent, int per_axis, std::ostream& out);

}  // namespace stabhom
