#pragma once

#include <cstdint>
#include <vector>

#include "stabhom/core.hpp"

namespace stabhom::sampling {

/// Van der Corput radical inverse of `index` in `base`.
[[nodiscard]] double radical_inverse(unsigned base, std::uint64_t index);

/// Point `index` of the Halton sequence in `dim` dimensions (dim <= 32).
[[nodiscard]] std::vector<double> halton(int dim, std::uint64_t index);

/// N deterministic low-discrepancy points with rmin <= |x| <= rmax. Radii are
/// log-uniform so the inner edge of the annulus is sampled as densely as the
/// outer edge. The first N points of a 2N request coincide with an N request.
[[nodiscard]] std::vector<Vec> annulus(int dim, int count, double rmin, double rmax);

/// N deterministic points of the closed ball of the given radius (volume uniform).
[[nodiscard]] std::vector<Vec> ball(int dim, int count, double radius, std::uint64_t offset = 1);

/// Deterministic unit directions (evenly spaced angles for dim 2, +-1 for dim 1).
[[nodiscard]] std::vector<Vec> directions(int dim, int count);

/// Seeded 64-bit generator producing reproducible doubles in [0, 1) on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

}  // namespace stabhom::sampling
