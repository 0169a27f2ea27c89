#pragma once

#include <string>

#include "stabhom/core.hpp"

namespace stabhom {

struct LinearSystem {
  Mat A;
};

struct HurwitzResult {
  double max_real_part = 0.0;
  bool is_hurwitz = false;
};

/// Spectral abscissa via a real Schur/QR eigen-decomposition.
[[nodiscard]] HurwitzResult hurwitz_check(const LinearSystem& sys);

/// P solving A^T P + P A = -Q through the Kronecker-vectorized linear system.
[[nodiscard]] Mat lyapunov_equation(const LinearSystem& sys, const Mat& Q);

/// x -> A x.
[[nodiscard]] FieldDescription linear_field(const Mat& A, std::string name = "linear");

/// Degree of field/|field| along the circle of the given radius about the origin (n = 2).
/// The sample count doubles from `samples` until two consecutive counts agree.
[[nodiscard]] int winding_number(const FieldDescription& field, double radius, int samples = 256);

}  // namespace stabhom
