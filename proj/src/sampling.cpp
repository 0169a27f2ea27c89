#include "stabhom/sampling.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace stabhom::sampling {

namespace {

constexpr std::array<unsigned, 32> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                                              37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
                                              83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

// Unit direction from the first `dim` coordinates of a Halton point. Returns false
// when the cube point is too close to the centre to normalize reliably.
bool direction_from(const std::vector<double>& u, int dim, Vec& out) {
  out.resize(dim);
  if (dim == 1) {
    out(0) = u[0] < 0.5 ? -1.0 : 1.0;
    return true;
  }
  if (dim == 2) {
    const double theta = 2.0 * std::numbers::pi * u[0];
    out << std::cos(theta), std::sin(theta);
    return true;
  }
  for (int i = 0; i < dim; ++i) out(i) = 2.0 * u[i] - 1.0;
  const double n = out.norm();
  if (n < 1e-3 || n > 1.0) return false;  // rejection keeps the direction law isotropic
  out /= n;
  return true;
}

}  // namespace

double radical_inverse(unsigned base, std::uint64_t index) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

std::vector<double> halton(int dim, std::uint64_t index) {
  std::vector<double> u(dim);
  for (int i = 0; i < dim; ++i) u[i] = radical_inverse(kPrimes.at(i), index);
  return u;
}

std::vector<Vec> annulus(int dim, int count, double rmin, double rmax) {
  if (dim < 1 || dim > 31) throw Error(ErrorKind::DimensionMismatch, "annulus sampling dimension");
  if (!(rmin > 0.0) || !(rmax >= rmin))
    throw Error(ErrorKind::InvalidArgument, "annulus radii must satisfy 0 < rmin <= rmax");
  std::vector<Vec> pts;
  pts.reserve(count);
  const double log_ratio = std::log(rmax / rmin);
  const int radial_coord = dim == 1 ? 1 : (dim == 2 ? 1 : dim);
  Vec dir;
  for (std::uint64_t k = 1; static_cast<int>(pts.size()) < count; ++k) {
    const auto u = halton(radial_coord + 1, k);
    if (!direction_from(u, dim, dir)) continue;
    const double r = rmin * std::exp(log_ratio * u[radial_coord]);
    pts.push_back(r * dir);
  }
  return pts;
}

std::vector<Vec> ball(int dim, int count, double radius, std::uint64_t offset) {
  if (dim < 1 || dim > 31) throw Error(ErrorKind::DimensionMismatch, "ball sampling dimension");
  std::vector<Vec> pts;
  pts.reserve(count);
  const int radial_coord = dim <= 2 ? 1 : dim;
  Vec dir;
  for (std::uint64_t k = offset; static_cast<int>(pts.size()) < count; ++k) {
    const auto u = halton(radial_coord + 1, k);
    if (dim == 1) {
      pts.push_back(Vec::Constant(1, radius * (2.0 * u[0] - 1.0)));
      continue;
    }
    if (!direction_from(u, dim, dir)) continue;
    pts.push_back(radius * std::pow(u[radial_coord], 1.0 / dim) * dir);
  }
  return pts;
}

std::vector<Vec> directions(int dim, int count) {
  std::vector<Vec> dirs;
  if (dim == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
    return dirs;
  }
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double theta = 2.0 * std::numbers::pi * (k + 0.5) / count;
      Vec u(2);
      u << std::cos(theta), std::sin(theta);
      dirs.push_back(u);
    }
    return dirs;
  }
  Vec dir;
  for (std::uint64_t k = 1; static_cast<int>(dirs.size()) < count; ++k) {
    if (direction_from(halton(dim, k), dim, dir)) dirs.push_back(dir);
  }
  return dirs;
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace stabhom::sampling
