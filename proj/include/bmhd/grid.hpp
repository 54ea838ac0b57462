#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

namespace bmhd {

using complex = std::complex<double>;
using Vec3 = std::array<double, 3>;
using CVec3 = std::array<complex, 3>;

/// Periodic cubic box of period 2*pi/k0 per axis, sampled with n points.
///
/// Lattice wavevectors are xi = k0 * m for integer triples m in [-n/2, n/2)^3.
/// Lattice sums weighted by cell_volume() = k0^3 stand in for integrals over
/// R^3 in Fourier space.
///
/// Mode layout (fixed, also used by the snapshot format): index i in [0, n)
/// along an axis maps to m = i for i < n/2 and m = i - n otherwise. The flat
/// index is (i0 * n + i1) * n + i2, so the last axis is contiguous.
struct GridSpec {
  int n = 32;
  double k0 = 1.0;
  double dealias_fraction = 2.0 / 3.0;

  /// Throws std::invalid_argument on n < 8, n not a power of two, k0 <= 0 or
  /// dealias_fraction outside (0, 1].
  void validate() const;

  std::size_t size() const {
    return static_cast<std::size_t>(n) * n * n;
  }
  double cell_volume() const { return k0 * k0 * k0; }
  double box_length() const { return 2.0 * std::numbers::pi / k0; }
  double spacing() const { return box_length() / n; }

  /// Largest |m_i| kept by the dealiasing truncation.
  int band_limit() const;
  /// Resolved band k0*n/2 exceeds 3*(1+delta): quadratic interactions of a
  /// shell of half-width delta fit inside the dealiased band.
  bool resolves_shell_interactions(double delta) const;

  int mode_of_index(int i) const { return i < n / 2 ? i : i - n; }
  int index_of_mode(int m) const { return m >= 0 ? m : m + n; }
  std::size_t flat(int i0, int i1, int i2) const {
    return (static_cast<std::size_t>(i0) * n + i1) * n + i2;
  }
  /// Flat index of the integer mode m; m must be representable.
  std::size_t flat_of_mode(const std::array<int, 3>& m) const;
  std::array<int, 3> mode(std::size_t flat) const;
  Vec3 wavevector(std::size_t flat) const;
  bool in_band(std::size_t flat) const;
  /// Flat index of -m, or size() when -m is not representable (m_i = -n/2).
  std::size_t antipode(std::size_t flat) const;

  /// k0 * mode_of_index(i) for i in [0, n).
  std::vector<double> axis_wavenumbers() const;
  std::vector<std::uint8_t> axis_band_mask() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Calls fn(flat_index, xi) for every lattice mode in layout order.
template <class Fn>
void for_each_mode(const GridSpec& grid, Fn&& fn) {
  const auto k = grid.axis_wavenumbers();
  const int n = grid.n;
  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0) {
    for (int i1 = 0; i1 < n; ++i1) {
      for (int i2 = 0; i2 < n; ++i2, ++idx) {
        fn(idx, Vec3{k[i0], k[i1], k[i2]});
      }
    }
  }
}

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}
inline CVec3 cross(const CVec3& a, const CVec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}
inline complex dot(const Vec3& a, const CVec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double modulus(const CVec3& a) {
  return std::sqrt(std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]));
}

}  // namespace bmhd
