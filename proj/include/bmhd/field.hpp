#pragma once

#include <array>
#include <span>
#include <vector>

#include "bmhd/grid.hpp"

namespace bmhd {

/// Three complex component arrays of grid.size() entries each, in the
/// GridSpec layout. Shared storage for the spectral and physical fields.
class ComponentArrays {
 public:
  ComponentArrays() = default;
  explicit ComponentArrays(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }

  std::span<complex> component(int c) { return comp_[c]; }
  std::span<const complex> component(int c) const { return comp_[c]; }

  CVec3 at(std::size_t i) const { return {comp_[0][i], comp_[1][i], comp_[2][i]}; }
  void set(std::size_t i, const CVec3& v) {
    comp_[0][i] = v[0];
    comp_[1][i] = v[1];
    comp_[2][i] = v[2];
  }

  void fill_zero();
  bool all_finite() const;

 protected:
  void require_same_grid(const ComponentArrays& other) const;
  void add_scaled(const ComponentArrays& other, complex alpha);
  void scale(complex alpha);

  GridSpec grid_;
  std::array<std::vector<complex>, 3> comp_;
};

/// Fourier coefficients of a vector field (density convention, see
/// spectral_ops.hpp). The hermitian flag records whether the coefficients
/// describe a real physical field: v(-xi) = conj(v(xi)).
class SpectralVectorField : public ComponentArrays {
 public:
  SpectralVectorField() = default;
  explicit SpectralVectorField(const GridSpec& grid, bool hermitian = false)
      : ComponentArrays(grid), hermitian_(hermitian) {}

  bool hermitian() const { return hermitian_; }
  void set_hermitian(bool h) { hermitian_ = h; }

  SpectralVectorField& operator+=(const SpectralVectorField& o);
  SpectralVectorField& operator-=(const SpectralVectorField& o);
  SpectralVectorField& operator*=(complex alpha);
  /// this += alpha * o
  SpectralVectorField& axpy(complex alpha, const SpectralVectorField& o);

  friend SpectralVectorField operator+(SpectralVectorField a, const SpectralVectorField& b) {
    return a += b;
  }
  friend SpectralVectorField operator-(SpectralVectorField a, const SpectralVectorField& b) {
    return a -= b;
  }
  friend SpectralVectorField operator*(complex alpha, SpectralVectorField a) {
    return a *= alpha;
  }

 private:
  bool hermitian_ = false;
};

/// Collocation values on the uniform grid x_j = j * box_length / n.
class PhysicalVectorField : public ComponentArrays {
 public:
  PhysicalVectorField() = default;
  explicit PhysicalVectorField(const GridSpec& grid) : ComponentArrays(grid) {}

  PhysicalVectorField& operator+=(const PhysicalVectorField& o);
  /// Largest pointwise modulus of the complex 3-vector.
  double max_modulus() const;
};

}  // namespace bmhd
