#include "bmhd/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bmhd {

ComponentArrays::ComponentArrays(const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  for (auto& c : comp_) c.assign(grid_.size(), complex{});
}

void ComponentArrays::fill_zero() {
  for (auto& c : comp_) std::fill(c.begin(), c.end(), complex{});
}

bool ComponentArrays::all_finite() const {
  for (const auto& c : comp_) {
    for (const auto& v : c) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
  }
  return true;
}

void ComponentArrays::require_same_grid(const ComponentArrays& other) const {
  if (!(grid_ == other.grid_)) {
    throw std::invalid_argument("field grid mismatch");
  }
}

void ComponentArrays::add_scaled(const ComponentArrays& other, complex alpha) {
  require_same_grid(other);
  for (int c = 0; c < 3; ++c) {
    auto& dst = comp_[c];
    const auto& src = other.comp_[c];
    if (alpha.imag() == 0.0) {
      const double a = alpha.real();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
    } else {
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += alpha * src[i];
    }
  }
}

void ComponentArrays::scale(complex alpha) {
  if (alpha.imag() == 0.0) {
    const double a = alpha.real();
    for (auto& c : comp_) {
      for (auto& v : c) v *= a;
    }
    return;
  }
  for (auto& c : comp_) {
    for (auto& v : c) v *= alpha;
  }
}

SpectralVectorField& SpectralVectorField::operator+=(const SpectralVectorField& o) {
  add_scaled(o, 1.0);
  hermitian_ = hermitian_ && o.hermitian_;
  return *this;
}

SpectralVectorField& SpectralVectorField::operator-=(const SpectralVectorField& o) {
  add_scaled(o, -1.0);
  hermitian_ = hermitian_ && o.hermitian_;
  return *this;
}

SpectralVectorField& SpectralVectorField::operator*=(complex alpha) {
  scale(alpha);
  if (alpha.imag() != 0.0) hermitian_ = false;
  return *this;
}

SpectralVectorField& SpectralVectorField::axpy(complex alpha, const SpectralVectorField& o) {
  add_scaled(o, alpha);
  hermitian_ = hermitian_ && o.hermitian_ && alpha.imag() == 0.0;
  return *this;
}

PhysicalVectorField& PhysicalVectorField::operator+=(const PhysicalVectorField& o) {
  add_scaled(o, 1.0);
  return *this;
}

double PhysicalVectorField::max_modulus() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m = std::max(m, modulus(at(i)));
  return m;
}

}  // namespace bmhd
