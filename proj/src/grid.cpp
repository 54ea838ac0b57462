#include "bmhd/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bmhd {

void GridSpec::validate() const {
  if (n < 8 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("grid.n must be a power of two >= 8, got " +
                                std::to_string(n));
  }
  if (!(k0 > 0.0) || !std::isfinite(k0)) {
    throw std::invalid_argument("grid.k0 must be positive and finite");
  }
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0)) {
    throw std::invalid_argument("grid.dealias_fraction must lie in (0, 1]");
  }
}

int GridSpec::band_limit() const {
  // Small slack so that e.g. fraction 0.5 with n = 8 keeps |m| <= 2 exactly.
  return static_cast<int>(std::floor(dealias_fraction * n / 2.0 + 1e-12));
}

bool GridSpec::resolves_shell_interactions(double delta) const {
  return k0 * n / 2.0 > 3.0 * (1.0 + delta);
}

std::size_t GridSpec::flat_of_mode(const std::array<int, 3>& m) const {
  for (int c = 0; c < 3; ++c) {
    if (m[c] < -n / 2 || m[c] >= n / 2) {
      throw std::out_of_range("mode not representable on this grid");
    }
  }
  return flat(index_of_mode(m[0]), index_of_mode(m[1]), index_of_mode(m[2]));
}

std::array<int, 3> GridSpec::mode(std::size_t f) const {
  const auto un = static_cast<std::size_t>(n);
  const int i2 = static_cast<int>(f % un);
  const int i1 = static_cast<int>((f / un) % un);
  const int i0 = static_cast<int>(f / (un * un));
  return {mode_of_index(i0), mode_of_index(i1), mode_of_index(i2)};
}

Vec3 GridSpec::wavevector(std::size_t f) const {
  const auto m = mode(f);
  return {k0 * m[0], k0 * m[1], k0 * m[2]};
}

bool GridSpec::in_band(std::size_t f) const {
  const auto m = mode(f);
  const int K = band_limit();
  return std::abs(m[0]) <= K && std::abs(m[1]) <= K && std::abs(m[2]) <= K;
}

std::size_t GridSpec::antipode(std::size_t f) const {
  auto m = mode(f);
  for (int c = 0; c < 3; ++c) {
    if (m[c] == -n / 2) return size();
    m[c] = -m[c];
  }
  return flat_of_mode(m);
}

std::vector<double> GridSpec::axis_wavenumbers() const {
  std::vector<double> k(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) k[i] = k0 * mode_of_index(i);
  return k;
}

std::vector<std::uint8_t> GridSpec::axis_band_mask() const {
  std::vector<std::uint8_t> keep(static_cast<std::size_t>(n));
  const int K = band_limit();
  for (int i = 0; i < n; ++i) keep[i] = std::abs(mode_of_index(i)) <= K;
  return keep;
}

}  // namespace bmhd
