#include "bmhd/norms.hpp"

#include <stdexcept>
#include <vector>

#include "bmhd/reduce.hpp"
#include "bmhd/spectral_ops.hpp"

namespace bmhd::norms {
namespace {

template <class Weight>
double weighted_l1(const SpectralVectorField& s, Weight&& weight) {
  std::vector<double> terms(s.size(), 0.0);
  for_each_mode(s.grid(), [&](std::size_t i, const Vec3& xi) {
    const double k = norm(xi);
    if (k == 0.0) return;
    terms[i] = weight(k) * modulus(s.at(i));
  });
  return pairwise_sum(terms) * s.grid().cell_volume();
}

}  // namespace

double critical_norm(const SpectralVectorField& s) {
  if (!spectral::mean_mode_zero(s)) {
    throw std::invalid_argument("critical_norm: nonzero mean mode");
  }
  return weighted_l1(s, [](double k) { return 1.0 / k; });
}

double wiener_norm(const SpectralVectorField& s) {
  return weighted_l1(s, [](double) { return 1.0; });
}

double dissipation_norm(const SpectralVectorField& s) {
  return weighted_l1(s, [](double k) { return k; });
}

double heat_weighted_norm(const SpectralVectorField& s) {
  return weighted_l1(s, [](double k) { return 1.0 + 1.0 / (k * k); });
}

}  // namespace bmhd::norms
