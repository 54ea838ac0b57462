#pragma once

#include <cstdint>
#include <vector>

#include "bmhd/field.hpp"
#include "bmhd/solver.hpp"
#include "bmhd/spectral_ops.hpp"

/// Brute-force reference implementations for tiny grids. Nothing here calls
/// the FFT path or the spectral operators; only the field types are shared.
namespace bmhd::oracle {

struct OracleConfig {
  int n = 8;
  double tolerance = 1e-12;
  /// Throws std::invalid_argument when n > 16.
  void validate() const;
};

/// Exact lattice convolution cell * sum_eta form(a(xi - eta), b(eta)) over
/// the dealiasing band: modes outside the band contribute nothing and no
/// wraparound occurs. Throws for n > 16.
SpectralVectorField direct_convolution(const SpectralVectorField& a, const SpectralVectorField& b,
                                       spectral::BilinearForm form);

/// Primitive-system trajectory computed with direct convolutions and a
/// separately coded integrating-factor RK4 with the same stage structure as
/// the solver. Returns the state after every step, starting with the initial
/// one. Throws for n > 8.
std::vector<solver::StateSnapshot> tiny_trajectory(const solver::StateSnapshot& initial,
                                                   const solver::PhysicsParams& params, double dt,
                                                   double T);

/// sum_{xi != 0} |s| / |xi| cell, accumulated naively in layout order.
double dense_norm_quadrature(const SpectralVectorField& s);

/// Random complex field supported on the dealiasing band, optionally projected
/// onto divergence-free fields (projection coded locally).
SpectralVectorField random_band_field(const GridSpec& grid, std::uint64_t seed, bool solenoidal);

/// Largest |a - b| over modes divided by the largest |b| (0 when both vanish).
double max_relative_deviation(const SpectralVectorField& a, const SpectralVectorField& b);

}  // namespace bmhd::oracle
