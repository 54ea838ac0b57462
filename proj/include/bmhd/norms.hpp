#pragma once

#include "bmhd/field.hpp"

/// Weighted Fourier-L1 norms, all reduced in fixed pairwise order and
/// weighted by the lattice cell volume. The mean mode xi = 0 is excluded.
namespace bmhd::norms {

/// sum_{xi != 0} |s(xi)| / |xi| * cell. Throws std::invalid_argument when the
/// mean mode is nonzero.
double critical_norm(const SpectralVectorField& s);
/// sum |s(xi)| * cell
double wiener_norm(const SpectralVectorField& s);
/// sum |xi| |s(xi)| * cell
double dissipation_norm(const SpectralVectorField& s);
/// sum (1 + 1/|xi|^2) |s(xi)| * cell over xi != 0
double heat_weighted_norm(const SpectralVectorField& s);

}  // namespace bmhd::norms
