#pragma once

#include <array>
#include <vector>

#include "bmhd/field.hpp"

/// Fourier-space operators on periodic vector fields.
///
/// Normalization (density convention): the physical field is
///   v(x) = cell_volume * sum_m v_hat(k0 m) exp(i k0 m . x),
/// the lattice approximation of v(x) = \int v_hat(xi) exp(i xi . x) dxi.
/// With this choice sum |v_hat| * cell_volume is the Wiener (Fourier L1) norm
/// and \int_box |v|^2 dx = (2 pi)^3 * cell_volume * sum |v_hat|^2.
namespace bmhd::spectral {

PhysicalVectorField to_physical(const SpectralVectorField& s);
SpectralVectorField to_spectral(const PhysicalVectorField& p, bool hermitian = false);

/// v_hat -> v_hat - xi (xi . v_hat) / |xi|^2; the mean mode is set to zero.
SpectralVectorField leray_project(const SpectralVectorField& s);
void leray_project_inplace(SpectralVectorField& s);
/// i xi x v_hat
SpectralVectorField curl(const SpectralVectorField& s);
/// |xi| v_hat
SpectralVectorField sqrt_neg_laplacian(const SpectralVectorField& s);
/// exp(-kappa |xi|^2 t) v_hat. Throws for t < 0 or kappa < 0.
SpectralVectorField heat_multiply(const SpectralVectorField& s, double kappa, double t);
void heat_multiply_inplace(SpectralVectorField& s, double kappa, double t);
/// Zero every mode with some |m_i| above the band limit.
void dealias_truncate(SpectralVectorField& s);
SpectralVectorField dealias_truncated(SpectralVectorField s);

enum class BilinearForm {
  Cross,      ///< a x b
  Advection,  ///< div(a (x) b), component i = d_j (a_j b_i); equals (a.grad) b for div-free a
};

/// Pseudo-spectral product with 2/3-rule dealiasing: inputs truncated to the
/// band, pointwise product on the grid, output truncated to the band. For
/// dealias_fraction <= 2/3 the result equals the exact lattice convolution
/// restricted to the band.
SpectralVectorField dealiased_product(const SpectralVectorField& a,
                                      const SpectralVectorField& b,
                                      BilinearForm form);

/// to_physical of the band-truncated field.
PhysicalVectorField to_physical_truncated(const SpectralVectorField& s);

/// Pointwise a x b of two collocated fields.
PhysicalVectorField pointwise_cross(const PhysicalVectorField& a, const PhysicalVectorField& b);
/// Forward transform followed by the dealiasing truncation.
SpectralVectorField to_spectral_truncated(const PhysicalVectorField& p, bool hermitian = false);

/// Symmetric tensor on the grid, components ordered xx, yy, zz, xy, xz, yz.
struct SymmetricTensorField {
  explicit SymmetricTensorField(const GridSpec& grid);
  GridSpec grid;
  std::array<std::vector<complex>, 6> c;
};

/// Antisymmetric tensor W_ji on the grid, stored as W_xy, W_xz, W_yz.
struct AntisymmetricTensorField {
  explicit AntisymmetricTensorField(const GridSpec& grid);
  GridSpec grid;
  std::array<std::vector<complex>, 3> c;
};

/// Dealiased d_j T_ji of a pointwise tensor given in physical space.
SpectralVectorField divergence(const SymmetricTensorField& t);
SpectralVectorField divergence(const AntisymmetricTensorField& t);

/// max_xi |xi . v_hat| / max_xi |xi| |v_hat| (0 for the zero field).
double divergence_residual(const SpectralVectorField& s);
/// max_xi |v_hat(-xi) - conj(v_hat(xi))| / max |v_hat| over representable pairs.
double hermitian_residual(const SpectralVectorField& s);
/// Replace v_hat by (v_hat(xi) + conj(v_hat(-xi))) / 2 and mark hermitian.
void hermitian_symmetrize(SpectralVectorField& s);

double max_amplitude(const SpectralVectorField& s);
/// Sum of |v_hat|^2 over modes (pairwise order), without volume weights.
double squared_norm(const SpectralVectorField& s);
/// 0.5 * \int_box |v|^2 dx
double energy(const SpectralVectorField& s);
/// \int_box |grad v|^2 dx
double gradient_energy(const SpectralVectorField& s);
/// Re sum conj(a) . b * (2 pi)^3 cell, the physical L2 pairing.
double real_inner(const SpectralVectorField& a, const SpectralVectorField& b);
/// True if the xi = 0 coefficient is exactly zero.
bool mean_mode_zero(const SpectralVectorField& s);

}  // namespace bmhd::spectral
