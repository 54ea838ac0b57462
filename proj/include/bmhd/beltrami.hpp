#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "bmhd/field.hpp"

namespace bmhd::beltrami {

/// Parameters of the large helical data v0 and of the split
/// u0 = u01 + alpha1 v0, h0 = h01 + alpha2 v0.
///
/// v0 is supported on the lattice modes of the shell 1-delta <= |xi| <= 1+delta
/// whose direction lies in the cap {d : d.a >= cos(theta_c)} with
/// theta_c = acos(-cap_k) / 2, so any two support directions have dot product
/// at least -cap_k. Each support mode carries amplitude * h+(xi).
struct BeltramiSpec {
  double delta = 0.0;
  double cap_k = 0.5;
  Vec3 cap_axis{0.0, 0.0, 1.0};
  double target_M = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  /// Equal modulus on every support mode; phases are 0 unless randomized.
  bool random_phases = false;
  std::uint64_t seed = 0;
  /// Exploratory: add the conjugate modes at -xi so v0 is real. This breaks
  /// the cap condition and carries no theorem claim.
  bool hermitian_symmetrized = false;

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
  double cap_half_angle() const;
};

/// Result of checking the four structural properties of v0.
struct PropertyReport {
  double div_residual = 0.0;      ///< max |xi.v| / max |xi||v|
  double helical_residual = 0.0;  ///< max |i xi x v - |xi| v| / max |xi||v|
  bool support_ok = false;        ///< every nonzero mode inside shell and cap
  double wiener_l1 = 0.0;         ///< sum |v| cell
  double weighted_bound = 0.0;    ///< sum (1 + 1/|xi|^2) |v| cell
  double pair_min_dot = 1.0;      ///< min over distinct support directions of d.d'
  std::size_t support_size = 0;
};

/// Raised by generate_v0 when the lattice cannot represent the shell.
class SupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// h+(xi) = (e1 + i e2)/sqrt(2) with e1 the normalized projection of axis onto
/// the plane normal to xi and e2 = xi/|xi| x e1, so i xi x h+ = |xi| h+.
/// When axis is (numerically) parallel to xi, the coordinate axis least
/// aligned with xi is used instead. Throws std::invalid_argument for xi = 0.
CVec3 helical_vector(const Vec3& xi, const Vec3& axis);

/// Reference axis for the helical frames of a cap: a unit vector orthogonal
/// to the cap axis, hence outside the cap (and its antipode too), so the
/// frame is smooth over the whole support.
Vec3 frame_axis(const Vec3& cap_axis);

bool in_shell(const Vec3& xi, double delta);
bool in_cap(const Vec3& xi, const Vec3& cap_axis, double cap_k);

SpectralVectorField generate_v0(const BeltramiSpec& spec, const GridSpec& grid);

PropertyReport verify_properties(const SpectralVectorField& v0, const BeltramiSpec& spec);

struct InitialData {
  SpectralVectorField u0;
  SpectralVectorField h0;
  /// Critical norms of u01 and h01; their sum is the left side of the
  /// smallness condition on the perturbation data.
  double critical_u01 = 0.0;
  double critical_h01 = 0.0;
};

/// u0 = u01 + alpha1 v0, h0 = h01 + alpha2 v0. Throws std::invalid_argument
/// naming u01 or h01 when its divergence residual exceeds 1e-10.
InitialData compose_initial_data(const SpectralVectorField& u01,
                                 const SpectralVectorField& h01,
                                 const BeltramiSpec& spec,
                                 const SpectralVectorField& v0);

/// Real (hermitian) random divergence-free field supported on
/// xi_lo <= |xi| <= xi_hi inside the dealiasing band, rescaled to the given
/// critical norm. target 0 gives the zero field.
SpectralVectorField random_solenoidal(const GridSpec& grid, double xi_lo, double xi_hi,
                                      double critical_norm_target, std::uint64_t seed);

}  // namespace bmhd::beltrami
