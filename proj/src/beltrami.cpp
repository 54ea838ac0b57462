#include "bmhd/beltrami.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "bmhd/norms.hpp"
#include "bmhd/random.hpp"
#include "bmhd/reduce.hpp"
#include "bmhd/spectral_ops.hpp"

namespace bmhd::beltrami {
namespace {

constexpr double kShellTol = 1e-12;

Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  return {v[0] / n, v[1] / n, v[2] / n};
}

int least_aligned_axis(const Vec3& d) {
  int best = 0;
  for (int c = 1; c < 3; ++c) {
    if (std::abs(d[c]) < std::abs(d[best])) best = c;
  }
  return best;
}

std::size_t count_support(double k0, double delta, const Vec3& axis, double cap_k) {
  const int r = static_cast<int>(std::ceil((1.0 + delta) / k0));
  std::size_t count = 0;
  for (int a = -r; a <= r; ++a) {
    for (int b = -r; b <= r; ++b) {
      for (int c = -r; c <= r; ++c) {
        const Vec3 xi{k0 * a, k0 * b, k0 * c};
        if (in_shell(xi, delta) && in_cap(xi, axis, cap_k)) ++count;
      }
    }
  }
  return count;
}

int next_pow2(double x) {
  int n = 8;
  while (n < x) n *= 2;
  return n;
}

}  // namespace

void BeltramiSpec::validate() const {
  if (!(delta >= 0.0 && delta <= 0.5)) {
    throw std::invalid_argument("beltrami.delta must satisfy 0 <= delta <= 1/2");
  }
  if (!(cap_k > 0.0 && cap_k < 1.0)) {
    throw std::invalid_argument("beltrami.cap_k must satisfy 0 < k < 1 (cone condition xi'.eta' > -k, k < 1)");
  }
  const double a = norm(cap_axis);
  if (!(std::abs(a - 1.0) <= 1e-12)) {
    throw std::invalid_argument("beltrami.cap_axis must be a unit vector");
  }
  if (!(target_M >= 0.0) || !std::isfinite(target_M)) {
    throw std::invalid_argument("beltrami.target_M must be nonnegative and finite");
  }
  if (!std::isfinite(alpha1) || !std::isfinite(alpha2)) {
    throw std::invalid_argument("beltrami.alpha1/alpha2 must be finite");
  }
}

double BeltramiSpec::cap_half_angle() const { return 0.5 * std::acos(-cap_k); }

CVec3 helical_vector(const Vec3& xi, const Vec3& axis) {
  const double k = norm(xi);
  if (k == 0.0) throw std::invalid_argument("helical_vector: xi = 0");
  const Vec3 d{xi[0] / k, xi[1] / k, xi[2] / k};
  Vec3 e1{axis[0] - dot(axis, d) * d[0], axis[1] - dot(axis, d) * d[1],
          axis[2] - dot(axis, d) * d[2]};
  if (norm(e1) < 1e-8 * std::max(1.0, norm(axis))) {
    Vec3 fallback{0.0, 0.0, 0.0};
    fallback[least_aligned_axis(d)] = 1.0;
    e1 = {fallback[0] - dot(fallback, d) * d[0], fallback[1] - dot(fallback, d) * d[1],
          fallback[2] - dot(fallback, d) * d[2]};
  }
  e1 = normalized(e1);
  const double r = dot(e1, d);
  e1 = normalized(Vec3{e1[0] - r * d[0], e1[1] - r * d[1], e1[2] - r * d[2]});
  const Vec3 e2 = cross(d, e1);
  const double s = 1.0 / std::sqrt(2.0);
  return {complex(e1[0], e2[0]) * s, complex(e1[1], e2[1]) * s, complex(e1[2], e2[2]) * s};
}

Vec3 frame_axis(const Vec3& cap_axis) {
  const Vec3 a = normalized(cap_axis);
  Vec3 e{0.0, 0.0, 0.0};
  e[least_aligned_axis(a)] = 1.0;
  return normalized(cross(a, e));
}

bool in_shell(const Vec3& xi, double delta) {
  const double k = norm(xi);
  return k >= (1.0 - delta) * (1.0 - kShellTol) && k <= (1.0 + delta) * (1.0 + kShellTol);
}

bool in_cap(const Vec3& xi, const Vec3& cap_axis, double cap_k) {
  const double k = norm(xi);
  if (k == 0.0) return false;
  const double theta = 0.5 * std::acos(-cap_k);
  return dot(xi, cap_axis) / k >= std::cos(theta) - kShellTol;
}

SpectralVectorField generate_v0(const BeltramiSpec& spec, const GridSpec& grid) {
  spec.validate();
  grid.validate();
  const Vec3 axis = normalized(spec.cap_axis);
  const Vec3 ref = frame_axis(axis);

  std::vector<std::size_t> support;
  bool outside_band = false;
  for_each_mode(grid, [&](std::size_t i, const Vec3& xi) {
    if (in_shell(xi, spec.delta) && in_cap(xi, axis, spec.cap_k)) {
      support.push_back(i);
      if (!grid.in_band(i)) outside_band = true;
    }
  });

  const int needed_n = next_pow2(3.0 * (1.0 + spec.delta) / grid.k0 + 1.0);
  if (support.empty()) {
    double k0 = grid.k0;
    std::size_t found = 0;
    for (int halvings = 0; halvings < 8 && found == 0; ++halvings) {
      k0 *= 0.5;
      found = count_support(k0, spec.delta, axis, spec.cap_k);
    }
    std::ostringstream msg;
    msg << "no lattice mode with 1-delta <= |xi| <= 1+delta inside the cap (delta = "
        << spec.delta << ", k0 = " << grid.k0 << "); minimal refinement: k0 <= " << k0
        << " (" << found << " modes) with n >= "
        << next_pow2(3.0 * (1.0 + spec.delta) / k0 + 1.0);
    throw SupportError(msg.str());
  }
  if (outside_band) {
    std::ostringstream msg;
    msg << "shell modes fall outside the dealiasing band; need n >= " << needed_n
        << " at k0 = " << grid.k0;
    throw SupportError(msg.str());
  }

  const double cell = grid.cell_volume();
  const double copies = spec.hermitian_symmetrized ? 2.0 : 1.0;
  const double amplitude =
      spec.target_M / (copies * static_cast<double>(support.size()) * cell);

  SpectralVectorField v0(grid, spec.hermitian_symmetrized);
  Rng rng(spec.seed);
  for (const std::size_t i : support) {
    const Vec3 xi = grid.wavevector(i);
    const CVec3 h = helical_vector(xi, ref);
    complex c = amplitude;
    if (spec.random_phases) {
      const double phi = 2.0 * std::numbers::pi * rng.uniform();
      c = amplitude * complex(std::cos(phi), std::sin(phi));
    }
    v0.set(i, {c * h[0], c * h[1], c * h[2]});
  }
  if (spec.hermitian_symmetrized) {
    for (const std::size_t i : support) {
      const std::size_t j = grid.antipode(i);
      if (j == grid.size()) continue;
      const CVec3 v = v0.at(i);
      v0.set(j, {std::conj(v[0]), std::conj(v[1]), std::conj(v[2])});
    }
  }
  return v0;
}

PropertyReport verify_properties(const SpectralVectorField& v0, const BeltramiSpec& spec) {
  PropertyReport r;
  const auto& grid = v0.grid();
  const Vec3 axis = normalized(spec.cap_axis);
  double div_num = 0.0, hel_num = 0.0, den = 0.0;
  std::vector<Vec3> directions;
  r.support_ok = true;
  for_each_mode(grid, [&](std::size_t i, const Vec3& xi) {
    const CVec3 v = v0.at(i);
    const double mod = modulus(v);
    if (mod == 0.0) return;
    const double k = norm(xi);
    den = std::max(den, k * mod);
    div_num = std::max(div_num, std::abs(dot(xi, v)));
    const CVec3 ixi{complex(0.0, xi[0]), complex(0.0, xi[1]), complex(0.0, xi[2])};
    const CVec3 c = cross(ixi, v);
    const CVec3 d{c[0] - k * v[0], c[1] - k * v[1], c[2] - k * v[2]};
    hel_num = std::max(hel_num, modulus(d));
    if (k == 0.0 || !in_shell(xi, spec.delta) || !in_cap(xi, axis, spec.cap_k)) {
      r.support_ok = false;
    }
    if (k > 0.0) directions.push_back({xi[0] / k, xi[1] / k, xi[2] / k});
  });
  r.div_residual = den == 0.0 ? 0.0 : div_num / den;
  r.helical_residual = den == 0.0 ? 0.0 : hel_num / den;
  r.support_size = directions.size();
  r.wiener_l1 = norms::wiener_norm(v0);
  r.weighted_bound = norms::heat_weighted_norm(v0);
  for (std::size_t a = 0; a < directions.size(); ++a) {
    for (std::size_t b = a + 1; b < directions.size(); ++b) {
      r.pair_min_dot = std::min(r.pair_min_dot, dot(directions[a], directions[b]));
    }
  }
  return r;
}

InitialData compose_initial_data(const SpectralVectorField& u01,
                                 const SpectralVectorField& h01,
                                 const BeltramiSpec& spec,
                                 const SpectralVectorField& v0) {
  constexpr double kDivTol = 1e-10;
  if (spectral::divergence_residual(u01) > kDivTol) {
    throw std::invalid_argument("u01 is not divergence-free (residual " +
                                std::to_string(spectral::divergence_residual(u01)) + ")");
  }
  if (spectral::divergence_residual(h01) > kDivTol) {
    throw std::invalid_argument("h01 is not divergence-free (residual " +
                                std::to_string(spectral::divergence_residual(h01)) + ")");
  }
  InitialData d;
  d.u0 = u01;
  d.u0.axpy(spec.alpha1, v0);
  d.h0 = h01;
  d.h0.axpy(spec.alpha2, v0);
  d.critical_u01 = norms::critical_norm(u01);
  d.critical_h01 = norms::critical_norm(h01);
  return d;
}

SpectralVectorField random_solenoidal(const GridSpec& grid, double xi_lo, double xi_hi,
                                      double critical_norm_target, std::uint64_t seed) {
  grid.validate();
  if (!(xi_lo > 0.0 && xi_hi >= xi_lo)) {
    throw std::invalid_argument("random_solenoidal: need 0 < xi_lo <= xi_hi");
  }
  if (!(critical_norm_target >= 0.0)) {
    throw std::invalid_argument("random_solenoidal: negative target norm");
  }
  SpectralVectorField s(grid, true);
  if (critical_norm_target == 0.0) return s;

  Rng rng(seed);
  std::size_t count = 0;
  for_each_mode(grid, [&](std::size_t i, const Vec3& xi) {
    const double k = norm(xi);
    if (k < xi_lo || k > xi_hi || !grid.in_band(i)) return;
    CVec3 v;
    for (auto& c : v) c = complex(rng.normal(), rng.normal());
    s.set(i, v);
    ++count;
  });
  if (count == 0) {
    throw std::invalid_argument("random_solenoidal: no lattice mode in the requested band");
  }
  spectral::leray_project_inplace(s);
  spectral::hermitian_symmetrize(s);
  s *= critical_norm_target / norms::critical_norm(s);
  s.set_hermitian(true);
  return s;
}

}  // namespace bmhd::beltrami
