#include "bmhd/spectral_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bmhd/fft.hpp"
#include "bmhd/reduce.hpp"

namespace bmhd::spectral {
namespace {

constexpr complex kI{0.0, 1.0};

double physical_weight(const GridSpec& g) {
  return std::pow(2.0 * std::numbers::pi, 3) * g.cell_volume();
}

double spectral_scale(const GridSpec& g) {
  return 1.0 / (static_cast<double>(g.size()) * g.cell_volume());
}

void forward_truncated(const GridSpec& g, std::span<const complex> in,
                       std::span<complex> out) {
  FftEngine::for_size(g.n).forward(in, out, spectral_scale(g));
  const auto keep = g.axis_band_mask();
  const int n = g.n;
  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0) {
    for (int i1 = 0; i1 < n; ++i1) {
      const bool k01 = keep[i0] && keep[i1];
      for (int i2 = 0; i2 < n; ++i2, ++idx) {
        if (!(k01 && keep[i2])) out[idx] = 0.0;
      }
    }
  }
}

}  // namespace

PhysicalVectorField to_physical(const SpectralVectorField& s) {
  const auto& g = s.grid();
  PhysicalVectorField p(g);
  const auto& fft = FftEngine::for_size(g.n);
  for (int c = 0; c < 3; ++c) {
    fft.backward(s.component(c), p.component(c), g.cell_volume());
  }
  return p;
}

SpectralVectorField to_spectral(const PhysicalVectorField& p, bool hermitian) {
  const auto& g = p.grid();
  SpectralVectorField s(g, hermitian);
  const auto& fft = FftEngine::for_size(g.n);
  for (int c = 0; c < 3; ++c) {
    fft.forward(p.component(c), s.component(c), spectral_scale(g));
  }
  return s;
}

void leray_project_inplace(SpectralVectorField& s) {
  for_each_mode(s.grid(), [&](std::size_t i, const Vec3& xi) {
    const double k2 = dot(xi, xi);
    if (k2 == 0.0) {
      s.set(i, CVec3{});
      return;
    }
    const CVec3 v = s.at(i);
    const complex d = dot(xi, v) / k2;
    s.set(i, {v[0] - xi[0] * d, v[1] - xi[1] * d, v[2] - xi[2] * d});
  });
}

SpectralVectorField leray_project(const SpectralVectorField& s) {
  SpectralVectorField out = s;
  leray_project_inplace(out);
  return out;
}

SpectralVectorField curl(const SpectralVectorField& s) {
  SpectralVectorField out(s.grid(), s.hermitian());
  for_each_mode(s.grid(), [&](std::size_t i, const Vec3& xi) {
    const CVec3 v = s.at(i);
    const CVec3 ixi{kI * xi[0], kI * xi[1], kI * xi[2]};
    out.set(i, cross(ixi, v));
  });
  return out;
}

SpectralVectorField sqrt_neg_laplacian(const SpectralVectorField& s) {
  SpectralVectorField out(s.grid(), s.hermitian());
  for_each_mode(s.grid(), [&](std::size_t i, const Vec3& xi) {
    const double k = norm(xi);
    const CVec3 v = s.at(i);
    out.set(i, {k * v[0], k * v[1], k * v[2]});
  });
  return out;
}

void heat_multiply_inplace(SpectralVectorField& s, double kappa, double t) {
  if (t < 0.0) throw std::invalid_argument("heat_multiply: negative time");
  if (kappa < 0.0) throw std::invalid_argument("heat_multiply: negative diffusivity");
  if (t == 0.0 || kappa == 0.0) return;
  for_each_mode(s.grid(), [&](std::size_t i, const Vec3& xi) {
    const double f = std::exp(-kappa * dot(xi, xi) * t);
    for (int c = 0; c < 3; ++c) s.component(c)[i] *= f;
  });
}

SpectralVectorField heat_multiply(const SpectralVectorField& s, double kappa, double t) {
  SpectralVectorField out = s;
  heat_multiply_inplace(out, kappa, t);
  return out;
}

void dealias_truncate(SpectralVectorField& s) {
  const auto& g = s.grid();
  const auto keep = g.axis_band_mask();
  const int n = g.n;
  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0) {
    for (int i1 = 0; i1 < n; ++i1) {
      const bool k01 = keep[i0] && keep[i1];
      for (int i2 = 0; i2 < n; ++i2, ++idx) {
        if (!(k01 && keep[i2])) s.set(idx, CVec3{});
      }
    }
  }
}

SpectralVectorField dealias_truncated(SpectralVectorField s) {
  dealias_truncate(s);
  return s;
}

SpectralVectorField dealiased_product(const SpectralVectorField& a,
                                      const SpectralVectorField& b,
                                      BilinearForm form) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument("dealiased_product: grid mismatch");
  }
  const auto& g = a.grid();
  const auto pa = to_physical_truncated(a);
  const auto pb = to_physical_truncated(b);
  const bool herm = a.hermitian() && b.hermitian();

  if (form == BilinearForm::Cross) return to_spectral_truncated(pointwise_cross(pa, pb), herm);

  // Advection: (div T)_i = i xi_j T_ji with T_ji = a_j b_i.
  SpectralVectorField out(g, herm);
  std::vector<complex> work(g.size()), spec(g.size());
  for (int j = 0; j < 3; ++j) {
    const auto aj = pa.component(j);
    for (int comp = 0; comp < 3; ++comp) {
      const auto bi = pb.component(comp);
      for (std::size_t i = 0; i < g.size(); ++i) work[i] = aj[i] * bi[i];
      forward_truncated(g, work, spec);
      auto dst = out.component(comp);
      for_each_mode(g, [&](std::size_t i, const Vec3& xi) {
        dst[i] += kI * xi[j] * spec[i];
      });
    }
  }
  return out;
}

PhysicalVectorField pointwise_cross(const PhysicalVectorField& a, const PhysicalVectorField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("pointwise_cross: grid mismatch");
  PhysicalVectorField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out.set(i, cross(a.at(i), b.at(i)));
  return out;
}

SpectralVectorField to_spectral_truncated(const PhysicalVectorField& p, bool hermitian) {
  const auto& g = p.grid();
  SpectralVectorField s(g, hermitian);
  for (int c = 0; c < 3; ++c) forward_truncated(g, p.component(c), s.component(c));
  return s;
}

SymmetricTensorField::SymmetricTensorField(const GridSpec& g) : grid(g) {
  for (auto& v : c) v.assign(g.size(), complex{});
}

AntisymmetricTensorField::AntisymmetricTensorField(const GridSpec& g) : grid(g) {
  for (auto& v : c) v.assign(g.size(), complex{});
}

namespace {

/// Forward transform of one tensor component, then acc(i, xi, coefficient)
/// for every mode inside the band.
template <class Acc>
void transform_component(const GridSpec& g, const std::vector<complex>& comp, Acc&& acc) {
  const auto& fft = FftEngine::for_size(g.n);
  auto buf = fft.buffer();
  std::copy(comp.begin(), comp.end(), buf.begin());
  fft.execute_forward();
  const double scale = spectral_scale(g);
  const auto keep = g.axis_band_mask();
  const auto k = g.axis_wavenumbers();
  const int n = g.n;
  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0) {
    for (int i1 = 0; i1 < n; ++i1) {
      if (!(keep[i0] && keep[i1])) {
        idx += n;
        continue;
      }
      for (int i2 = 0; i2 < n; ++i2, ++idx) {
        if (keep[i2]) acc(idx, Vec3{k[i0], k[i1], k[i2]}, buf[idx] * scale);
      }
    }
  }
}

}  // namespace

SpectralVectorField divergence(const SymmetricTensorField& t) {
  const auto& g = t.grid;
  SpectralVectorField out(g);
  auto ox = out.component(0), oy = out.component(1), oz = out.component(2);
  // xx yy zz xy xz yz
  transform_component(g, t.c[0], [&](std::size_t i, const Vec3& xi, complex v) {
    ox[i] += kI * (xi[0] * v);
  });
  transform_component(g, t.c[1], [&](std::size_t i, const Vec3& xi, complex v) {
    oy[i] += kI * (xi[1] * v);
  });
  transform_component(g, t.c[2], [&](std::size_t i, const Vec3& xi, complex v) {
    oz[i] += kI * (xi[2] * v);
  });
  transform_component(g, t.c[3], [&](std::size_t i, const Vec3& xi, complex v) {
    ox[i] += kI * (xi[1] * v);
    oy[i] += kI * (xi[0] * v);
  });
  transform_component(g, t.c[4], [&](std::size_t i, const Vec3& xi, complex v) {
    ox[i] += kI * (xi[2] * v);
    oz[i] += kI * (xi[0] * v);
  });
  transform_component(g, t.c[5], [&](std::size_t i, const Vec3& xi, complex v) {
    oy[i] += kI * (xi[2] * v);
    oz[i] += kI * (xi[1] * v);
  });
  return out;
}

SpectralVectorField divergence(const AntisymmetricTensorField& t) {
  const auto& g = t.grid;
  SpectralVectorField out(g);
  auto ox = out.component(0), oy = out.component(1), oz = out.component(2);
  // (div W)_i = i xi_j W_ji; W_yx = -W_xy etc.
  transform_component(g, t.c[0], [&](std::size_t i, const Vec3& xi, complex v) {
    ox[i] -= kI * (xi[1] * v);
    oy[i] += kI * (xi[0] * v);
  });
  transform_component(g, t.c[1], [&](std::size_t i, const Vec3& xi, complex v) {
    ox[i] -= kI * (xi[2] * v);
    oz[i] += kI * (xi[0] * v);
  });
  transform_component(g, t.c[2], [&](std::size_t i, const Vec3& xi, complex v) {
    oy[i] -= kI * (xi[2] * v);
    oz[i] += kI * (xi[1] * v);
  });
  return out;
}

PhysicalVectorField to_physical_truncated(const SpectralVectorField& s) {
  const auto& g = s.grid();
  PhysicalVectorField p(g);
  const auto& fft = FftEngine::for_size(g.n);
  auto buf = fft.buffer();
  const auto keep = g.axis_band_mask();
  const double cell = g.cell_volume();
  const int n = g.n;
  for (int c = 0; c < 3; ++c) {
    const auto src = s.component(c);
    std::size_t idx = 0;
    for (int i0 = 0; i0 < n; ++i0) {
      for (int i1 = 0; i1 < n; ++i1) {
        const bool k01 = keep[i0] && keep[i1];
        for (int i2 = 0; i2 < n; ++i2, ++idx) {
          buf[idx] = k01 && keep[i2] ? src[idx] : complex{};
        }
      }
    }
    fft.execute_backward();
    auto dst = p.component(c);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = buf[i] * cell;
  }
  return p;
}

double divergence_residual(const SpectralVectorField& s) {
  double num = 0.0, den = 0.0;
  for_each_mode(s.grid(), [&](std::size_t i, const Vec3& xi) {
    const CVec3 v = s.at(i);
    num = std::max(num, std::abs(dot(xi, v)));
    den = std::max(den, norm(xi) * modulus(v));
  });
  return den == 0.0 ? 0.0 : num / den;
}

double hermitian_residual(const SpectralVectorField& s) {
  const auto& g = s.grid();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const CVec3 v = s.at(i);
    den = std::max(den, modulus(v));
    const std::size_t j = g.antipode(i);
    if (j == g.size()) continue;
    const CVec3 w = s.at(j);
    const CVec3 d{w[0] - std::conj(v[0]), w[1] - std::conj(v[1]), w[2] - std::conj(v[2])};
    num = std::max(num, modulus(d));
  }
  return den == 0.0 ? 0.0 : num / den;
}

void hermitian_symmetrize(SpectralVectorField& s) {
  const auto& g = s.grid();
  SpectralVectorField out(g, true);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::size_t j = g.antipode(i);
    if (j == g.size()) continue;  // Nyquist plane has no partner
    const CVec3 v = s.at(i), w = s.at(j);
    out.set(i, {0.5 * (v[0] + std::conj(w[0])), 0.5 * (v[1] + std::conj(w[1])),
                0.5 * (v[2] + std::conj(w[2]))});
  }
  s = std::move(out);
}

double max_amplitude(const SpectralVectorField& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) m = std::max(m, modulus(s.at(i)));
  return m;
}

double squared_norm(const SpectralVectorField& s) {
  std::vector<double> terms(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const CVec3 v = s.at(i);
    terms[i] = std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
  }
  return pairwise_sum(terms);
}

double energy(const SpectralVectorField& s) {
  return 0.5 * physical_weight(s.grid()) * squared_norm(s);
}

double gradient_energy(const SpectralVectorField& s) {
  std::vector<double> terms(s.size());
  for_each_mode(s.grid(), [&](std::size_t i, const Vec3& xi) {
    const CVec3 v = s.at(i);
    terms[i] = dot(xi, xi) * (std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]));
  });
  return physical_weight(s.grid()) * pairwise_sum(terms);
}

double real_inner(const SpectralVectorField& a, const SpectralVectorField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("real_inner: grid mismatch");
  std::vector<double> terms(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const CVec3 u = a.at(i), v = b.at(i);
    terms[i] = (std::conj(u[0]) * v[0] + std::conj(u[1]) * v[1] + std::conj(u[2]) * v[2]).real();
  }
  return physical_weight(a.grid()) * pairwise_sum(terms);
}

bool mean_mode_zero(const SpectralVectorField& s) {
  const CVec3 v = s.at(0);
  return v[0] == 0.0 && v[1] == 0.0 && v[2] == 0.0;
}

}  // namespace bmhd::spectral
