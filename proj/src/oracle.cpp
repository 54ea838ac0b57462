#include "bmhd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bmhd/random.hpp"

namespace bmhd::oracle {
namespace {

struct Lattice {
  int n;
  int band;
  double k0;
  double cell;

  explicit Lattice(const GridSpec& g)
      : n(g.n),
        band(static_cast<int>(std::floor(g.dealias_fraction * g.n / 2.0 + 1e-12))),
        k0(g.k0),
        cell(g.k0 * g.k0 * g.k0) {}

  int mode(int i) const { return i < n / 2 ? i : i - n; }
  int index(int m) const { return m >= 0 ? m : m + n; }
  bool kept(int m) const { return m >= -band && m <= band && m >= -n / 2 && m < n / 2; }
  std::size_t flat(int m0, int m1, int m2) const {
    return (static_cast<std::size_t>(index(m0)) * n + index(m1)) * n + index(m2);
  }
};

void require_small(const GridSpec& g, int limit) {
  if (g.n > limit) {
    throw std::invalid_argument("oracle: grid too large for brute force (n = " +
                                std::to_string(g.n) + ", limit " + std::to_string(limit) + ")");
  }
}

void project(SpectralVectorField& s) {
  const Lattice L(s.grid());
  for (int i0 = 0; i0 < L.n; ++i0) {
    for (int i1 = 0; i1 < L.n; ++i1) {
      for (int i2 = 0; i2 < L.n; ++i2) {
        const double x[3] = {L.k0 * L.mode(i0), L.k0 * L.mode(i1), L.k0 * L.mode(i2)};
        const std::size_t f = (static_cast<std::size_t>(i0) * L.n + i1) * L.n + i2;
        const double k2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        CVec3 v = s.at(f);
        if (k2 == 0.0) {
          s.set(f, CVec3{});
          continue;
        }
        const complex d = (x[0] * v[0] + x[1] * v[1] + x[2] * v[2]) / k2;
        for (int c = 0; c < 3; ++c) v[c] -= x[c] * d;
        s.set(f, v);
      }
    }
  }
}

void heat(SpectralVectorField& s, double kappa, double t) {
  const Lattice L(s.grid());
  for (int i0 = 0; i0 < L.n; ++i0) {
    for (int i1 = 0; i1 < L.n; ++i1) {
      for (int i2 = 0; i2 < L.n; ++i2) {
        const double m2 = static_cast<double>(L.mode(i0)) * L.mode(i0) +
                          static_cast<double>(L.mode(i1)) * L.mode(i1) +
                          static_cast<double>(L.mode(i2)) * L.mode(i2);
        const double k2 = L.k0 * L.k0 * m2;
        const std::size_t f = (static_cast<std::size_t>(i0) * L.n + i1) * L.n + i2;
        const double e = std::exp(-kappa * k2 * t);
        CVec3 v = s.at(f);
        for (auto& c : v) c *= e;
        s.set(f, v);
      }
    }
  }
}

struct Pair {
  SpectralVectorField u, h;
};

Pair nonlinear(const SpectralVectorField& u, const SpectralVectorField& h) {
  using spectral::BilinearForm;
  SpectralVectorField nu = direct_convolution(u, u, BilinearForm::Advection);
  const SpectralVectorField hh = direct_convolution(h, h, BilinearForm::Advection);
  SpectralVectorField nh = direct_convolution(u, h, BilinearForm::Advection);
  const SpectralVectorField hu = direct_convolution(h, u, BilinearForm::Advection);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const CVec3 a = nu.at(i), b = hh.at(i), c = nh.at(i), d = hu.at(i);
    nu.set(i, {b[0] - a[0], b[1] - a[1], b[2] - a[2]});
    nh.set(i, {d[0] - c[0], d[1] - c[1], d[2] - c[2]});
  }
  project(nu);
  project(nh);
  return {std::move(nu), std::move(nh)};
}

SpectralVectorField combine(const SpectralVectorField& a, double s, const SpectralVectorField& b) {
  SpectralVectorField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const CVec3 x = a.at(i), y = b.at(i);
    out.set(i, {x[0] + s * y[0], x[1] + s * y[1], x[2] + s * y[2]});
  }
  return out;
}

}  // namespace

void OracleConfig::validate() const {
  if (n > 16) throw std::invalid_argument("oracle: n must not exceed 16");
  if (n < 8) throw std::invalid_argument("oracle: n must be at least 8");
}

SpectralVectorField direct_convolution(const SpectralVectorField& a, const SpectralVectorField& b,
                                       spectral::BilinearForm form) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("direct_convolution: grid mismatch");
  require_small(a.grid(), 16);
  const Lattice L(a.grid());
  SpectralVectorField out(a.grid(), a.hermitian() && b.hermitian());
  const int K = L.band;
  for (int x0 = -K; x0 <= K; ++x0) {
    for (int x1 = -K; x1 <= K; ++x1) {
      for (int x2 = -K; x2 <= K; ++x2) {
        if (!L.kept(x0) || !L.kept(x1) || !L.kept(x2)) continue;
        CVec3 acc{};
        for (int e0 = -K; e0 <= K; ++e0) {
          for (int e1 = -K; e1 <= K; ++e1) {
            for (int e2 = -K; e2 <= K; ++e2) {
              const int d0 = x0 - e0, d1 = x1 - e1, d2 = x2 - e2;
              if (!L.kept(d0) || !L.kept(d1) || !L.kept(d2)) continue;
              if (!L.kept(e0) || !L.kept(e1) || !L.kept(e2)) continue;
              const CVec3 p = a.at(L.flat(d0, d1, d2));
              const CVec3 q = b.at(L.flat(e0, e1, e2));
              if (form == spectral::BilinearForm::Cross) {
                acc[0] += p[1] * q[2] - p[2] * q[1];
                acc[1] += p[2] * q[0] - p[0] * q[2];
                acc[2] += p[0] * q[1] - p[1] * q[0];
              } else {
                const complex s = (double(x0) * p[0] + double(x1) * p[1] + double(x2) * p[2]) * L.k0;
                for (int c = 0; c < 3; ++c) acc[c] += s * q[c];
              }
            }
          }
        }
        const complex scale =
            form == spectral::BilinearForm::Cross ? complex(L.cell, 0.0) : complex(0.0, L.cell);
        out.set(L.flat(x0, x1, x2), {scale * acc[0], scale * acc[1], scale * acc[2]});
      }
    }
  }
  return out;
}

std::vector<solver::StateSnapshot> tiny_trajectory(const solver::StateSnapshot& initial,
                                                   const solver::PhysicsParams& params, double dt,
                                                   double T) {
  require_small(initial.u.grid(), 8);
  if (!(dt > 0.0)) throw std::invalid_argument("tiny_trajectory: dt must be positive");
  params.validate();
  const long long steps = std::llround(T / dt);
  std::vector<solver::StateSnapshot> out;
  out.push_back(initial);
  SpectralVectorField u = initial.u, h = initial.h;
  double t = initial.t;
  const double hs = dt;
  auto E = [&](Pair p, double tau) {
    heat(p.u, params.nu, tau);
    heat(p.h, params.mu, tau);
    return p;
  };
  for (long long k = 0; k < steps; ++k) {
    const Pair k1 = nonlinear(u, h);
    Pair y2 = E({combine(u, 0.5 * hs, k1.u), combine(h, 0.5 * hs, k1.h)}, 0.5 * hs);
    project(y2.u);
    project(y2.h);
    const Pair k2 = nonlinear(y2.u, y2.h);
    const Pair ey = E({u, h}, 0.5 * hs);
    Pair y3{combine(ey.u, 0.5 * hs, k2.u), combine(ey.h, 0.5 * hs, k2.h)};
    project(y3.u);
    project(y3.h);
    const Pair k3 = nonlinear(y3.u, y3.h);
    Pair y4 = E({combine(ey.u, hs, k3.u), combine(ey.h, hs, k3.h)}, 0.5 * hs);
    project(y4.u);
    project(y4.h);
    const Pair k4 = nonlinear(y4.u, y4.h);

    Pair acc = E({combine(u, hs / 6.0, k1.u), combine(h, hs / 6.0, k1.h)}, 0.5 * hs);
    acc.u = combine(combine(acc.u, hs / 3.0, k2.u), hs / 3.0, k3.u);
    acc.h = combine(combine(acc.h, hs / 3.0, k2.h), hs / 3.0, k3.h);
    acc = E(std::move(acc), 0.5 * hs);
    u = combine(acc.u, hs / 6.0, k4.u);
    h = combine(acc.h, hs / 6.0, k4.h);
    project(u);
    project(h);
    t += hs;
    solver::StateSnapshot s{t, u, h};
    s.u.set_hermitian(initial.u.hermitian());
    s.h.set_hermitian(initial.h.hermitian());
    out.push_back(std::move(s));
  }
  return out;
}

double dense_norm_quadrature(const SpectralVectorField& s) {
  const Lattice L(s.grid());
  double sum = 0.0;
  std::size_t f = 0;
  for (int i0 = 0; i0 < L.n; ++i0) {
    for (int i1 = 0; i1 < L.n; ++i1) {
      for (int i2 = 0; i2 < L.n; ++i2, ++f) {
        const double x0 = L.k0 * L.mode(i0), x1 = L.k0 * L.mode(i1), x2 = L.k0 * L.mode(i2);
        const double k = std::sqrt(x0 * x0 + x1 * x1 + x2 * x2);
        if (k == 0.0) continue;
        const CVec3 v = s.at(f);
        sum += std::sqrt(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2])) / k;
      }
    }
  }
  return sum * L.cell;
}

SpectralVectorField random_band_field(const GridSpec& grid, std::uint64_t seed, bool solenoidal) {
  const Lattice L(grid);
  SpectralVectorField s(grid);
  Rng rng(seed);
  std::size_t f = 0;
  for (int i0 = 0; i0 < L.n; ++i0) {
    for (int i1 = 0; i1 < L.n; ++i1) {
      for (int i2 = 0; i2 < L.n; ++i2, ++f) {
        if (!L.kept(L.mode(i0)) || !L.kept(L.mode(i1)) || !L.kept(L.mode(i2))) continue;
        CVec3 v;
        for (auto& c : v) c = complex(rng.normal(), rng.normal());
        s.set(f, v);
      }
    }
  }
  s.set(0, CVec3{});
  if (solenoidal) project(s);
  return s;
}

double max_relative_deviation(const SpectralVectorField& a, const SpectralVectorField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const CVec3 x = a.at(i), y = b.at(i);
    num = std::max(num, std::sqrt(std::norm(x[0] - y[0]) + std::norm(x[1] - y[1]) +
                                  std::norm(x[2] - y[2])));
    den = std::max(den, std::sqrt(std::norm(y[0]) + std::norm(y[1]) + std::norm(y[2])));
  }
  return den == 0.0 ? (num == 0.0 ? 0.0 : INFINITY) : num / den;
}

}  // namespace bmhd::oracle
