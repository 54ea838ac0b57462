#include "bmhd/reference_flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bmhd/log.hpp"
#include "bmhd/norms.hpp"
#include "bmhd/reduce.hpp"
#include "bmhd/spectral_ops.hpp"

namespace bmhd::reference {
namespace {

constexpr double kFormTolerance = 1e-10;

void require_time(double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("reference flow: negative time");
}

double max_difference(const SpectralVectorField& a, const SpectralVectorField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const CVec3 u = a.at(i), v = b.at(i);
    m = std::max(m, modulus({u[0] - v[0], u[1] - v[1], u[2] - v[2]}));
  }
  return m;
}

/// (sqrt(-Lap) - 1) s
SpectralVectorField shell_deviation(const SpectralVectorField& s) {
  SpectralVectorField out = spectral::sqrt_neg_laplacian(s);
  out -= s;
  return out;
}

SpectralVectorField zero_mean(SpectralVectorField s) {
  s.set(0, CVec3{});
  return s;
}

/// sum ||xi| - 1| |s| cell
double shell_defect(const SpectralVectorField& s) {
  std::vector<double> terms(s.size(), 0.0);
  for_each_mode(s.grid(), [&](std::size_t i, const Vec3& xi) {
    terms[i] = std::abs(norm(xi) - 1.0) * modulus(s.at(i));
  });
  return pairwise_sum(terms) * s.grid().cell_volume();
}

struct SupportGeometry {
  double min_sq = 0.0;       ///< smallest |xi|^2 on the data support
  double max_sq = 0.0;
  double min_pair_sum = 0.0;  ///< smallest nonzero |a + b| over support pairs
  bool empty = true;
};

SupportGeometry support_geometry(const ReferenceFields& ref) {
  std::vector<Vec3> pts;
  for_each_mode(ref.u02.grid(), [&](std::size_t i, const Vec3& xi) {
    if (modulus(ref.u02.at(i)) > 0.0 || modulus(ref.h02.at(i)) > 0.0) pts.push_back(xi);
  });
  SupportGeometry g;
  if (pts.empty()) return g;
  g.empty = false;
  g.min_sq = INFINITY;
  for (const auto& p : pts) {
    g.min_sq = std::min(g.min_sq, dot(p, p));
    g.max_sq = std::max(g.max_sq, dot(p, p));
  }
  const double floor = 0.5 * ref.u02.grid().k0;
  double best = INFINITY;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a; b < pts.size(); ++b) {
      const Vec3 s{pts[a][0] + pts[b][0], pts[a][1] + pts[b][1], pts[a][2] + pts[b][2]};
      const double m = norm(s);
      if (m > floor) best = std::min(best, m);
    }
  }
  g.min_pair_sum = best;
  return g;
}

/// Real lambda with h02 = lambda u02 modewise, if one exists.
bool parallel_data(const ReferenceFields& ref, double& lambda) {
  const double mu = spectral::max_amplitude(ref.u02);
  const double mh = spectral::max_amplitude(ref.h02);
  if (mu == 0.0 || mh == 0.0) {
    lambda = 0.0;
    return true;
  }
  const double su = norms::wiener_norm(ref.u02);
  const double sh = norms::wiener_norm(ref.h02);
  const double re = spectral::real_inner(ref.u02, ref.h02);
  lambda = (re >= 0.0 ? 1.0 : -1.0) * sh / su;
  SpectralVectorField d = ref.h02;
  d.axpy(-lambda, ref.u02);
  return spectral::max_amplitude(d) <= 1e-12 * mh;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y, int stride) {
  std::vector<double> terms;
  for (std::size_t i = stride; i < t.size(); i += stride) {
    terms.push_back(0.5 * (t[i] - t[i - stride]) * (y[i] + y[i - stride]));
  }
  return pairwise_sum(terms);
}

}  // namespace

void ReferenceFields::validate() const {
  if (!(u02.grid() == h02.grid())) throw std::invalid_argument("reference flow: grid mismatch");
  if (!(nu > 0.0)) throw std::invalid_argument("reference flow: nu must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("reference flow: mu must be positive");
  if (spectral::divergence_residual(u02) > 1e-10) {
    throw std::invalid_argument("reference flow: u02 is not divergence-free");
  }
  if (spectral::divergence_residual(h02) > 1e-10) {
    throw std::invalid_argument("reference flow: h02 is not divergence-free");
  }
}

SpectralVectorField evaluate_f(const ReferenceFields& ref, double t) {
  require_time(t);
  return spectral::heat_multiply(ref.u02, ref.nu, t);
}

SpectralVectorField evaluate_g(const ReferenceFields& ref, double t) {
  require_time(t);
  return spectral::heat_multiply(ref.h02, ref.mu, t);
}

SourceTerm assemble_F(const ReferenceFields& ref, double t) {
  using spectral::BilinearForm;
  const auto f = evaluate_f(ref, t);
  const auto g = evaluate_g(ref, t);

  SourceTerm out;
  out.field = spectral::dealiased_product(g, shell_deviation(g), BilinearForm::Cross);
  out.field -= spectral::dealiased_product(f, shell_deviation(f), BilinearForm::Cross);

  auto curl_form = spectral::dealiased_product(g, spectral::curl(g), BilinearForm::Cross);
  curl_form -= spectral::dealiased_product(f, spectral::curl(f), BilinearForm::Cross);

  out.scale = norms::wiener_norm(g) * spectral::max_amplitude(spectral::sqrt_neg_laplacian(g)) +
              norms::wiener_norm(f) * spectral::max_amplitude(spectral::sqrt_neg_laplacian(f));
  out.cross_form_residual =
      out.scale == 0.0 ? 0.0 : max_difference(out.field, curl_form) / out.scale;
  if (out.cross_form_residual > kFormTolerance) {
    std::ostringstream msg;
    msg << "assemble_F: the two forms of F differ by " << out.cross_form_residual
        << " (relative) at t = " << t << "; data is not helical";
    warn(msg.str());
  }
  return out;
}

SourceTerm assemble_G(const ReferenceFields& ref, double t) {
  using spectral::BilinearForm;
  const auto f = evaluate_f(ref, t);
  const auto g = evaluate_g(ref, t);

  SourceTerm out;
  out.field = spectral::curl(spectral::dealiased_product(f, g, BilinearForm::Cross));

  auto advective = spectral::dealiased_product(g, f, BilinearForm::Advection);
  advective -= spectral::dealiased_product(f, g, BilinearForm::Advection);

  out.scale = norms::wiener_norm(f) * spectral::max_amplitude(spectral::sqrt_neg_laplacian(g)) +
              norms::wiener_norm(g) * spectral::max_amplitude(spectral::sqrt_neg_laplacian(f));
  out.cross_form_residual =
      out.scale == 0.0 ? 0.0 : max_difference(out.field, advective) / out.scale;
  if (out.cross_form_residual > kFormTolerance) {
    std::ostringstream msg;
    msg << "assemble_G: curl(f x g) and g.grad f - f.grad g differ by "
        << out.cross_form_residual << " (relative) at t = " << t;
    warn(msg.str());
  }
  return out;
}

ReferenceEvaluator::ReferenceEvaluator(ReferenceFields ref) : ref_(std::move(ref)) {
  ref_.validate();
}

const ReferenceEvaluator::Entry& ReferenceEvaluator::at(double t) {
  for (const auto& e : cache_) {
    if (e.t == t) return e;
  }
  Entry e;
  e.t = t;
  e.f_hat = evaluate_f(ref_, t);
  e.g_hat = evaluate_g(ref_, t);
  e.f = spectral::to_physical(e.f_hat);
  e.g = spectral::to_physical(e.g_hat);

  const auto df = spectral::to_physical(shell_deviation(e.f_hat));
  const auto dg = spectral::to_physical(shell_deviation(e.g_hat));
  auto F = spectral::pointwise_cross(e.g, dg);
  const auto Ff = spectral::pointwise_cross(e.f, df);
  for (std::size_t i = 0; i < F.size(); ++i) {
    const CVec3 a = F.at(i), b = Ff.at(i);
    F.set(i, {a[0] - b[0], a[1] - b[1], a[2] - b[2]});
  }
  const bool herm = e.f_hat.hermitian() && e.g_hat.hermitian();
  e.sources.projected_F = spectral::to_spectral_truncated(F, herm);
  spectral::leray_project_inplace(e.sources.projected_F);
  e.sources.projected_F *= -1.0;
  e.sources.G = spectral::curl(
      spectral::to_spectral_truncated(spectral::pointwise_cross(e.f, e.g), herm));

  if (cache_.size() == 2) cache_.pop_front();
  cache_.push_back(std::move(e));
  return cache_.back();
}

std::pair<double, double> closed_form_time_integral(const ReferenceFields& ref) {
  const auto& grid = ref.u02.grid();
  std::vector<double> a(grid.size(), 0.0), b(grid.size(), 0.0);
  for_each_mode(grid, [&](std::size_t i, const Vec3& xi) {
    const double k2 = dot(xi, xi);
    if (k2 == 0.0) return;
    a[i] = modulus(ref.u02.at(i)) / (ref.nu * k2);
    b[i] = modulus(ref.h02.at(i)) / (ref.mu * k2);
  });
  const double cell = grid.cell_volume();
  return {pairwise_sum(a) * cell, pairwise_sum(b) * cell};
}

std::vector<double> stretched_grid(double T, int intervals, double growth) {
  if (!(T > 0.0)) throw std::invalid_argument("stretched_grid: T must be positive");
  if (intervals < 1) throw std::invalid_argument("stretched_grid: need at least one interval");
  if (!(growth >= 1.0)) throw std::invalid_argument("stretched_grid: growth must be >= 1");
  std::vector<double> t(intervals + 1);
  const double denom = std::pow(growth, intervals) - 1.0;
  for (int i = 0; i <= intervals; ++i) {
    t[i] = growth == 1.0 ? T * i / intervals : T * (std::pow(growth, i) - 1.0) / denom;
  }
  t[intervals] = T;
  return t;
}

namespace {

std::vector<double> fine_nodes(double T, const QuadratureSpec& spec) {
  if (spec.intervals < 1) throw std::invalid_argument("quadrature: intervals must be >= 1");
  return stretched_grid(T, 2 * spec.intervals, std::sqrt(spec.growth));
}

}  // namespace

std::pair<double, double> quadrature_time_integral(const ReferenceFields& ref, double T,
                                                   const QuadratureSpec& spec) {
  const auto t = fine_nodes(T, spec);
  std::vector<double> yf(t.size()), yg(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    yf[i] = norms::wiener_norm(evaluate_f(ref, t[i]));
    yg[i] = norms::wiener_norm(evaluate_g(ref, t[i]));
  }
  const double f = (4.0 * trapezoid(t, yf, 1) - trapezoid(t, yf, 2)) / 3.0;
  const double g = (4.0 * trapezoid(t, yg, 1) - trapezoid(t, yg, 2)) / 3.0;
  return {f, g};
}

SourceNorms source_critical_norms(const ReferenceFields& ref, double t) {
  const auto f_hat = evaluate_f(ref, t);
  const auto g_hat = evaluate_g(ref, t);
  const auto f = spectral::to_physical(f_hat);
  const auto g = spectral::to_physical(g_hat);
  const auto df = spectral::to_physical(shell_deviation(f_hat));
  const auto dg = spectral::to_physical(shell_deviation(g_hat));

  auto F = spectral::pointwise_cross(g, dg);
  const auto Ff = spectral::pointwise_cross(f, df);
  for (std::size_t i = 0; i < F.size(); ++i) {
    const CVec3 a = F.at(i), b = Ff.at(i);
    F.set(i, {a[0] - b[0], a[1] - b[1], a[2] - b[2]});
  }
  SourceNorms out;
  out.F = norms::critical_norm(zero_mean(spectral::to_spectral_truncated(F)));
  out.G = norms::critical_norm(
      spectral::curl(spectral::to_spectral_truncated(spectral::pointwise_cross(f, g))));
  return out;
}

SourceBudget source_budget(const ReferenceFields& ref, double T, const QuadratureSpec& spec) {
  if (!(T > 0.0)) throw std::invalid_argument("source_budget: T must be positive");
  ref.validate();
  SourceBudget b;
  b.T = T;

  const auto t = fine_nodes(T, spec);
  std::vector<double> yF(t.size()), yG(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto n = source_critical_norms(ref, t[i]);
    yF[i] = n.F;
    yG[i] = n.G;
  }
  const double F2 = trapezoid(t, yF, 1), F1 = trapezoid(t, yF, 2);
  const double G2 = trapezoid(t, yG, 1), G1 = trapezoid(t, yG, 2);
  b.F_quadrature = (4.0 * F2 - F1) / 3.0;
  b.G_quadrature = (4.0 * G2 - G1) / 3.0;
  b.quadrature_error_estimate = (std::abs(F2 - F1) + std::abs(G2 - G1)) / 3.0;

  const auto geo = support_geometry(ref);
  if (!geo.empty) {
    const auto f = evaluate_f(ref, T);
    const auto g = evaluate_g(ref, T);
    const double inv_xi = 1.0 / geo.min_pair_sum;
    b.F_tail = inv_xi * (norms::wiener_norm(g) * shell_defect(g) / (2.0 * ref.mu * geo.min_sq) +
                         norms::wiener_norm(f) * shell_defect(f) / (2.0 * ref.nu * geo.min_sq));

    const double c = (ref.nu + ref.mu) * geo.min_sq;
    const double wu = norms::wiener_norm(ref.u02), wh = norms::wiener_norm(ref.h02);
    double lambda = 0.0;
    if (parallel_data(ref, lambda)) {
      const double spread = geo.max_sq - geo.min_sq;
      b.G_tail = 0.5 * std::abs(ref.nu - ref.mu) * spread * wu * wh * std::exp(-c * T) *
                 (T / c + 1.0 / (c * c));
    } else {
      b.G_tail = wu * wh * std::exp(-c * T) / c;
    }
  }
  b.F_budget = b.F_quadrature + b.F_tail;
  b.G_budget = b.G_quadrature + b.G_tail;

  const double scale = std::max(b.F_budget + b.G_budget, 1e-300);
  b.converged = b.quadrature_error_estimate <= spec.tolerance * scale ||
                b.quadrature_error_estimate <= 1e-14;
  if (!b.converged) {
    std::ostringstream msg;
    msg << "source_budget: quadrature error estimate " << b.quadrature_error_estimate
        << " exceeds the requested relative tolerance " << spec.tolerance;
    warn(msg.str());
  }
  return b;
}

}  // namespace bmhd::reference
