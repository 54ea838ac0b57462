#include "bmhd/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "bmhd/norms.hpp"
#include "bmhd/reduce.hpp"
#include "bmhd/spectral_ops.hpp"

namespace bmhd::certificates {
namespace {

constexpr std::size_t kChunk = 1 << 16;

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> terms;
  for (std::size_t i = 1; i < t.size(); ++i) {
    terms.push_back(0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]));
  }
  return pairwise_sum(terms);
}

Vec3 random_direction(Rng& rng) {
  for (;;) {
    const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = norm(v);
    if (n > 1e-12) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

/// Uniform direction in the cap of half-angle theta around the unit axis.
Vec3 random_cap_direction(Rng& rng, const Vec3& axis, double theta) {
  const double c = rng.uniform(std::cos(theta), 1.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  Vec3 e{0.0, 0.0, 0.0};
  int least = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::abs(axis[k]) < std::abs(axis[least])) least = k;
  }
  e[least] = 1.0;
  Vec3 e1 = cross(axis, e);
  const double n1 = norm(e1);
  e1 = {e1[0] / n1, e1[1] / n1, e1[2] / n1};
  const Vec3 e2 = cross(axis, e1);
  Vec3 d;
  for (int k = 0; k < 3; ++k) {
    d[k] = c * axis[k] + s * (std::cos(phi) * e1[k] + std::sin(phi) * e2[k]);
  }
  return d;
}

void fill_series_tails(NormSeries& s, const reference::ReferenceFields* ref) {
  s.wiener_f.assign(s.times.size(), 0.0);
  s.wiener_g.assign(s.times.size(), 0.0);
  if (ref == nullptr) return;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    s.wiener_f[i] = norms::wiener_norm(reference::evaluate_f(*ref, s.times[i]));
    s.wiener_g[i] = norms::wiener_norm(reference::evaluate_g(*ref, s.times[i]));
  }
}

}  // namespace

NormSeries accumulate_norm_series(const std::vector<solver::StateSnapshot>& trajectory,
                                  const solver::PhysicsParams& params,
                                  const reference::ReferenceFields* ref) {
  NormSeries s;
  double e1 = 0.0;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& snap = trajectory[i];
    if (i > 0 && !(snap.t > trajectory[i - 1].t)) {
      throw std::invalid_argument("accumulate_norm_series: snapshots are not ordered in time");
    }
    const double w = params.nu * norms::dissipation_norm(snap.u) +
                     params.mu * norms::dissipation_norm(snap.h);
    if (i > 0) e1 += 0.5 * (snap.t - trajectory[i - 1].t) * (w + s.weighted.back());
    s.times.push_back(snap.t);
    s.E0.push_back(norms::critical_norm(snap.u) + norms::critical_norm(snap.h));
    s.E1_cum.push_back(e1);
    s.weighted.push_back(w);
    s.wiener.push_back(norms::wiener_norm(snap.u) + norms::wiener_norm(snap.h));
  }
  fill_series_tails(s, ref);
  return s;
}

NormSeries norm_series_from_run(const solver::RunResult& run,
                                const reference::ReferenceFields* ref) {
  NormSeries s;
  for (const auto& r : run.diagnostics) {
    s.times.push_back(r.t);
    s.E0.push_back(r.E0_U + r.E0_H);
    s.E1_cum.push_back(r.E1_cum);
    s.weighted.push_back(r.weighted);
    s.wiener.push_back(r.wiener);
  }
  fill_series_tails(s, ref);
  return s;
}

nlohmann::json to_json(const InequalityStats& s) {
  return {{"name", s.name},
          {"samples", s.samples},
          {"min_value", s.min_value},
          {"max_value", s.max_value},
          {"max_violation", s.max_violation},
          {"empirical_constant", s.empirical_constant},
          {"bound", s.bound},
          {"pass", s.pass},
          {"note", s.note}};
}

PairSampler default_pair_sampler() {
  return [](Rng& rng, Vec3& xi, Vec3& eta) {
    const double a = std::pow(10.0, rng.uniform(-6.0, 6.0));
    const double b = std::pow(10.0, rng.uniform(-6.0, 6.0));
    const Vec3 d1 = random_direction(rng), d2 = random_direction(rng);
    eta = {b * d2[0], b * d2[1], b * d2[2]};
    xi = {eta[0] + a * d1[0], eta[1] + a * d1[1], eta[2] + a * d1[2]};
  };
}

double lei_lin_value(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("lei_lin: zero-norm sample");
  return a / b + b / a;
}

InequalityStats check_lei_lin(std::size_t sample_count, const PairSampler& sampler,
                              std::uint64_t seed) {
  InequalityStats st;
  st.name = "lei_lin";
  st.bound = 2.0;
  st.min_value = std::numeric_limits<double>::infinity();
  st.max_value = 0.0;
  for (std::size_t start = 0, chunk = 0; start < sample_count; start += kChunk, ++chunk) {
    Rng rng = Rng::substream(seed, chunk);
    const std::size_t end = std::min(sample_count, start + kChunk);
    for (std::size_t i = start; i < end; ++i) {
      Vec3 xi, eta;
      sampler(rng, xi, eta);
      const Vec3 d{xi[0] - eta[0], xi[1] - eta[1], xi[2] - eta[2]};
      const double v = lei_lin_value(norm(d), norm(eta));
      st.min_value = std::min(st.min_value, v);
      st.max_value = std::max(st.max_value, v);
    }
  }
  st.samples = sample_count;
  st.max_violation = std::max(0.0, 2.0 - st.min_value);
  st.pass = sample_count > 0 && st.min_value >= 2.0 - 1e-12;
  return st;
}

double support_threshold(double cap_k) { return 0.5 * std::sqrt(std::max(0.0, 1.0 - cap_k * cap_k)); }

double check_support_bound(const SpectralVectorField& F_hat, double cap_k) {
  const double threshold = support_threshold(cap_k);
  std::vector<double> below(F_hat.size(), 0.0), all(F_hat.size(), 0.0);
  for_each_mode(F_hat.grid(), [&](std::size_t i, const Vec3& xi) {
    const double m = modulus(F_hat.at(i));
    all[i] = m;
    const double k = norm(xi);
    if (k > 0.0 && k < threshold) below[i] = m;
  });
  const double total = pairwise_sum(all);
  return total == 0.0 ? 0.0 : pairwise_sum(below) / total;
}

double modulus_ratio(double a, double b) {
  const double a2 = a * a, b2 = b * b;
  return a2 + b2 == 0.0 ? 0.0 : std::abs(a2 - b2) / (a2 + b2);
}

InequalityStats check_ratio_bound(const beltrami::BeltramiSpec& spec, std::size_t sample_count,
                                  std::uint64_t seed, const SpectralVectorField* support) {
  if (!(spec.delta > 0.0)) throw std::invalid_argument("check_ratio_bound: requires delta > 0");
  InequalityStats st;
  st.name = "ratio_bound";
  st.bound = 10.0 * spec.delta;

  std::vector<double> radii;
  if (support != nullptr) {
    for_each_mode(support->grid(), [&](std::size_t i, const Vec3& xi) {
      if (modulus(support->at(i)) > 0.0) radii.push_back(norm(xi));
    });
    if (radii.empty()) throw std::invalid_argument("check_ratio_bound: empty support field");
    st.note = "pairs drawn from the lattice support";
  } else {
    st.note = "pairs drawn from the continuum shell and cap";
  }

  const double lo = 1.0 - spec.delta, hi = 1.0 + spec.delta;
  double max_ratio = std::max(modulus_ratio(hi, lo), modulus_ratio(1.0, 1.0));
  if (support != nullptr) {
    const auto [mn, mx] = std::minmax_element(radii.begin(), radii.end());
    max_ratio = modulus_ratio(*mx, *mn);
  }
  const Vec3 axis = spec.cap_axis;
  const double theta = spec.cap_half_angle();
  for (std::size_t start = 0, chunk = 0; start < sample_count; start += kChunk, ++chunk) {
    Rng rng = Rng::substream(seed, chunk);
    const std::size_t end = std::min(sample_count, start + kChunk);
    for (std::size_t i = start; i < end; ++i) {
      double a, b;
      if (support != nullptr) {
        a = radii[static_cast<std::size_t>(rng.uniform() * radii.size()) % radii.size()];
        b = radii[static_cast<std::size_t>(rng.uniform() * radii.size()) % radii.size()];
      } else {
        const Vec3 da = random_cap_direction(rng, axis, theta);
        const Vec3 db = random_cap_direction(rng, axis, theta);
        const double ra = rng.uniform(lo, hi), rb = rng.uniform(lo, hi);
        a = norm(Vec3{ra * da[0], ra * da[1], ra * da[2]});
        b = norm(Vec3{rb * db[0], rb * db[1], rb * db[2]});
      }
      max_ratio = std::max(max_ratio, modulus_ratio(a, b));
    }
  }
  st.samples = sample_count + (support != nullptr ? 1 : 2);
  st.max_value = max_ratio;
  st.min_value = 0.0;
  st.empirical_constant = max_ratio / spec.delta;
  st.max_violation = std::max(0.0, max_ratio - st.bound);
  st.pass = max_ratio <= st.bound;
  return st;
}

ExpDiffSample exponential_difference_sample(double nu, double mu, double t, double A, double B) {
  ExpDiffSample s;
  s.lhs = std::abs(std::exp(-nu * A * t - mu * B * t) - std::exp(-nu * B * t - mu * A * t));
  const double m = std::min(nu, mu);
  s.rhs = std::exp(-0.5 * m * (A + B) * t) * std::abs(A - B) / (A + B);
  return s;
}

InequalityStats check_exponential_difference(double nu, double mu, double delta,
                                             const ExpDiffGrid& grid) {
  InequalityStats st;
  st.name = "exponential_difference";
  if (nu == mu) {
    st.pass = true;
    st.note = "nu = mu: both exponentials coincide, the difference vanishes identically";
    return st;
  }
  if (grid.t_points < 2 || grid.pairs == 0 || !(grid.t_max > 0.0)) {
    throw std::invalid_argument("check_exponential_difference: empty sample grid");
  }
  const double lo = (1.0 - delta) * (1.0 - delta), hi = (1.0 + delta) * (1.0 + delta);
  double c = 0.0;
  std::size_t used = 0;
  for (std::size_t start = 0, chunk = 0; start < grid.pairs; start += kChunk, ++chunk) {
    Rng rng = Rng::substream(grid.seed, chunk);
    const std::size_t end = std::min(grid.pairs, start + kChunk);
    for (std::size_t p = start; p < end; ++p) {
      const double A = rng.uniform(lo, hi), B = rng.uniform(lo, hi);
      for (int j = 0; j < grid.t_points; ++j) {
        const double t = grid.t_max * j / (grid.t_points - 1);
        const auto s = exponential_difference_sample(nu, mu, t, A, B);
        if (s.rhs <= 0.0 || std::abs(A - B) <= 1e-12 * (A + B)) continue;
        c = std::max(c, s.lhs / s.rhs);
        ++used;
      }
    }
  }
  st.samples = used;
  st.empirical_constant = c;
  st.max_value = c;
  st.pass = std::isfinite(c);
  st.note = nu > mu ? "nu > mu" : "mu > nu (treated symmetrically with min(nu, mu))";
  return st;
}

CertificateReport theorem_certificate(const CertificateInput& in) {
  if (in.series == nullptr) throw std::invalid_argument("theorem_certificate: missing norm series");
  if (in.budget == nullptr) throw std::invalid_argument("theorem_certificate: missing source budgets");
  const auto& s = *in.series;
  if (s.times.empty()) throw std::invalid_argument("theorem_certificate: empty norm series");

  CertificateReport r;
  r.critical_u01 = in.critical_u01;
  r.critical_h01 = in.critical_h01;
  r.budget = *in.budget;
  r.C_star = in.C_star;
  r.delta0 = in.critical_u01 + in.critical_h01 + in.budget->F_budget + in.budget->G_budget;

  bool any_nonzero = false;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    r.max_E0_plus_E1 = std::max(r.max_E0_plus_E1, s.E0[i] + s.E1_cum[i]);
    r.sup_E0 = std::max(r.sup_E0, s.E0[i]);
    if (s.E0[i] > in.tolerance) any_nonzero = true;
    if (i > 0) {
      if (s.E1_cum[i] < s.E1_cum[i - 1]) r.E1_nondecreasing = false;
      r.E0_max_jump = std::max(r.E0_max_jump, std::abs(s.E0[i] - s.E0[i - 1]));
    }
  }
  r.E0_final = s.E0.back();
  r.E1_final = s.E1_cum.back();
  r.decay_onset = r.E0_final < r.sup_E0;
  r.decay_ratio = r.sup_E0 == 0.0 ? 0.0 : r.E0_final / r.sup_E0;

  if (r.delta0 > 0.0) {
    r.measured_constant = r.max_E0_plus_E1 / r.delta0;
    r.envelope_ok = r.max_E0_plus_E1 <= in.C_star * r.delta0;
    r.bootstrap_margin = r.sup_E0 * r.E1_final / r.delta0;
  } else {
    r.envelope_ok = !any_nonzero;
  }

  double dt_snap = 0.0, max_weighted = 0.0;
  for (std::size_t i = 1; i < s.times.size(); ++i) dt_snap = std::max(dt_snap, s.times[i] - s.times[i - 1]);
  for (double w : s.weighted) max_weighted = std::max(max_weighted, w);
  r.E0_jump_allowance = 2.0 * dt_snap * max_weighted;

  r.L_split = 2.0 * r.C_diag * in.M;
  std::vector<double> sq(s.times.size()), mixed(s.times.size()), ref(s.times.size());
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const double wfg = (i < s.wiener_f.size() ? s.wiener_f[i] + s.wiener_g[i] : 0.0);
    sq[i] = s.wiener[i] * s.wiener[i];
    mixed[i] = s.wiener[i] * wfg;
    ref[i] = wfg;
  }
  r.term_I = trapezoid(s.times, sq);
  r.term_II = trapezoid(s.times, mixed);
  const double denom = r.sup_E0 * r.E1_final;
  r.term_I_ratio = denom == 0.0 ? 0.0 : r.term_I / denom;
  r.gronwall_envelope = 8.0 * r.delta0 * std::exp(r.C_diag * in.M * trapezoid(s.times, ref));
  return r;
}

nlohmann::json to_json(const reference::SourceBudget& b) {
  return {{"F_budget", b.F_budget},
          {"G_budget", b.G_budget},
          {"T", b.T},
          {"F_quadrature", b.F_quadrature},
          {"G_quadrature", b.G_quadrature},
          {"F_tail", b.F_tail},
          {"G_tail", b.G_tail},
          {"quadrature_error_estimate", b.quadrature_error_estimate},
          {"converged", b.converged}};
}

nlohmann::json to_json(const CertificateReport& r) {
  nlohmann::json ineq = nlohmann::json::array();
  for (const auto& s : r.inequalities) ineq.push_back(to_json(s));
  return {{"delta0", r.delta0},
          {"c_star", r.C_star},
          {"envelope_ok", r.envelope_ok},
          {"max_E0_plus_E1", r.max_E0_plus_E1},
          {"measured_constant", r.measured_constant},
          {"critical_u01", r.critical_u01},
          {"critical_h01", r.critical_h01},
          {"source_budget", to_json(r.budget)},
          {"margins",
           {{"envelope_margin", r.C_star * r.delta0 - r.max_E0_plus_E1},
            {"bootstrap_margin", r.bootstrap_margin},
            {"decay_ratio", r.decay_ratio},
            {"decay_onset", r.decay_onset}}},
          {"sup_E0", r.sup_E0},
          {"E0_final", r.E0_final},
          {"E1_final", r.E1_final},
          {"L_split", r.L_split},
          {"C_diag", r.C_diag},
          {"term_I", r.term_I},
          {"term_II", r.term_II},
          {"term_I_ratio", r.term_I_ratio},
          {"gronwall_envelope", r.gronwall_envelope},
          {"E1_nondecreasing", r.E1_nondecreasing},
          {"E0_max_jump", r.E0_max_jump},
          {"E0_jump_allowance", r.E0_jump_allowance},
          {"inequalities", ineq}};
}

std::string norm_series_csv(const NormSeries& s) {
  std::string out = "t,E0,E1_cum,weighted,wiener,wiener_f,wiener_g\n";
  char buf[512];
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.times[i],
                  s.E0[i], s.E1_cum[i], s.weighted[i], s.wiener[i], s.wiener_f[i], s.wiener_g[i]);
    out += buf;
  }
  return out;
}

}  // namespace bmhd::certificates
