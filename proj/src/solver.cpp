#include "bmhd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "bmhd/log.hpp"
#include "bmhd/norms.hpp"
#include "bmhd/spectral_ops.hpp"

namespace bmhd::solver {
namespace {

using spectral::AntisymmetricTensorField;
using spectral::SymmetricTensorField;

// v <- -P v
void negate_project(SpectralVectorField& s) {
  for_each_mode(s.grid(), [&](std::size_t i, const Vec3& xi) {
    const double k2 = dot(xi, xi);
    if (k2 == 0.0) {
      s.set(i, CVec3{});
      return;
    }
    const CVec3 v = s.at(i);
    const complex d = dot(xi, v) / k2;
    s.set(i, {xi[0] * d - v[0], xi[1] * d - v[1], xi[2] * d - v[2]});
  });
}

void finish(StateDerivative& d, bool hermitian) {
  negate_project(d.du);
  negate_project(d.dh);
  d.du.set_hermitian(hermitian);
  d.dh.set_hermitian(hermitian);
}

std::vector<double> heat_factors(const GridSpec& g, double kappa, double t) {
  std::vector<double> e(g.size());
  for_each_mode(g, [&](std::size_t i, const Vec3& xi) { e[i] = std::exp(-kappa * dot(xi, xi) * t); });
  return e;
}

void apply(SpectralVectorField& s, const std::vector<double>& e) {
  for (int c = 0; c < 3; ++c) {
    auto v = s.component(c);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= e[i];
  }
}

double simpson_uniform(const std::vector<double>& y, std::size_t lo, std::size_t hi, double h) {
  const std::size_t m = hi - lo;
  if (m == 0) return 0.0;
  if (m == 1) return 0.5 * h * (y[lo] + y[hi]);
  double total = 0.0;
  std::size_t end = hi;
  if (m % 2 == 1) {
    end = hi - 3;
    total += 3.0 * h / 8.0 * (y[end] + 3.0 * y[end + 1] + 3.0 * y[end + 2] + y[end + 3]);
  }
  for (std::size_t i = lo; i + 2 <= end; i += 2) {
    total += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
  }
  return total;
}

double l2(const SpectralVectorField& s) { return std::sqrt(spectral::real_inner(s, s)); }

double transfer_ratio(const SpectralVectorField& u, const SpectralVectorField& h) {
  const auto n = nonlinear_primitive(u, h);
  const double num = spectral::real_inner(n.du, u) + spectral::real_inner(n.dh, h);
  const double den = l2(n.du) * l2(u) + l2(n.dh) * l2(h);
  return den == 0.0 ? 0.0 : std::abs(num) / den;
}

double max_speed(const SpectralVectorField& u, const SpectralVectorField& h) {
  return std::max(spectral::to_physical(u).max_modulus(), spectral::to_physical(h).max_modulus());
}

}  // namespace

void PhysicsParams::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw std::invalid_argument("physics.nu must be positive");
  if (mu == 0.0 && !exploratory) {
    throw std::invalid_argument(
        "physics.mu = 0 is the non-resistive case left open by the theory; "
        "rerun with the exploratory flag to simulate it without any certificate claim");
  }
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("physics.mu must be positive");
}

const char* to_string(Formulation f) {
  return f == Formulation::Primitive ? "primitive" : "perturbation";
}

Formulation formulation_from_string(const std::string& s) {
  if (s == "primitive") return Formulation::Primitive;
  if (s == "perturbation") return Formulation::Perturbation;
  throw std::invalid_argument("solver.formulation must be \"primitive\" or \"perturbation\"");
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("solver.dt must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("solver.T must be nonnegative");
  if (snapshot_stride < 1) throw std::invalid_argument("solver.snapshot_stride must be >= 1");
  if (!(blowup_threshold > 1.0)) throw std::invalid_argument("solver.blowup_threshold must exceed 1");
}

StateDerivative nonlinear_primitive(const SpectralVectorField& u, const SpectralVectorField& h) {
  const auto& g = u.grid();
  const auto pu = spectral::to_physical_truncated(u);
  const auto ph = spectral::to_physical_truncated(h);
  SymmetricTensorField T(g);
  AntisymmetricTensorField W(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const CVec3 a = pu.at(i), b = ph.at(i);
    T.c[0][i] = a[0] * a[0] - b[0] * b[0];
    T.c[1][i] = a[1] * a[1] - b[1] * b[1];
    T.c[2][i] = a[2] * a[2] - b[2] * b[2];
    T.c[3][i] = a[0] * a[1] - b[0] * b[1];
    T.c[4][i] = a[0] * a[2] - b[0] * b[2];
    T.c[5][i] = a[1] * a[2] - b[1] * b[2];
    // W_ji = u_j h_i - h_j u_i
    W.c[0][i] = a[0] * b[1] - b[0] * a[1];
    W.c[1][i] = a[0] * b[2] - b[0] * a[2];
    W.c[2][i] = a[1] * b[2] - b[1] * a[2];
  }
  StateDerivative d{spectral::divergence(T), spectral::divergence(W)};
  finish(d, u.hermitian() && h.hermitian());
  return d;
}

StateDerivative nonlinear_perturbation(const SpectralVectorField& U, const SpectralVectorField& H,
                                       reference::ReferenceEvaluator& ref, double t) {
  const auto& g = U.grid();
  const auto& e = ref.at(t);
  const auto pU = spectral::to_physical_truncated(U);
  const auto pH = spectral::to_physical_truncated(H);
  SymmetricTensorField T(g);
  AntisymmetricTensorField W(g);
  const int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const CVec3 u = pU.at(i), h = pH.at(i), f = e.f.at(i), b = e.g.at(i);
    for (int k = 0; k < 6; ++k) {
      const int p = pairs[k][0], q = pairs[k][1];
      T.c[k][i] = u[p] * u[q] + f[p] * u[q] + u[p] * f[q] - h[p] * h[q] - b[p] * h[q] - h[p] * b[q];
    }
    for (int k = 0; k < 3; ++k) {
      const int j = pairs[k + 3][0], c = pairs[k + 3][1];
      // W_ji for (j, i) = (x, y), (x, z), (y, z)
      W.c[k][i] = u[j] * h[c] + f[j] * h[c] + u[j] * b[c] - h[j] * u[c] - b[j] * u[c] - h[j] * f[c];
    }
  }
  StateDerivative d{spectral::divergence(T), spectral::divergence(W)};
  d.du -= e.sources.projected_F;
  d.dh -= e.sources.G;
  const bool herm = U.hermitian() && H.hermitian() && e.f_hat.hermitian() && e.g_hat.hermitian();
  finish(d, herm);
  return d;
}

StateDerivative rhs_primitive(const StateSnapshot& s, const PhysicsParams& p) {
  auto d = nonlinear_primitive(s.u, s.h);
  for_each_mode(s.u.grid(), [&](std::size_t i, const Vec3& xi) {
    const double k2 = dot(xi, xi);
    for (int c = 0; c < 3; ++c) {
      d.du.component(c)[i] -= p.nu * k2 * s.u.component(c)[i];
      d.dh.component(c)[i] -= p.mu * k2 * s.h.component(c)[i];
    }
  });
  return d;
}

StateDerivative rhs_perturbation(const StateSnapshot& s, reference::ReferenceEvaluator& ref,
                                 const PhysicsParams& p) {
  auto d = nonlinear_perturbation(s.u, s.h, ref, s.t);
  for_each_mode(s.u.grid(), [&](std::size_t i, const Vec3& xi) {
    const double k2 = dot(xi, xi);
    for (int c = 0; c < 3; ++c) {
      d.du.component(c)[i] -= p.nu * k2 * s.u.component(c)[i];
      d.dh.component(c)[i] -= p.mu * k2 * s.h.component(c)[i];
    }
  });
  return d;
}

PreflightReport preflight(const StateSnapshot& initial, const SolverConfig& config,
                          reference::ReferenceEvaluator* ref) {
  PreflightReport r;
  r.dx = initial.u.grid().spacing();
  SpectralVectorField u = initial.u, h = initial.h;
  if (config.formulation == Formulation::Perturbation && ref != nullptr) {
    const auto& e = ref->at(initial.t);
    u += e.f_hat;
    h += e.g_hat;
  }
  r.max_speed = max_speed(u, h);
  r.dt_limit = r.max_speed == 0.0 ? INFINITY : 0.5 * r.dx / r.max_speed;
  r.ok = config.dt <= r.dt_limit;
  return r;
}

Stepper::Stepper(const GridSpec& grid, PhysicsParams params, SolverConfig config,
                 reference::ReferenceEvaluator* ref)
    : grid_(grid), params_(params), config_(config), ref_(ref) {
  params_.validate();
  config_.validate();
  if (config_.formulation == Formulation::Perturbation && ref_ == nullptr) {
    throw std::invalid_argument("perturbation formulation requires reference fields");
  }
  const double dt = config_.dt;
  eu_half_ = heat_factors(grid_, params_.nu, 0.5 * dt);
  eu_full_ = heat_factors(grid_, params_.nu, dt);
  eh_half_ = heat_factors(grid_, params_.mu, 0.5 * dt);
  eh_full_ = heat_factors(grid_, params_.mu, dt);
}

StateDerivative Stepper::nonlinear(const SpectralVectorField& u, const SpectralVectorField& h,
                                   double t) {
  if (config_.linear_only) {
    return {SpectralVectorField(grid_, u.hermitian()), SpectralVectorField(grid_, h.hermitian())};
  }
  if (config_.formulation == Formulation::Perturbation) return nonlinear_perturbation(u, h, *ref_, t);
  return nonlinear_primitive(u, h);
}

void Stepper::propagate(StateDerivative& y, bool half) const {
  apply(y.du, half ? eu_half_ : eu_full_);
  apply(y.dh, half ? eh_half_ : eh_full_);
}

StateSnapshot Stepper::step(const StateSnapshot& s) {
  const double h = config_.dt, t = s.t;
  const auto k1 = nonlinear(s.u, s.h, t);

  StateDerivative y2{s.u, s.h};
  y2.du.axpy(0.5 * h, k1.du);
  y2.dh.axpy(0.5 * h, k1.dh);
  propagate(y2, true);
  spectral::leray_project_inplace(y2.du);
  spectral::leray_project_inplace(y2.dh);
  const auto k2 = nonlinear(y2.du, y2.dh, t + 0.5 * h);

  StateDerivative ey{s.u, s.h};  // E(h/2) y
  propagate(ey, true);
  StateDerivative y3 = ey;
  y3.du.axpy(0.5 * h, k2.du);
  y3.dh.axpy(0.5 * h, k2.dh);
  spectral::leray_project_inplace(y3.du);
  spectral::leray_project_inplace(y3.dh);
  const auto k3 = nonlinear(y3.du, y3.dh, t + 0.5 * h);

  StateDerivative y4 = ey;
  y4.du.axpy(h, k3.du);
  y4.dh.axpy(h, k3.dh);
  propagate(y4, true);
  spectral::leray_project_inplace(y4.du);
  spectral::leray_project_inplace(y4.dh);
  const auto k4 = nonlinear(y4.du, y4.dh, t + h);

  // E(h/2)[E(h/2)(y + h/6 k1) + h/3 (k2 + k3)] + h/6 k4
  StateDerivative acc{s.u, s.h};
  acc.du.axpy(h / 6.0, k1.du);
  acc.dh.axpy(h / 6.0, k1.dh);
  propagate(acc, true);
  acc.du.axpy(h / 3.0, k2.du);
  acc.dh.axpy(h / 3.0, k2.dh);
  acc.du.axpy(h / 3.0, k3.du);
  acc.dh.axpy(h / 3.0, k3.dh);
  propagate(acc, true);
  acc.du.axpy(h / 6.0, k4.du);
  acc.dh.axpy(h / 6.0, k4.dh);
  spectral::leray_project_inplace(acc.du);
  spectral::leray_project_inplace(acc.dh);

  StateSnapshot out{t + h, std::move(acc.du), std::move(acc.dh)};
  out.u.set_hermitian(s.u.hermitian());
  out.h.set_hermitian(s.h.hermitian());
  if (!out.u.all_finite() || !out.h.all_finite()) {
    std::ostringstream msg;
    msg << "non-finite coefficient at t = " << out.t;
    throw BlowupDetected(out.t, msg.str());
  }
  return out;
}

StateSnapshot step(const StateSnapshot& s, const PhysicsParams& params, const SolverConfig& config,
                   reference::ReferenceEvaluator* ref) {
  Stepper stepper(s.u.grid(), params, config, ref);
  return stepper.step(s);
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"t",    "energy_u", "energy_h",     "E0_U",
                                             "E0_H", "E1_cum",   "div_residual", "max_amp"};
  return cols;
}

std::string csv_header() {
  std::string s;
  for (const auto& c : csv_columns()) {
    if (!s.empty()) s += ',';
    s += c;
  }
  return s;
}

std::string csv_row(const DiagnosticsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.t,
                r.energy_u, r.energy_h, r.E0_U, r.E0_H, r.E1_cum, r.div_residual, r.max_amp);
  return buf;
}

RunResult run(const StateSnapshot& initial, const PhysicsParams& params, const SolverConfig& config,
              reference::ReferenceEvaluator* ref, const SnapshotCallback& on_snapshot) {
  params.validate();
  config.validate();
  const auto& grid = initial.u.grid();
  if (!(initial.h.grid() == grid)) throw std::invalid_argument("run: u and h grids differ");
  const bool perturbation = config.formulation == Formulation::Perturbation;
  if (perturbation && ref == nullptr) {
    throw std::invalid_argument("perturbation formulation requires reference fields");
  }
  if (perturbation && !(ref->fields().u02.grid() == grid)) {
    throw std::invalid_argument("run: reference fields live on a different grid");
  }
  for (const auto* f : {&initial.u, &initial.h}) {
    if (spectral::divergence_residual(*f) > 1e-10) {
      throw std::invalid_argument("run: initial data is not divergence-free");
    }
  }

  StateSnapshot state = initial;
  spectral::dealias_truncate(state.u);
  spectral::dealias_truncate(state.h);
  if (spectral::squared_norm(state.u) != spectral::squared_norm(initial.u) ||
      spectral::squared_norm(state.h) != spectral::squared_norm(initial.h)) {
    warn("run: initial data had modes outside the dealiasing band; they were removed");
  }
  state.u.set(0, CVec3{});
  state.h.set(0, CVec3{});

  RunResult result;
  result.preflight = preflight(state, config, ref);
  if (!result.preflight.ok) {
    std::ostringstream msg;
    msg << "preflight: dt = " << config.dt << " exceeds the advective limit "
        << result.preflight.dt_limit << " (0.5 dx / max speed, max speed "
        << result.preflight.max_speed << ")";
    throw std::invalid_argument(msg.str());
  }

  result.real_valued = spectral::hermitian_residual(state.u) <= 1e-12 &&
                       spectral::hermitian_residual(state.h) <= 1e-12;
  if (perturbation) {
    result.real_valued = result.real_valued &&
                         spectral::hermitian_residual(ref->fields().u02) <= 1e-12 &&
                         spectral::hermitian_residual(ref->fields().h02) <= 1e-12;
  }

  long long nsteps = std::llround(config.T / config.dt);
  if (std::abs(nsteps * config.dt - config.T) > 1e-9 * std::max(1.0, config.T)) {
    std::ostringstream msg;
    msg << "run: T = " << config.T << " is not a multiple of dt; integrating to "
        << nsteps * config.dt;
    warn(msg.str());
  }

  Stepper stepper(grid, params, config, ref);

  auto full_fields = [&](const StateSnapshot& s) {
    std::pair<SpectralVectorField, SpectralVectorField> p{s.u, s.h};
    if (perturbation) {
      const auto& e = ref->at(s.t);
      p.first += e.f_hat;
      p.second += e.g_hat;
    }
    return p;
  };

  double amp_scale = std::max(spectral::max_amplitude(state.u), spectral::max_amplitude(state.h));
  if (perturbation) {
    amp_scale = std::max({amp_scale, spectral::max_amplitude(ref->fields().u02),
                          spectral::max_amplitude(ref->fields().h02)});
  }
  const double amp_limit = config.blowup_threshold * amp_scale;
  double speed_warn = 2.0 * result.preflight.max_speed;

  std::vector<double> energy, dissipation;
  double e1 = 0.0, prev_weighted = 0.0;
  std::size_t last_snapshot = 0;

  for (long long k = 0;; ++k) {
    const auto full = full_fields(state);
    const double eu = spectral::energy(full.first), eh = spectral::energy(full.second);
    energy.push_back(eu + eh);
    dissipation.push_back(params.nu * spectral::gradient_energy(full.first) +
                          params.mu * spectral::gradient_energy(full.second));
    const double weighted = params.nu * norms::dissipation_norm(state.u) +
                            params.mu * norms::dissipation_norm(state.h);
    if (k > 0) e1 += 0.5 * config.dt * (weighted + prev_weighted);
    prev_weighted = weighted;

    const bool is_snapshot = k % config.snapshot_stride == 0 || k == nsteps;
    if (is_snapshot) {
      DiagnosticsRow row;
      row.t = state.t;
      row.energy_u = eu;
      row.energy_h = eh;
      row.E0_U = norms::critical_norm(state.u);
      row.E0_H = norms::critical_norm(state.h);
      row.E1_cum = e1;
      row.weighted = weighted;
      row.wiener = norms::wiener_norm(state.u) + norms::wiener_norm(state.h);
      row.div_residual = std::max(spectral::divergence_residual(state.u),
                                  spectral::divergence_residual(state.h));
      row.max_amp = std::max(spectral::max_amplitude(state.u), spectral::max_amplitude(state.h));
      row.transfer = transfer_ratio(full.first, full.second);
      row.max_speed = max_speed(full.first, full.second);
      const std::size_t idx = static_cast<std::size_t>(k);
      if (idx > last_snapshot) {
        const double integral = simpson_uniform(dissipation, last_snapshot, idx, config.dt);
        const double change = energy[idx] - energy[last_snapshot];
        row.energy_balance =
            integral == 0.0 ? std::abs(change) : std::abs(change + integral) / integral;
      }
      last_snapshot = idx;
      if (row.max_speed > speed_warn) {
        std::ostringstream msg;
        msg << "run: max speed " << row.max_speed << " at t = " << row.t
            << " exceeds twice the preflight value; dt = " << config.dt
            << " may violate the advective limit " << 0.5 * result.preflight.dx / row.max_speed;
        warn(msg.str());
        speed_warn = 2.0 * row.max_speed;
      }
      result.max_div_residual = std::max(result.max_div_residual, row.div_residual);
      result.max_energy_balance = std::max(result.max_energy_balance, row.energy_balance);
      result.max_transfer = std::max(result.max_transfer, row.transfer);
      result.diagnostics.push_back(row);
      if (config.keep_trajectory) result.trajectory.push_back(state);
      if (on_snapshot) on_snapshot(state);
    }
    if (k == nsteps) break;

    try {
      StateSnapshot next = stepper.step(state);
      const double amp =
          std::max(spectral::max_amplitude(next.u), spectral::max_amplitude(next.h));
      if (amp_scale > 0.0 && amp > amp_limit) {
        std::ostringstream msg;
        msg << "max amplitude " << amp << " exceeds " << config.blowup_threshold
            << " x initial at t = " << next.t;
        throw BlowupDetected(next.t, msg.str());
      }
      state = std::move(next);
    } catch (const BlowupDetected& b) {
      result.blowup = true;
      result.blowup_time = b.time();
      result.blowup_message = b.what();
      break;
    }
    result.steps = static_cast<int>(k + 1);
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace bmhd::solver
