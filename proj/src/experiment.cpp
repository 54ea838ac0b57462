#include "bmhd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "bmhd/log.hpp"
#include "bmhd/norms.hpp"
#include "bmhd/oracle.hpp"
#include "bmhd/spectral_ops.hpp"

namespace bmhd::experiment {
namespace {

constexpr std::uint64_t kH01Stream = 0x9E3779B97F4A7C15ull;

const beltrami::BeltramiSpec& require_beltrami(const Scenario& s, const char* what) {
  if (!s.beltrami) throw ScenarioError(std::string("scenario.beltrami: required by ") + what);
  return *s.beltrami;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

DataBundle build_data(const Scenario& s) {
  s.validate();
  DataBundle d;
  const auto& p = s.perturbation;
  d.u01 = beltrami::random_solenoidal(s.grid, p.xi_min, p.xi_max, p.epsilon * p.u_share, p.seed);
  d.h01 = beltrami::random_solenoidal(s.grid, p.xi_min, p.xi_max, p.epsilon * (1.0 - p.u_share),
                                      p.seed + kH01Stream);
  if (s.beltrami) {
    try {
      d.v0 = beltrami::generate_v0(*s.beltrami, s.grid);
    } catch (const beltrami::SupportError& e) {
      throw ScenarioError(std::string("scenario.beltrami: ") + e.what());
    }
    d.properties = beltrami::verify_properties(d.v0, *s.beltrami);
    d.initial = beltrami::compose_initial_data(d.u01, d.h01, *s.beltrami, d.v0);
  } else {
    d.v0 = SpectralVectorField(s.grid, true);
    d.initial.u0 = d.u01;
    d.initial.h0 = d.h01;
    d.initial.critical_u01 = norms::critical_norm(d.u01);
    d.initial.critical_h01 = norms::critical_norm(d.h01);
  }
  return d;
}

nlohmann::json to_json(const beltrami::PropertyReport& r) {
  return {{"div_residual", r.div_residual},   {"helical_residual", r.helical_residual},
          {"support_ok", r.support_ok},       {"wiener_l1", r.wiener_l1},
          {"weighted_bound", r.weighted_bound}, {"pair_min_dot", r.pair_min_dot},
          {"support_size", r.support_size}};
}

reference::ReferenceFields reference_fields(const Scenario& s, const SpectralVectorField& v0) {
  const auto& b = require_beltrami(s, "the reference heat flows");
  reference::ReferenceFields ref;
  ref.u02 = b.alpha1 * v0;
  ref.h02 = b.alpha2 * v0;
  ref.u02.set_hermitian(v0.hermitian());
  ref.h02.set_hermitian(v0.hermitian());
  ref.nu = s.physics.nu;
  ref.mu = s.physics.mu;
  return ref;
}

RunBundle run_scenario(const Scenario& s, const solver::SnapshotCallback& on_snapshot) {
  RunBundle b;
  b.data = build_data(s);
  solver::StateSnapshot init;
  if (s.solver.formulation == solver::Formulation::Perturbation) {
    b.reference = reference_fields(s, b.data.v0);
    init.u = b.data.u01;
    init.h = b.data.h01;
    reference::ReferenceEvaluator ev(*b.reference);
    b.run = solver::run(init, s.physics, s.solver, &ev, on_snapshot);
  } else {
    init.u = b.data.initial.u0;
    init.h = b.data.initial.h0;
    b.run = solver::run(init, s.physics, s.solver, nullptr, on_snapshot);
  }
  return b;
}

solver::StateSnapshot full_fields(const RunBundle& b, const solver::StateSnapshot& state) {
  solver::StateSnapshot out = state;
  if (b.reference) {
    out.u += reference::evaluate_f(*b.reference, state.t);
    out.h += reference::evaluate_g(*b.reference, state.t);
  }
  return out;
}

nlohmann::json run_summary(const Scenario& s, const RunBundle& b) {
  const auto& r = b.run;
  nlohmann::json j;
  j["formulation"] = solver::to_string(s.solver.formulation);
  j["steps"] = r.steps;
  j["final_time"] = r.final_state.t;
  j["blowup"] = r.blowup;
  if (r.blowup) {
    j["blowup_time"] = r.blowup_time;
    j["blowup_message"] = r.blowup_message;
  }
  j["preflight"] = {{"max_speed", r.preflight.max_speed},
                    {"dx", r.preflight.dx},
                    {"dt_limit", r.preflight.dt_limit},
                    {"ok", r.preflight.ok}};
  j["real_valued"] = r.real_valued;
  j["max_div_residual"] = r.max_div_residual;
  if (r.real_valued) {
    j["max_energy_balance"] = r.max_energy_balance;
    j["max_transfer"] = r.max_transfer;
  } else {
    j["max_energy_balance"] = nullptr;
    j["max_transfer"] = nullptr;
    j["energy_identities_note"] =
        "complex fields: the L2 energy identities hold only for real (hermitian) fields";
  }
  j["critical_u01"] = b.data.initial.critical_u01;
  j["critical_h01"] = b.data.initial.critical_h01;
  if (b.data.properties) j["properties"] = to_json(*b.data.properties);
  return j;
}

certificates::CertificateReport certify(const Scenario& s, const RunBundle& b) {
  if (s.beltrami && !b.reference) {
    throw ScenarioError(
        "scenario.solver.formulation: certify needs the perturbation formulation when a "
        "beltrami block is present");
  }
  reference::SourceBudget budget;
  if (b.reference) {
    budget = reference::source_budget(*b.reference, s.certificate.budget_horizon,
                                      s.certificate.quadrature);
    if (!budget.converged) {
      warn("certify: source budget quadrature did not reach the requested tolerance");
    }
  }
  const auto series =
      certificates::norm_series_from_run(b.run, b.reference ? &*b.reference : nullptr);

  certificates::CertificateInput in;
  in.series = &series;
  in.budget = &budget;
  in.critical_u01 = b.data.initial.critical_u01;
  in.critical_h01 = b.data.initial.critical_h01;
  in.C_star = s.certificate.C_star;
  in.M = s.beltrami ? s.beltrami->target_M * std::max(std::abs(s.beltrami->alpha1),
                                                      std::abs(s.beltrami->alpha2))
                    : 0.0;
  auto report = certificates::theorem_certificate(in);

  auto& ineq = report.inequalities;
  ineq.push_back(certificates::check_lei_lin(s.certificate.lei_lin_samples,
                                             certificates::default_pair_sampler(), s.seed + 11));
  if (s.beltrami) {
    const auto& bs = *s.beltrami;
    if (bs.delta > 0.0) {
      ineq.push_back(certificates::check_ratio_bound(bs, s.certificate.ratio_samples,
                                                     s.seed + 12, &b.data.v0));
    }
    if (s.physics.nu != s.physics.mu) {
      certificates::ExpDiffGrid grid;
      grid.seed = s.seed + 13;
      ineq.push_back(
          certificates::check_exponential_difference(s.physics.nu, s.physics.mu, bs.delta, grid));
    }
    certificates::InequalityStats sup;
    sup.name = "support_bound_F";
    sup.bound = 1e-10;
    sup.pass = true;
    const double threshold = certificates::support_threshold(bs.cap_k);
    for (double t : s.certificate.support_check_times) {
      const auto F = reference::assemble_F(*b.reference, t);
      const double frac = certificates::check_support_bound(F.field, bs.cap_k);
      sup.max_value = std::max(sup.max_value, frac);
      ++sup.samples;
    }
    sup.max_violation = std::max(0.0, sup.max_value - sup.bound);
    sup.pass = sup.max_value <= sup.bound;
    std::ostringstream note;
    note << "mass fraction of F below |xi| = " << threshold;
    if (bs.hermitian_symmetrized) note << "; hermitian variant breaks the cone condition";
    sup.note = note.str();
    ineq.push_back(sup);
  }
  return report;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  SlopeFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  fit.points = lx.size();
  if (fit.points < 3) return fit;
  const double n = static_cast<double>(fit.points);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    sse += r * r;
  }
  const double se = std::sqrt(sse / (n - 2.0) / sxx);
  const boost::math::students_t dist(n - 2.0);
  const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  fit.ci_low = fit.slope - q * se;
  fit.ci_high = fit.slope + q * se;
  fit.valid = true;
  return fit;
}

ScalingResult scaling_study(const Scenario& s) {
  const auto& base = require_beltrami(s, "scaling-study");
  if (s.scaling.deltas.size() < 3) {
    throw ScenarioError("scenario.scaling.deltas: at least three values are required");
  }
  ScalingResult r;
  r.M = base.target_M;
  r.M_factor = s.scaling.M_factor;
  r.G_applicable = s.physics.nu != s.physics.mu;

  auto budget_for = [&](double delta, double M) {
    Scenario sc = s;
    sc.beltrami->delta = delta;
    sc.beltrami->target_M = M;
    const auto v0 = beltrami::generate_v0(*sc.beltrami, sc.grid);
    return reference::source_budget(reference_fields(sc, v0), sc.certificate.budget_horizon,
                                    sc.certificate.quadrature);
  };

  std::vector<double> xs, fs, gs;
  for (double delta : s.scaling.deltas) {
    ScalingRow row;
    row.delta = delta;
    row.max_E0_plus_E1 = std::numeric_limits<double>::quiet_NaN();
    try {
      const auto b = budget_for(delta, base.target_M);
      row.F_budget = b.F_budget;
      row.G_budget = b.G_budget;
    } catch (const beltrami::SupportError& e) {
      throw ScenarioError(std::string("scenario.scaling.deltas: ") + e.what());
    }
    if (s.scaling.simulate) {
      Scenario sc = s;
      sc.beltrami->delta = delta;
      sc.solver.formulation = solver::Formulation::Perturbation;
      const auto run = run_scenario(sc);
      const auto series = certificates::norm_series_from_run(run.run, &*run.reference);
      double m = 0.0;
      for (std::size_t i = 0; i < series.times.size(); ++i) {
        m = std::max(m, series.E0[i] + series.E1_cum[i]);
      }
      row.max_E0_plus_E1 = run.run.blowup ? std::numeric_limits<double>::infinity() : m;
    }
    if (delta > 0.0) {
      xs.push_back(delta);
      fs.push_back(row.F_budget);
      gs.push_back(row.G_budget);
    }
    r.rows.push_back(row);
  }
  r.F_fit = fit_loglog(xs, fs);
  if (r.G_applicable) r.G_fit = fit_loglog(xs, gs);

  r.ratio_delta = s.scaling.ratio_delta > 0.0 ? s.scaling.ratio_delta
                                              : (xs.empty() ? 0.0 : median(xs));
  r.F_budget_M = budget_for(r.ratio_delta, base.target_M).F_budget;
  r.F_budget_scaled_M = budget_for(r.ratio_delta, base.target_M * r.M_factor).F_budget;
  r.M_ratio = r.F_budget_M > 0.0 ? r.F_budget_scaled_M / r.F_budget_M : 0.0;
  return r;
}

std::string scaling_csv(const ScalingResult& r) {
  std::string out = "delta,F_budget,G_budget,max_E0_plus_E1\n";
  char buf[160];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", row.delta, row.F_budget,
                  row.G_budget, row.max_E0_plus_E1);
    out += buf;
  }
  return out;
}

namespace {
nlohmann::json fit_json(const SlopeFit& f) {
  if (!f.valid) return {{"valid", false}, {"points", f.points}};
  return {{"valid", true},         {"slope", f.slope},     {"intercept", f.intercept},
          {"ci95_low", f.ci_low},  {"ci95_high", f.ci_high}, {"points", f.points}};
}
}  // namespace

nlohmann::json to_json(const ScalingResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json j = {{"delta", row.delta}, {"F_budget", row.F_budget}, {"G_budget", row.G_budget}};
    j["max_E0_plus_E1"] = std::isnan(row.max_E0_plus_E1) ? nlohmann::json(nullptr)
                                                         : nlohmann::json(row.max_E0_plus_E1);
    rows.push_back(j);
  }
  nlohmann::json j;
  j["rows"] = rows;
  j["F_fit"] = fit_json(r.F_fit);
  j["G_fit"] = r.G_applicable ? fit_json(r.G_fit) : nlohmann::json(nullptr);
  j["G_applicable"] = r.G_applicable;
  j["M_ratio"] = {{"delta", r.ratio_delta},
                  {"M", r.M},
                  {"M_factor", r.M_factor},
                  {"F_budget_M", r.F_budget_M},
                  {"F_budget_scaled_M", r.F_budget_scaled_M},
                  {"ratio", r.M_ratio}};
  return j;
}

std::vector<OracleRow> oracle_check(const OracleCheckSpec& spec) {
  const GridSpec grid{8, 1.0};
  std::vector<OracleRow> rows;

  for (auto form : {spectral::BilinearForm::Cross, spectral::BilinearForm::Advection}) {
    OracleRow row;
    row.name = form == spectral::BilinearForm::Cross ? "convolution_cross" : "convolution_advection";
    row.tolerance = 1e-12;
    for (std::size_t k = 0; k < spec.convolution_seeds; ++k) {
      const auto a = oracle::random_band_field(grid, spec.seed + 2 * k, true);
      const auto b = oracle::random_band_field(grid, spec.seed + 2 * k + 1, true);
      const auto fast = spectral::dealiased_product(a, b, form);
      const auto slow = oracle::direct_convolution(a, b, form);
      row.max_deviation = std::max(row.max_deviation, oracle::max_relative_deviation(fast, slow));
      ++row.cases;
    }
    row.pass = row.max_deviation <= row.tolerance;
    rows.push_back(row);
  }

  {
    OracleRow row;
    row.name = "critical_norm_reduction";
    row.tolerance = 1e-13;
    for (std::size_t k = 0; k < spec.convolution_seeds; ++k) {
      const auto a = oracle::random_band_field(grid, spec.seed + 1000 + k, false);
      const double fast = norms::critical_norm(a);
      const double slow = oracle::dense_norm_quadrature(a);
      row.max_deviation = std::max(row.max_deviation, std::abs(fast - slow) / slow);
      ++row.cases;
    }
    row.pass = row.max_deviation <= row.tolerance;
    rows.push_back(row);
  }

  {
    OracleRow row;
    row.name = "tiny_trajectory";
    row.tolerance = 1e-10;
    const solver::PhysicsParams params{1.0, 0.5};
    solver::SolverConfig cfg;
    cfg.dt = spec.trajectory_dt;
    cfg.T = spec.trajectory_T;
    cfg.snapshot_stride = 1;
    cfg.keep_trajectory = true;
    for (std::size_t k = 0; k < spec.trajectory_seeds; ++k) {
      solver::StateSnapshot init;
      init.u = 0.2 * oracle::random_band_field(grid, spec.seed + 5000 + 2 * k, true);
      init.h = 0.2 * oracle::random_band_field(grid, spec.seed + 5001 + 2 * k, true);
      const auto fast = solver::run(init, params, cfg);
      const auto slow = oracle::tiny_trajectory(init, params, cfg.dt, cfg.T);
      const std::size_t m = std::min(fast.trajectory.size(), slow.size());
      if (fast.trajectory.size() != slow.size() || fast.blowup) {
        row.max_deviation = std::numeric_limits<double>::infinity();
      }
      for (std::size_t i = 0; i < m; ++i) {
        row.max_deviation =
            std::max({row.max_deviation,
                      oracle::max_relative_deviation(fast.trajectory[i].u, slow[i].u),
                      oracle::max_relative_deviation(fast.trajectory[i].h, slow[i].h)});
      }
      ++row.cases;
    }
    row.pass = row.max_deviation <= row.tolerance;
    rows.push_back(row);
  }
  return rows;
}

std::string oracle_table(const std::vector<OracleRow>& rows) {
  std::ostringstream out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-26s %6s %14s %10s  %s\n", "check", "cases", "max_dev",
                "tolerance", "result");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-26s %6zu %14.3e %10.1e  %s\n", r.name.c_str(), r.cases,
                  r.max_deviation, r.tolerance, r.pass ? "PASS" : "FAIL");
    out << buf;
  }
  return out.str();
}

}  // namespace bmhd::experiment
