#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "bmhd/certificates.hpp"
#include "bmhd/experiment.hpp"
#include "bmhd/fft.hpp"
#include "bmhd/norms.hpp"
#include "bmhd/scenario.hpp"
#include "bmhd/spectral_ops.hpp"

using namespace bmhd;
namespace fs = std::filesystem;
namespace ex = bmhd::experiment;
namespace cert = bmhd::certificates;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

Scenario scenario(const std::string& name) {
  return Scenario::load((fs::path(BMHD_SOURCE_DIR) / "scenarios" / name).string());
}

std::string fmt(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_abs(const SpectralVectorField& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, modulus(a.at(i)));
  return m;
}

double rel_error(const SpectralVectorField& got, const SpectralVectorField& want) {
  double m = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const CVec3 a = got.at(i), b = want.at(i);
    m = std::max(m, modulus(CVec3{a[0] - b[0], a[1] - b[1], a[2] - b[2]}));
  }
  return m / max_abs(want);
}

/// Relative error of the final state against the exact modal decay.
double decay_error(const Scenario& s, const ex::RunBundle& b) {
  const double T = b.run.final_state.t;
  const auto& bel = *s.beltrami;
  const auto u = complex(bel.alpha1 * std::exp(-s.physics.nu * T), 0.0) * b.data.v0;
  const auto h = complex(bel.alpha2 * std::exp(-s.physics.mu * T), 0.0) * b.data.v0;
  return std::max(rel_error(b.run.final_state.u, u), rel_error(b.run.final_state.h, h));
}

Outcome exact_decay() {
  const auto s = scenario("beltrami_decay.json");
  const auto t0 = std::chrono::steady_clock::now();
  const auto b = ex::run_scenario(s);
  const double secs = seconds_since(t0);
  if (b.run.blowup) return {false, "blow-up: " + b.run.blowup_message};
  const double err = decay_error(s, b);
  return {err <= 1e-6 && secs < 60.0,
          fmt("rel_err=%.3e (tol 1e-6), T=%.3f, runtime=%.1fs (limit 60s)", err,
              b.run.final_state.t, secs)};
}

Outcome formulation_equivalence() {
  auto s = scenario("formulation_check.json");
  const auto pert = ex::run_scenario(s);
  s.solver.formulation = solver::Formulation::Primitive;
  const auto prim = ex::run_scenario(s);
  if (pert.run.blowup || prim.run.blowup) return {false, "blow-up in one of the runs"};
  const auto full = ex::full_fields(pert, pert.run.final_state);
  const double eu = rel_error(full.u, prim.run.final_state.u);
  const double eh = rel_error(full.h, prim.run.final_state.h);
  const double err = std::max(eu, eh);
  return {err <= 1e-6, fmt("delta=%.3f, T=%.3f, rel_err u=%.3e h=%.3e (tol 1e-6)", s.beltrami->delta,
                           full.t, eu, eh)};
}

Outcome oracle_equivalence() {
  const auto rows = ex::oracle_check({});
  bool pass = rows.size() == 4;
  std::string detail;
  for (const auto& r : rows) {
    pass = pass && r.pass;
    detail += fmt("%s=%.2e/%.0e (%zu) ", r.name.c_str(), r.max_deviation, r.tolerance, r.cases);
  }
  return {pass, detail};
}

Outcome structural_invariants() {
  const auto real = ex::run_scenario(scenario("real_invariants.json"));
  const auto cplx = ex::run_scenario(scenario("determinism.json"));
  if (real.run.blowup || cplx.run.blowup) return {false, "blow-up"};
  const double div = std::max(real.run.max_div_residual, cplx.run.max_div_residual);
  const bool pass = real.run.real_valued && div <= 1e-11 &&
                    real.run.max_energy_balance <= 1e-8 && real.run.max_transfer <= 1e-10;
  return {pass, fmt("div=%.2e (tol 1e-11), energy_balance=%.2e (tol 1e-8), transfer=%.2e (tol "
                    "1e-10) on the real run; complex run div=%.2e",
                    div, real.run.max_energy_balance, real.run.max_transfer,
                    cplx.run.max_div_residual)};
}

Outcome proof_inequalities() {
  std::string detail;
  bool pass = true;

  const auto ll = cert::check_lei_lin(1000000, cert::default_pair_sampler(), 1);
  pass = pass && ll.pass && ll.min_value >= 2.0 - 1e-12;
  detail += fmt("lei_lin min=%.15f; ", ll.min_value);

  for (double delta : {0.05, 0.1}) {
    beltrami::BeltramiSpec spec;
    spec.delta = delta;
    spec.cap_k = 0.5;
    const auto v0 = beltrami::generate_v0(spec, GridSpec{64, 1.0 / 16.0});
    const auto r = cert::check_ratio_bound(spec, 100000, 2, &v0);
    pass = pass && r.pass && r.max_value <= 10.0 * delta;
    detail += fmt("ratio(d=%.2f)=%.4f<=%.2f; ", delta, r.max_value, 10.0 * delta);

    const GridSpec g{64, 1.0 / 8.0};
    const auto w = beltrami::generate_v0(spec, g);
    const reference::ReferenceFields ref{w, complex(1.5, 0.0) * w, 1.0, 0.5};
    double worst = 0.0;
    for (double t : {0.0, 0.5, 1.0}) {
      worst = std::max(worst, cert::check_support_bound(reference::assemble_F(ref, t).field, 0.5));
    }
    pass = pass && worst <= 1e-10;
    detail += fmt("F mass below %.4f (d=%.2f)=%.1e; ", cert::support_threshold(0.5), delta, worst);
  }

  const auto e1 = cert::check_exponential_difference(1.0, 0.5, 0.05);
  cert::ExpDiffGrid fine;
  fine.t_points = 401;
  fine.pairs = 4000;
  fine.seed = 4;
  const auto e2 = cert::check_exponential_difference(1.0, 0.5, 0.05, fine);
  const double c1 = e1.empirical_constant, c2 = e2.empirical_constant;
  const double spread = std::abs(c1 - c2) / std::max(c1, c2);
  pass = pass && std::isfinite(c1) && std::isfinite(c2) && c1 > 0.0 && spread <= 0.1;
  detail += fmt("exp_diff C=%.4f/%.4f (spread %.2f%%)", c1, c2, 100.0 * spread);
  return {pass, detail};
}

Outcome source_scaling() {
  const auto s = scenario("scaling.json");
  const auto r = ex::scaling_study(s);
  auto in = [](double x, double lo, double hi) { return x >= lo && x <= hi; };
  bool pass = r.F_fit.valid && in(r.F_fit.slope, 0.8, 1.2);
  std::string detail = fmt("F slope=%.3f [%.2f, %.2f]", r.F_fit.slope, r.F_fit.ci_low, r.F_fit.ci_high);
  if (r.G_applicable) {
    pass = pass && r.G_fit.valid && in(r.G_fit.slope, 0.8, 1.2);
    detail += fmt(", G slope=%.3f [%.2f, %.2f]", r.G_fit.slope, r.G_fit.ci_low, r.G_fit.ci_high);
  }
  detail += " (target [0.8, 1.2])";
  pass = pass && in(r.M_ratio, 3.2, 4.8);
  detail += fmt(", M ratio=%.4f (target 4 +- 20%%)", r.M_ratio);
  double worst = 0.0;
  for (const auto& row : r.rows) {
    worst = std::max(worst, (row.F_budget + row.G_budget) / (r.M * r.M * row.delta));
  }
  detail += fmt(", max (F+G)/(M^2 delta)=%.4f", worst);
  return {pass, detail};
}

Outcome stability_envelope() {
  const auto s = scenario("compliant.json");
  const auto t0 = std::chrono::steady_clock::now();
  const auto b = ex::run_scenario(s);
  if (b.run.blowup) return {false, "blow-up: " + b.run.blowup_message};
  const auto rep = ex::certify(s, b);
  const double secs = seconds_since(t0);
  bool ineq = true;
  for (const auto& q : rep.inequalities) ineq = ineq && q.pass;
  const bool pass = rep.envelope_ok && rep.decay_ratio < 0.1;
  return {pass, fmt("delta0=%.4e, max(E0+E1)=%.4e, C_star=%g, measured=%.4f, E0(T)/max E0=%.2e "
                    "(tol 0.1), along-run inequalities %s, runtime=%.0fs",
                    rep.delta0, rep.max_E0_plus_E1, rep.C_star, rep.measured_constant,
                    rep.decay_ratio, ineq ? "pass" : "FAIL", secs)};
}

Outcome solver_order() {
  auto s = scenario("beltrami_decay.json");
  std::vector<double> dts{4e-3, 2e-3, 1e-3}, errs;
  for (double dt : dts) {
    s.solver.dt = dt;
    s.solver.snapshot_stride = 1000000;
    const auto b = ex::run_scenario(s);
    if (b.run.blowup) return {false, "blow-up"};
    errs.push_back(decay_error(s, b));
  }
  const auto fit = ex::fit_loglog(dts, errs);
  const bool pass = fit.valid && std::abs(fit.slope - 4.0) <= 0.2;
  return {pass, fmt("errors %.3e %.3e %.3e, slope=%s (target 4 +- 0.2)", errs[0], errs[1], errs[2],
                    fit.valid ? fmt("%.3f", fit.slope).c_str() : "undefined")};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BMHD_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "bmhd_acceptance_determinism";
  fs::remove_all(dir);
  const std::string sc =
      (fs::path(BMHD_SOURCE_DIR) / "scenarios" / "determinism.json").string();
  const int a = run_cli("run --scenario " + sc + " --seed 23 --threads 1 --out " + (dir / "a").string());
  const int b = run_cli("run --scenario " + sc + " --seed 23 --threads 1 --out " + (dir / "b").string());
  if (a != 0 || b != 0) return {false, fmt("exit codes %d %d", a, b)};
  bool pass = true;
  std::string detail;
  for (const char* f : {"diagnostics.csv", "norms.csv"}) {
    const auto x = slurp(dir / "a" / f), y = slurp(dir / "b" / f);
    const bool same = !x.empty() && x == y;
    pass = pass && same;
    detail += fmt("%s %zu bytes %s; ", f, x.size(), same ? "identical" : "DIFFER");
  }
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  retain_large_allocations();
  set_fft_threads(1);
  const std::vector<Criterion> all{
      {1, "exact Beltrami decay", exact_decay},
      {2, "formulation equivalence", formulation_equivalence},
      {3, "oracle equivalence", oracle_equivalence},
      {4, "structural invariants", structural_invariants},
      {5, "proof-inequality suite", proof_inequalities},
      {6, "source scaling", source_scaling},
      {7, "stability envelope", stability_envelope},
      {8, "solver order", solver_order},
      {9, "determinism", determinism},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  bool ok = true;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    ok = ok && o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return ok ? 0 : 1;
}
