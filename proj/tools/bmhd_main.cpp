#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bmhd/experiment.hpp"
#include "bmhd/fft.hpp"
#include "bmhd/scenario.hpp"
#include "bmhd/snapshot_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kError = 1, kSchema = 2, kBlowup = 3, kCertificate = 4 };

struct Options {
  std::string scenario;
  std::string out = ".";
  int threads = 1;
  std::optional<std::uint64_t> seed;
  bool exploratory = false;
};

bmhd::Scenario load_scenario(const Options& o) {
  if (o.scenario.empty()) throw bmhd::ScenarioError("--scenario is required");
  std::ifstream in(o.scenario);
  if (!in) throw bmhd::ScenarioError("scenario: cannot open " + o.scenario);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw bmhd::ScenarioError("scenario: " + o.scenario + " is not valid JSON: " + e.what());
  }
  if (o.exploratory && j.is_object()) {
    j["exploratory"]["allow_mu_zero"] = true;
    j["exploratory"]["allow_hermitian_v0"] = true;
  }
  auto s = bmhd::Scenario::from_json(j);
  if (o.seed) s.override_seed(*o.seed);
  return s;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

fs::path prepare(const Options& o, const bmhd::Scenario& s) {
  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_json(dir / "scenario.resolved.json", s.to_json());
  return dir;
}

std::string diagnostics_csv(const bmhd::solver::RunResult& r) {
  std::string out = bmhd::solver::csv_header() + "\n";
  for (const auto& row : r.diagnostics) out += bmhd::solver::csv_row(row) + "\n";
  return out;
}

void write_run_outputs(const fs::path& dir, const bmhd::Scenario& s,
                       const bmhd::experiment::RunBundle& b) {
  write_text(dir / "diagnostics.csv", diagnostics_csv(b.run));
  const auto series = bmhd::certificates::norm_series_from_run(
      b.run, b.reference ? &*b.reference : nullptr);
  write_text(dir / "norms.csv", bmhd::certificates::norm_series_csv(series));
  write_json(dir / "run_summary.json", bmhd::experiment::run_summary(s, b));
  const fs::path snaps = dir / "snapshots";
  fs::create_directories(snaps);
  const bool pert = static_cast<bool>(b.reference);
  const auto& fin = b.run.final_state;
  bmhd::write_snapshot(snaps / "final_u.bmhd", fin.u, fin.t,
                       pert ? bmhd::FieldTag::PerturbationU : bmhd::FieldTag::Velocity);
  bmhd::write_snapshot(snaps / "final_h.bmhd", fin.h, fin.t,
                       pert ? bmhd::FieldTag::PerturbationH : bmhd::FieldTag::Magnetic);
}

int cmd_generate(const Options& o) {
  const auto s = load_scenario(o);
  const auto dir = prepare(o, s);
  const auto d = bmhd::experiment::build_data(s);
  bmhd::write_snapshot(dir / "v0.bmhd", d.v0, 0.0, bmhd::FieldTag::V0);
  bmhd::write_snapshot(dir / "u0.bmhd", d.initial.u0, 0.0, bmhd::FieldTag::U0);
  bmhd::write_snapshot(dir / "h0.bmhd", d.initial.h0, 0.0, bmhd::FieldTag::H0);
  bmhd::write_snapshot(dir / "u01.bmhd", d.u01, 0.0, bmhd::FieldTag::U01);
  bmhd::write_snapshot(dir / "h01.bmhd", d.h01, 0.0, bmhd::FieldTag::H01);
  json report;
  report["critical_u01"] = d.initial.critical_u01;
  report["critical_h01"] = d.initial.critical_h01;
  report["properties"] =
      d.properties ? bmhd::experiment::to_json(*d.properties) : json(nullptr);
  write_json(dir / "properties.json", report);
  std::cout << report.dump(2) << "\n";
  return kOk;
}

int cmd_run(const Options& o) {
  const auto s = load_scenario(o);
  const auto dir = prepare(o, s);
  const auto b = bmhd::experiment::run_scenario(s);
  write_run_outputs(dir, s, b);
  if (b.run.blowup) {
    std::cerr << "blow-up detected at t = " << b.run.blowup_time << ": " << b.run.blowup_message
              << "\n";
    return kBlowup;
  }
  std::cout << "run completed: " << b.run.steps << " steps to t = " << b.run.final_state.t << "\n";
  return kOk;
}

int cmd_certify(const Options& o) {
  const auto s = load_scenario(o);
  const auto dir = prepare(o, s);
  const auto b = bmhd::experiment::run_scenario(s);
  write_run_outputs(dir, s, b);
  if (b.run.blowup) {
    std::cerr << "blow-up detected at t = " << b.run.blowup_time << ": " << b.run.blowup_message
              << "\n";
    return kBlowup;
  }
  const auto report = bmhd::experiment::certify(s, b);
  const json j = bmhd::certificates::to_json(report);
  write_json(dir / "certificate.json", j);
  std::printf("delta0 = %.6e  max(E0+E1) = %.6e  C_star = %g  measured = %.4g  envelope %s\n",
              report.delta0, report.max_E0_plus_E1, report.C_star, report.measured_constant,
              report.envelope_ok ? "ok" : "FAILED");
  for (const auto& q : report.inequalities) {
    std::printf("  %-24s %s\n", q.name.c_str(), q.pass ? "pass" : "FAIL");
  }
  return report.envelope_ok ? kOk : kCertificate;
}

int cmd_scaling(const Options& o) {
  const auto s = load_scenario(o);
  const auto dir = prepare(o, s);
  const auto r = bmhd::experiment::scaling_study(s);
  write_text(dir / "scaling.csv", bmhd::experiment::scaling_csv(r));
  const json j = bmhd::experiment::to_json(r);
  write_json(dir / "scaling.json", j);
  std::cout << bmhd::experiment::scaling_csv(r);
  std::cout << "F slope: " << j["F_fit"].dump() << "\n";
  if (r.G_applicable) std::cout << "G slope: " << j["G_fit"].dump() << "\n";
  std::cout << "M ratio: " << r.M_ratio << "\n";
  return kOk;
}

int cmd_oracle(const Options& o, std::size_t seeds) {
  bmhd::experiment::OracleCheckSpec spec;
  spec.convolution_seeds = seeds;
  spec.trajectory_seeds = seeds;
  if (o.seed) spec.seed = *o.seed;
  const auto rows = bmhd::experiment::oracle_check(spec);
  const std::string table = bmhd::experiment::oracle_table(rows);
  std::cout << table;
  bool ok = true;
  json j = json::array();
  for (const auto& r : rows) {
    ok = ok && r.pass;
    j.push_back({{"name", r.name},
                 {"cases", r.cases},
                 {"max_deviation", r.max_deviation},
                 {"tolerance", r.tolerance},
                 {"pass", r.pass}});
  }
  if (o.out != ".") {
    fs::create_directories(o.out);
    write_json(fs::path(o.out) / "oracle.json", j);
  }
  return ok ? kOk : kCertificate;
}

}  // namespace

int main(int argc, char** argv) {
  bmhd::retain_large_allocations();
  CLI::App app{"Pseudo-spectral MHD simulator and verification harness"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--threads", o.threads, "FFT threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "override every seed of the scenario");
  app.add_flag("--exploratory", o.exploratory, "allow mu = 0 and the hermitian v0 variant");

  auto scenario_opts = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--scenario", o.scenario, "scenario JSON file");
    if (required) opt->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "FFT threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "override every seed of the scenario");
    sub->add_flag("--exploratory", o.exploratory, "allow mu = 0 and the hermitian v0 variant");
  };
  auto* gen = app.add_subcommand("generate-data", "write v0, u0, h0, u01, h01 and a property report");
  scenario_opts(gen, true);
  auto* run = app.add_subcommand("run", "evolve the scenario and write diagnostics");
  scenario_opts(run, true);
  auto* cert = app.add_subcommand("certify", "run and certify the energy envelope");
  scenario_opts(cert, true);
  auto* scal = app.add_subcommand("scaling-study", "source budgets against delta");
  scenario_opts(scal, true);
  auto* orc = app.add_subcommand("oracle-check", "compare the FFT path with brute force at n = 8");
  scenario_opts(orc, false);
  std::size_t oracle_seeds = 100;
  orc->add_option("--seeds", oracle_seeds, "random cases per check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kSchema;
  }

  try {
    bmhd::set_fft_threads(o.threads);
    if (*gen) return cmd_generate(o);
    if (*run) return cmd_run(o);
    if (*cert) return cmd_certify(o);
    if (*scal) return cmd_scaling(o);
    if (*orc) return cmd_oracle(o, oracle_seeds);
  } catch (const bmhd::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSchema;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
