#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmhd/beltrami.hpp"
#include "bmhd/certificates.hpp"
#include "bmhd/reference_flow.hpp"
#include "bmhd/scenario.hpp"
#include "bmhd/solver.hpp"

/// Orchestration shared by the CLI and the acceptance tests: scenario in,
/// data, runs, certificates and studies out.
namespace bmhd::experiment {

struct DataBundle {
  SpectralVectorField v0;  ///< zero field when the scenario has no beltrami block
  SpectralVectorField u01;
  SpectralVectorField h01;
  beltrami::InitialData initial;
  std::optional<beltrami::PropertyReport> properties;
};

/// v0 from the beltrami block (zero without one), u01 and h01 as random real
/// solenoidal fields carrying epsilon * u_share and epsilon * (1 - u_share),
/// and the composed data.
DataBundle build_data(const Scenario& s);

nlohmann::json to_json(const beltrami::PropertyReport& r);

/// Heat-flow data alpha1 v0, alpha2 v0. Throws ScenarioError without a beltrami block.
reference::ReferenceFields reference_fields(const Scenario& s, const SpectralVectorField& v0);

struct RunBundle {
  DataBundle data;
  std::optional<reference::ReferenceFields> reference;  ///< set for the perturbation formulation
  solver::RunResult run;
};

/// Primitive: evolves (u0, h0). Perturbation: evolves (u01, h01) around f, g.
RunBundle run_scenario(const Scenario& s, const solver::SnapshotCallback& on_snapshot = {});

/// (u, h) at time t from an evolved state: U + f(t), H + g(t) for the
/// perturbation formulation, the state itself otherwise.
solver::StateSnapshot full_fields(const RunBundle& b, const solver::StateSnapshot& state);

nlohmann::json run_summary(const Scenario& s, const RunBundle& b);

/// Source budgets, inequality suite and the envelope verdict for a finished
/// run. Requires the perturbation formulation when the scenario has a
/// beltrami block (the norms are those of U, H).
certificates::CertificateReport certify(const Scenario& s, const RunBundle& b);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;   ///< 95% Student-t interval for the slope
  double ci_high = 0.0;
  std::size_t points = 0;
  bool valid = false;    ///< at least three positive points
};

/// Least-squares fit of log y against log x over the points with x > 0, y > 0.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingRow {
  double delta = 0.0;
  double F_budget = 0.0;
  double G_budget = 0.0;
  double max_E0_plus_E1 = 0.0;  ///< NaN unless the study simulates
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  SlopeFit F_fit;
  SlopeFit G_fit;
  bool G_applicable = true;  ///< false for nu = mu with parallel data (G = 0)
  double ratio_delta = 0.0;
  double M = 0.0;
  double M_factor = 2.0;
  double F_budget_M = 0.0;
  double F_budget_scaled_M = 0.0;
  double M_ratio = 0.0;      ///< F_budget(M_factor M) / F_budget(M)
};

/// Budgets for every delta of the scaling block at the scenario's M, nu, mu, k.
/// Throws ScenarioError without a beltrami block or with fewer than 3 deltas.
ScalingResult scaling_study(const Scenario& s);
std::string scaling_csv(const ScalingResult& r);
nlohmann::json to_json(const ScalingResult& r);

struct OracleRow {
  std::string name;
  std::size_t cases = 0;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct OracleCheckSpec {
  std::size_t convolution_seeds = 100;
  std::size_t trajectory_seeds = 100;
  double trajectory_T = 0.1;
  double trajectory_dt = 1e-3;
  std::uint64_t seed = 0;
};

/// FFT path against the brute-force oracle at n = 8.
std::vector<OracleRow> oracle_check(const OracleCheckSpec& spec = {});
std::string oracle_table(const std::vector<OracleRow>& rows);

}  // namespace bmhd::experiment
