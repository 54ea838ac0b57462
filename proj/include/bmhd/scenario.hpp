#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmhd/beltrami.hpp"
#include "bmhd/grid.hpp"
#include "bmhd/reference_flow.hpp"
#include "bmhd/solver.hpp"

namespace bmhd {

/// Schema violation; the message names the offending field.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Small-data part u01, h01: real random divergence-free fields on the band
/// xi_min <= |xi| <= xi_max. The critical norm epsilon is split between them,
/// u01 receiving epsilon * u_share.
struct PerturbationSpec {
  double epsilon = 0.0;
  double xi_min = 0.5;
  double xi_max = 1.0;
  double u_share = 0.5;
  std::uint64_t seed = 1;
};

struct CertificateSpec {
  double C_star = 8.0;
  double budget_horizon = 20.0;
  reference::QuadratureSpec quadrature;
  std::size_t lei_lin_samples = 1000000;
  std::size_t ratio_samples = 100000;
  /// Times at which the support of F is checked.
  std::vector<double> support_check_times{0.0, 1.0};
};

struct ExploratoryFlags {
  bool allow_mu_zero = false;
  bool allow_hermitian_v0 = false;
};

struct ScalingSpec {
  std::vector<double> deltas{0.025, 0.05, 0.1, 0.2};
  double M_factor = 2.0;
  /// Delta at which the M -> M_factor M ratio is measured (0: the median delta).
  double ratio_delta = 0.0;
  /// Also run the perturbation system for each delta (max E0 + E1 column).
  bool simulate = false;
};

/// Complete experiment description. Every field has a default; from_json
/// fills the defaults and to_json writes them all back out.
struct Scenario {
  GridSpec grid{32, 0.25};
  solver::PhysicsParams physics{1.0, 0.5};
  std::optional<beltrami::BeltramiSpec> beltrami;
  PerturbationSpec perturbation;
  solver::SolverConfig solver;
  CertificateSpec certificate;
  ExploratoryFlags exploratory;
  std::uint64_t seed = 0;
  ScalingSpec scaling;

  /// Parses and validates. Throws ScenarioError naming the field.
  static Scenario from_json(const nlohmann::json& j);
  static Scenario load(const std::string& path);
  nlohmann::json to_json() const;

  /// Cross-field constraints: perturbation formulation needs a beltrami
  /// block, mu = 0 and the hermitian variant need their exploratory flags,
  /// value ranges. Throws ScenarioError. Emits a warning when the grid does
  /// not resolve the quadratic interactions of the shell.
  void validate() const;

  /// Replaces the top-level seed and every derived seed.
  void override_seed(std::uint64_t s);
};

}  // namespace bmhd
