#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmhd/field.hpp"
#include "bmhd/reference_flow.hpp"

namespace bmhd::solver {

struct PhysicsParams {
  double nu = 1.0;
  double mu = 1.0;
  /// Accept mu = 0 (non-resistive open problem). No theorem claim attaches.
  bool exploratory = false;

  void validate() const;
};

enum class Formulation { Primitive, Perturbation };

const char* to_string(Formulation f);
Formulation formulation_from_string(const std::string& s);

struct SolverConfig {
  double dt = 1e-3;
  double T = 1.0;
  Formulation formulation = Formulation::Primitive;
  int snapshot_stride = 10;
  /// Blow-up when the largest coefficient modulus exceeds this multiple of
  /// its initial value.
  double blowup_threshold = 1e8;
  /// Test hook: drop nonlinear and source terms, leaving pure diffusion.
  bool linear_only = false;
  /// Keep every snapshot in RunResult::trajectory.
  bool keep_trajectory = false;

  void validate() const;
};

/// State at time t. For the perturbation formulation u and h hold U and H.
struct StateSnapshot {
  double t = 0.0;
  SpectralVectorField u;
  SpectralVectorField h;
};

struct StateDerivative {
  SpectralVectorField du;
  SpectralVectorField dh;
};

class BlowupDetected : public std::runtime_error {
 public:
  BlowupDetected(double t, const std::string& what) : std::runtime_error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

/// Quadratic terms of the primitive system without diffusion:
///   -P div(u (x) u - h (x) h),  -P div(u (x) h - h (x) u).
StateDerivative nonlinear_primitive(const SpectralVectorField& u, const SpectralVectorField& h);
/// Quadratic terms and sources of the perturbation system without diffusion:
///   -P div(U(x)U + f(x)U + U(x)f - H(x)H - g(x)H - H(x)g) - P F,
///   -P div(U(x)H + f(x)H + U(x)g - H(x)U - g(x)U - H(x)f) + G.
StateDerivative nonlinear_perturbation(const SpectralVectorField& U, const SpectralVectorField& H,
                                       reference::ReferenceEvaluator& ref, double t);

/// Full right-hand sides including diffusion.
StateDerivative rhs_primitive(const StateSnapshot& s, const PhysicsParams& p);
StateDerivative rhs_perturbation(const StateSnapshot& s, reference::ReferenceEvaluator& ref,
                                 const PhysicsParams& p);

struct PreflightReport {
  double max_speed = 0.0;  ///< max over the grid of |u| and |h| (full fields)
  double dx = 0.0;
  double dt_limit = 0.0;   ///< 0.5 dx / max_speed (infinite for a zero state)
  bool ok = true;
};

PreflightReport preflight(const StateSnapshot& initial, const SolverConfig& config,
                          reference::ReferenceEvaluator* ref);

/// Integrating-factor (Lawson) RK4. Diffusion is applied exactly through
/// exp(-kappa |xi|^2 dt); every stage is re-projected onto divergence-free
/// fields.
class Stepper {
 public:
  Stepper(const GridSpec& grid, PhysicsParams params, SolverConfig config,
          reference::ReferenceEvaluator* ref = nullptr);

  /// Advances by config.dt. Throws BlowupDetected on non-finite coefficients.
  StateSnapshot step(const StateSnapshot& s);

 private:
  StateDerivative nonlinear(const SpectralVectorField& u, const SpectralVectorField& h, double t);
  void propagate(StateDerivative& y, bool half) const;

  GridSpec grid_;
  PhysicsParams params_;
  SolverConfig config_;
  reference::ReferenceEvaluator* ref_;
  std::vector<double> eu_half_, eu_full_, eh_half_, eh_full_;
};

/// One step from s with a fresh stepper.
StateSnapshot step(const StateSnapshot& s, const PhysicsParams& params, const SolverConfig& config,
                   reference::ReferenceEvaluator* ref = nullptr);

/// One row per snapshot, in the frozen CSV column order first.
struct DiagnosticsRow {
  double t = 0.0;
  double energy_u = 0.0;  ///< 0.5 int |u|^2 of the full velocity
  double energy_h = 0.0;
  double E0_U = 0.0;      ///< critical norm of the evolved velocity variable
  double E0_H = 0.0;
  double E1_cum = 0.0;    ///< int_0^t nu sum|xi||U| + mu sum|xi||H| (trapezoid over steps)
  double div_residual = 0.0;
  double max_amp = 0.0;
  /// |dE + int D| / int D over the interval ending here (0 for the first row).
  double energy_balance = 0.0;
  /// Re<N, state> / (|N_u||u| + |N_h||h|) for the full fields.
  double transfer = 0.0;
  double weighted = 0.0;  ///< nu sum|xi||U| + mu sum|xi||H| at t
  double wiener = 0.0;    ///< sum (|U| + |H|) cell
  double max_speed = 0.0;
};

const std::vector<std::string>& csv_columns();
std::string csv_header();
std::string csv_row(const DiagnosticsRow& r);

struct RunResult {
  bool blowup = false;
  double blowup_time = 0.0;
  std::string blowup_message;
  StateSnapshot final_state;
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<StateSnapshot> trajectory;
  PreflightReport preflight;
  /// True when both evolved fields (and the reference data) are real, so the
  /// L2 energy identities apply.
  bool real_valued = false;
  double max_div_residual = 0.0;
  double max_energy_balance = 0.0;
  double max_transfer = 0.0;
  int steps = 0;
};

using SnapshotCallback = std::function<void(const StateSnapshot&)>;

/// Fixed-step integration to config.T. Throws std::invalid_argument when the
/// preflight check fails or the configuration is inconsistent; blow-up is
/// reported in the result rather than thrown.
RunResult run(const StateSnapshot& initial, const PhysicsParams& params, const SolverConfig& config,
              reference::ReferenceEvaluator* ref = nullptr, const SnapshotCallback& on_snapshot = {});

}  // namespace bmhd::solver
