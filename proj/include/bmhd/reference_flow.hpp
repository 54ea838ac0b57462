#pragma once

#include <array>
#include <deque>
#include <utility>
#include <vector>

#include "bmhd/field.hpp"

/// Exact heat flows f, g with data u02 = alpha1 v0, h02 = alpha2 v0 and the
/// source terms they generate in the perturbation system for U = u - f,
/// H = h - g.
namespace bmhd::reference {

struct ReferenceFields {
  SpectralVectorField u02;
  SpectralVectorField h02;
  double nu = 1.0;
  double mu = 1.0;

  /// Throws std::invalid_argument for grid mismatch, non-positive
  /// diffusivities or data that is not divergence-free.
  void validate() const;
};

/// f(t) = exp(-nu |xi|^2 t) u02. Throws for t < 0.
SpectralVectorField evaluate_f(const ReferenceFields& ref, double t);
/// g(t) = exp(-mu |xi|^2 t) h02. Throws for t < 0.
SpectralVectorField evaluate_g(const ReferenceFields& ref, double t);

struct SourceTerm {
  SpectralVectorField field;
  /// max |form1 - form2| / scale, where scale bounds the size of either
  /// product term (max amplitude of one factor times Wiener norm of the other).
  double cross_form_residual = 0.0;
  double scale = 0.0;
};

/// F = g x (sqrt(-Lap) g - g) - f x (sqrt(-Lap) f - f), cross-checked
/// against g x curl g - f x curl f. Warns when the forms differ by more than
/// 1e-10 relative (data not helical).
SourceTerm assemble_F(const ReferenceFields& ref, double t);
/// G = g.grad f - f.grad g = curl(f x g), computed as the curl of the
/// dealiased cross product and cross-checked against the advective
/// (divergence) form. Warns above 1e-10 relative.
SourceTerm assemble_G(const ReferenceFields& ref, double t);

/// Forcing of the perturbation equations at time t:
///   dU/dt = ... + P(g.grad g - f.grad f) = ... - P F,
///   dH/dt = ... + G.
/// g.grad g - f.grad f differs from -F by a gradient, removed by P.
struct PerturbationSources {
  SpectralVectorField projected_F;  ///< -P F
  SpectralVectorField G;
};

/// Evaluates f, g (spectral and physical) and the sources at requested times,
/// keeping the two most recent times cached. One evaluator per run.
class ReferenceEvaluator {
 public:
  struct Entry {
    double t = -1.0;
    SpectralVectorField f_hat, g_hat;
    PhysicalVectorField f, g;
    PerturbationSources sources;
  };

  explicit ReferenceEvaluator(ReferenceFields ref);

  const ReferenceFields& fields() const { return ref_; }
  const Entry& at(double t);

 private:
  ReferenceFields ref_;
  std::deque<Entry> cache_;
};

/// Exact integrals over [0, inf) of sum |f(t)| cell and sum |g(t)| cell:
/// sum |u02| / (nu |xi|^2) cell and sum |h02| / (mu |xi|^2) cell.
std::pair<double, double> closed_form_time_integral(const ReferenceFields& ref);

/// Nodes t_i = T (r^i - 1) / (r^N - 1), i = 0..N (uniform when r = 1).
std::vector<double> stretched_grid(double T, int intervals, double growth);

struct QuadratureSpec {
  int intervals = 16;     ///< coarse level; the fine level uses 2N nested nodes
  double growth = 1.25;   ///< coarse node ratio; the fine level uses sqrt(growth)
  double tolerance = 1e-2;  ///< requested relative error of the Richardson value
};

/// Richardson-extrapolated stretched trapezoid of the Wiener norms of f and g
/// over [0, T] (no tail). Used to validate the quadrature machinery.
std::pair<double, double> quadrature_time_integral(const ReferenceFields& ref, double T,
                                                   const QuadratureSpec& spec = {});

/// Critical norms of F and G at time t through the fast (single-form) path.
struct SourceNorms {
  double F = 0.0;
  double G = 0.0;
};
SourceNorms source_critical_norms(const ReferenceFields& ref, double t);

struct SourceBudget {
  double F_budget = 0.0;  ///< Richardson quadrature on [0, T] plus tail bound
  double G_budget = 0.0;
  double T = 0.0;
  double F_quadrature = 0.0;
  double G_quadrature = 0.0;
  double F_tail = 0.0;
  double G_tail = 0.0;
  double quadrature_error_estimate = 0.0;  ///< |T_2N - T_N| / 3, F and G summed
  bool converged = true;
};

/// Time integrals over [0, inf) of sum |F|/|xi| cell and sum |G|/|xi| cell.
/// The tail beyond T is bounded analytically from norms measured at T and the
/// smallest support frequency. Throws for T <= 0.
SourceBudget source_budget(const ReferenceFields& ref, double T, const QuadratureSpec& spec = {});

}  // namespace bmhd::reference
