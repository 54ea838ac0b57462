#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmhd/beltrami.hpp"
#include "bmhd/random.hpp"
#include "bmhd/reference_flow.hpp"
#include "bmhd/solver.hpp"

/// Norms of the energy estimate and numerical checks of every inequality used
/// to close it.
namespace bmhd::certificates {

/// Per-snapshot norms of a perturbation trajectory.
struct NormSeries {
  std::vector<double> times;
  std::vector<double> E0;        ///< sum (|U| + |H|) / |xi| cell
  std::vector<double> E1_cum;    ///< int_0^t nu sum |xi||U| + mu sum |xi||H| cell
  std::vector<double> weighted;  ///< the E1 integrand at each time
  std::vector<double> wiener;    ///< sum (|U| + |H|) cell
  std::vector<double> wiener_f;  ///< sum |f| cell (0 without reference fields)
  std::vector<double> wiener_g;
};

/// E0 per snapshot and E1_cum by composite trapezoid over the snapshot times.
/// Throws std::invalid_argument when the snapshots are not ordered in time.
NormSeries accumulate_norm_series(const std::vector<solver::StateSnapshot>& trajectory,
                                  const solver::PhysicsParams& params,
                                  const reference::ReferenceFields* ref = nullptr);

/// Same series from the per-snapshot rows of a run (E1_cum there is
/// integrated over every step rather than every snapshot).
NormSeries norm_series_from_run(const solver::RunResult& run,
                                const reference::ReferenceFields* ref = nullptr);

struct InequalityStats {
  std::string name;
  std::size_t samples = 0;
  double min_value = 0.0;
  double max_value = 0.0;
  double max_violation = 0.0;       ///< largest amount by which the claim fails (0 if none)
  double empirical_constant = 0.0;  ///< measured constant where the claim has one
  double bound = 0.0;               ///< claimed bound, where applicable
  bool pass = false;
  std::string note;
};

nlohmann::json to_json(const InequalityStats& s);

/// Draws (xi, eta) with xi != eta and eta != 0.
using PairSampler = std::function<void(Rng& rng, Vec3& xi, Vec3& eta)>;
/// Log-uniform magnitudes over 12 decades and uniform directions.
PairSampler default_pair_sampler();

/// a/b + b/a >= 2 with a = |xi - eta|, b = |eta|. Records the minimum of
/// a/b + b/a; passes when it is at least 2 - 1e-12. Samples are drawn in
/// chunks from fixed substreams of `seed`. Throws std::invalid_argument for a
/// zero-norm sample.
InequalityStats check_lei_lin(std::size_t sample_count, const PairSampler& sampler,
                              std::uint64_t seed = 1);
/// a/b + b/a for one pair of moduli; throws for a zero modulus.
double lei_lin_value(double a, double b);

/// sum_{0 < |xi| < sqrt(1 - k^2)/2} |F| cell / sum |F| cell (0 for F = 0).
double check_support_bound(const SpectralVectorField& F_hat, double cap_k);
double support_threshold(double cap_k);

/// ||a|^2 - |b|^2| / (|a|^2 + |b|^2)
double modulus_ratio(double a, double b);

/// Max of modulus_ratio over pairs (xi - eta, eta) with both in the shell and
/// cap of `spec`. With a support field, pairs are drawn from its nonzero
/// modes; otherwise from the continuum shell-cap region. The two extreme
/// pairs (1 + delta, 1 - delta) and (1, 1) are always included. Passes when
/// the maximum is at most 10 delta. Throws for delta <= 0.
InequalityStats check_ratio_bound(const beltrami::BeltramiSpec& spec, std::size_t sample_count,
                                  std::uint64_t seed = 2,
                                  const SpectralVectorField* support = nullptr);

/// Left side and C-free right side of the exponential-difference bound at
/// one sample: |exp(-nu A t - mu B t) - exp(-nu B t - mu A t)| and
/// exp(-(m/2)(A + B) t) |A - B| / (A + B), m = min(nu, mu).
struct ExpDiffSample {
  double lhs = 0.0;
  double rhs = 0.0;
};
ExpDiffSample exponential_difference_sample(double nu, double mu, double t, double A, double B);

struct ExpDiffGrid {
  double t_max = 10.0;
  int t_points = 201;         ///< uniform grid on [0, t_max]
  std::size_t pairs = 2000;   ///< random (A, B) in [(1-delta)^2, (1+delta)^2]^2
  std::uint64_t seed = 3;
};

/// Smallest C with lhs <= C rhs over the grid (samples with rhs = 0 are
/// skipped; their lhs is 0 as well). nu = mu returns 0 with a note.
InequalityStats check_exponential_difference(double nu, double mu, double delta,
                                             const ExpDiffGrid& grid = {});

struct CertificateReport {
  double delta0 = 0.0;
  double critical_u01 = 0.0;
  double critical_h01 = 0.0;
  reference::SourceBudget budget;
  double C_star = 0.0;
  double max_E0_plus_E1 = 0.0;
  double measured_constant = 0.0;  ///< max(E0 + E1) / delta0
  bool envelope_ok = false;
  double sup_E0 = 0.0;
  double E0_final = 0.0;
  double E1_final = 0.0;
  bool decay_onset = false;           ///< E0(T) < max E0
  double decay_ratio = 0.0;           ///< E0(T) / max E0
  double bootstrap_margin = 0.0;      ///< sup E0 * E1(T) / delta0
  double L_split = 0.0;               ///< 2 C M with C = C_diag
  double C_diag = 1.0;
  double term_I = 0.0;                ///< int (sum (|U|+|H|) cell)^2 dt
  double term_II = 0.0;               ///< int sum(|U|+|H|) cell * sum(|f|+|g|) cell dt
  double term_I_ratio = 0.0;          ///< I / (sup E0 * E1(T))
  double gronwall_envelope = 0.0;     ///< 8 delta0 exp(C_diag M int sum(|f|+|g|) cell dt)
  bool E1_nondecreasing = true;
  double E0_max_jump = 0.0;
  double E0_jump_allowance = 0.0;     ///< 2 dt_snap max weighted norm
  std::vector<InequalityStats> inequalities;
};

struct CertificateInput {
  const NormSeries* series = nullptr;
  const reference::SourceBudget* budget = nullptr;
  double critical_u01 = 0.0;
  double critical_h01 = 0.0;
  double C_star = 1.0;
  double M = 0.0;
  double tolerance = 1e-300;  ///< E0 values above this count as nonzero
};

/// Throws std::invalid_argument when series or budget are missing.
CertificateReport theorem_certificate(const CertificateInput& in);

nlohmann::json to_json(const CertificateReport& r);
nlohmann::json to_json(const reference::SourceBudget& b);

/// CSV with columns t, E0, E1_cum, weighted, wiener, wiener_f, wiener_g.
std::string norm_series_csv(const NormSeries& s);

}  // namespace bmhd::certificates
