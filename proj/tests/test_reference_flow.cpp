#include <doctest.h>

#include <cmath>

#include "bmhd/beltrami.hpp"
#include "bmhd/norms.hpp"
#include "bmhd/reference_flow.hpp"
#include "bmhd/spectral_ops.hpp"
#include "helpers.hpp"

using namespace bmhd;
using namespace testing;
namespace bt = bmhd::beltrami;
namespace rf = bmhd::reference;
namespace sp = bmhd::spectral;

namespace {

bt::BeltramiSpec cap_spec(double delta, double M = 1.0) {
  bt::BeltramiSpec s;
  s.delta = delta;
  s.cap_k = 0.5;
  s.target_M = M;
  return s;
}

rf::ReferenceFields make_ref(const GridSpec& g, double delta, double a1, double a2, double nu,
                             double mu, double M = 1.0) {
  const auto v0 = bt::generate_v0(cap_spec(delta, M), g);
  return {a1 * v0, a2 * v0, nu, mu};
}

const GridSpec kUnit{32, 0.25};         // delta = 0 shell is the single mode |m| = 4
const GridSpec kShell{64, 1.0 / 8.0};   // resolves 2 (1 + delta) for delta <= 0.2

/// sum |s| cell over modes with |xi| outside [lo, hi]
double mass_outside(const SpectralVectorField& s, double lo, double hi) {
  double out = 0.0, all = 0.0;
  for_each_mode(s.grid(), [&](std::size_t i, const Vec3& xi) {
    const double m = modulus(s.at(i));
    const double k = norm(xi);
    all += m;
    if (k < lo || k > hi) out += m;
  });
  return all == 0.0 ? 0.0 : out / all;
}

}  // namespace

TEST_CASE("heat flows are exact multipliers") {
  const auto ref = make_ref(kUnit, 0.0, 1.0, 2.0, 1.0, 0.5);
  CHECK(max_diff(rf::evaluate_f(ref, 0.0), ref.u02) == 0.0);
  CHECK(max_diff(rf::evaluate_g(ref, 0.0), ref.h02) == 0.0);
  // unit shell: uniform decay e^{-nu t}
  const auto f = rf::evaluate_f(ref, 0.7);
  CHECK(max_diff(f, std::exp(-0.7) * ref.u02) <= 1e-15 * max_modulus(ref.u02));
  const auto g = rf::evaluate_g(ref, 0.7);
  CHECK(max_diff(g, std::exp(-0.35) * ref.h02) <= 1e-15 * max_modulus(ref.h02));
  CHECK_THROWS_AS(rf::evaluate_f(ref, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(rf::evaluate_g(ref, -1e-3), std::invalid_argument);

  const auto shell = make_ref(kShell, 0.1, 1.0, 1.0, 1.0, 0.5);
  CHECK(sp::divergence_residual(rf::evaluate_f(shell, 2.0)) <=
        sp::divergence_residual(shell.u02) + 1e-16);
  const auto step = sp::heat_multiply(rf::evaluate_f(shell, 0.4), shell.nu, 0.6);
  const auto direct = rf::evaluate_f(shell, 1.0);
  CHECK(max_diff(step, direct) <= 1e-14 * max_modulus(direct));
}

TEST_CASE("reference validation") {
  auto ref = make_ref(kUnit, 0.0, 1.0, 1.0, 1.0, 0.5);
  CHECK_NOTHROW(ref.validate());
  ref.mu = 0.0;
  CHECK_THROWS_AS(ref.validate(), std::invalid_argument);
  ref.mu = 0.5;
  ref.u02.set(kUnit.flat_of_mode({1, 0, 0}), {complex(1.0, 0.0), 0.0, 0.0});
  CHECK_THROWS_AS(ref.validate(), std::invalid_argument);
}

TEST_CASE("F vanishes on the unit shell") {
  const auto ref = make_ref(kUnit, 0.0, 1.0, 2.0, 1.0, 0.5);
  for (double t : {0.0, 0.5, 2.0}) {
    const auto F = rf::assemble_F(ref, t);
    CHECK(max_modulus(F.field) <= 1e-13 * F.scale);
  }
}

TEST_CASE("F vanishes for identical heat flows") {
  const auto ref = make_ref(kShell, 0.1, 1.5, 1.5, 0.8, 0.8);
  const auto F = rf::assemble_F(ref, 0.3);
  CHECK(max_modulus(F.field) <= 1e-13 * F.scale);
}

TEST_CASE("F on a shell of width 0.1: both forms agree, support bounds hold") {
  WarningCapture warnings;
  const auto ref = make_ref(kShell, 0.1, 1.0, 2.0, 1.0, 0.5);
  const auto F = rf::assemble_F(ref, 0.5);
  CHECK(F.cross_form_residual <= 1e-10);
  CHECK(warnings.messages.empty());
  CHECK(max_modulus(F.field) > 1e-6 * F.scale);
  const double threshold = 0.5 * std::sqrt(1.0 - 0.25);
  CHECK(mass_outside(F.field, threshold, 1e300) <= 1e-10);
  CHECK(mass_outside(F.field, 0.0, 2.0 * 1.1) <= 1e-10);
}

TEST_CASE("non-helical data is flagged") {
  WarningCapture warnings;
  const auto u = bt::random_solenoidal(kUnit, 0.5, 1.0, 1.0, 3);
  const rf::ReferenceFields ref{u, 0.5 * u, 1.0, 0.5};
  const auto F = rf::assemble_F(ref, 0.0);
  CHECK(F.cross_form_residual > 1e-10);
  CHECK_FALSE(warnings.messages.empty());
}

TEST_CASE("G vanishes when mu = nu") {
  const auto ref = make_ref(kShell, 0.1, 1.0, 2.0, 0.7, 0.7);
  const auto G = rf::assemble_G(ref, 0.4);
  CHECK(max_modulus(G.field) <= 1e-13 * G.scale);
}

TEST_CASE("G vanishes on the unit shell for mu != nu") {
  const auto ref = make_ref(kUnit, 0.0, 1.0, 2.0, 1.0, 0.5);
  const auto G = rf::assemble_G(ref, 0.4);
  CHECK(max_modulus(G.field) <= 1e-13 * G.scale);
}

TEST_CASE("G forms agree and G decays at the shell rate") {
  WarningCapture warnings;
  const double delta = 0.1, nu = 1.0, mu = 0.5;
  const auto ref = make_ref(kShell, delta, 1.0, 2.0, nu, mu);
  const auto G0 = rf::assemble_G(ref, 0.2);
  CHECK(G0.cross_form_residual <= 1e-10);
  CHECK(warnings.messages.empty());
  CHECK(max_modulus(G0.field) > 0.0);
  // |G(xi)| <= |xi| cell sum |f(xi - eta)| |g(eta)| <= 2 (1 + delta) max|f| W(g)
  const double t = 5.0;
  const auto G = rf::assemble_G(ref, t);
  const double bound = 2.0 * (1.0 + delta) * std::exp(-(nu + mu) * std::pow(1.0 - delta, 2) * t) *
                       sp::max_amplitude(ref.u02) * norms::wiener_norm(ref.h02);
  CHECK(max_modulus(G.field) <= bound);
}

TEST_CASE("closed-form time integral") {
  const GridSpec g{8, 1.0};
  SpectralVectorField u(g);
  const double r = 1.0 / std::sqrt(2.0);
  u.set(g.flat_of_mode({0, 0, 1}), {complex(3.0 * r, 0.0), complex(0.0, 3.0 * r), 0.0});
  const rf::ReferenceFields ref{u, u, 1.0, 2.0};
  const auto [If, Ig] = rf::closed_form_time_integral(ref);
  CHECK(If == doctest::Approx(3.0 * g.cell_volume()).epsilon(1e-15));
  CHECK(Ig == doctest::Approx(1.5 * g.cell_volume()).epsilon(1e-15));

  // consistency with the 4M bound on the weighted data norm
  const double M = 2.0;
  const auto shell = make_ref(kShell, 0.2, 1.0, 1.0, 0.5, 2.0, M);
  const auto [a, b] = rf::closed_form_time_integral(shell);
  const double wu = norms::heat_weighted_norm(shell.u02), wh = norms::heat_weighted_norm(shell.h02);
  CHECK(wu <= 4.0 * M);
  CHECK(wh <= 4.0 * M);
  CHECK(a <= wu / shell.nu);
  CHECK(b <= wh / shell.mu);
}

TEST_CASE("stretched quadrature matches the analytic integral") {
  const auto ref = make_ref(kShell, 0.1, 1.0, 2.0, 1.0, 0.5, 3.0);
  const double T = 20.0;
  rf::QuadratureSpec q;
  q.intervals = 64;
  q.growth = 1.06;
  const auto [qf, qg] = rf::quadrature_time_integral(ref, T, q);
  // independent closed form over [0, T]
  double ef = 0.0, eg = 0.0;
  const double cell = kShell.cell_volume();
  for_each_mode(kShell, [&](std::size_t i, const Vec3& xi) {
    const double k2 = dot(xi, xi);
    if (k2 == 0.0) return;
    ef += modulus(ref.u02.at(i)) * (1.0 - std::exp(-ref.nu * k2 * T)) / (ref.nu * k2) * cell;
    eg += modulus(ref.h02.at(i)) * (1.0 - std::exp(-ref.mu * k2 * T)) / (ref.mu * k2) * cell;
  });
  CHECK(std::abs(qf - ef) <= 1e-6 * ef);
  CHECK(std::abs(qg - eg) <= 1e-6 * eg);
}

TEST_CASE("stretched grid nodes") {
  const auto u = rf::stretched_grid(2.0, 4, 1.0);
  REQUIRE(u.size() == 5);
  CHECK(u[1] == doctest::Approx(0.5));
  const auto s = rf::stretched_grid(10.0, 8, 1.5);
  CHECK(s.front() == 0.0);
  CHECK(s.back() == doctest::Approx(10.0).epsilon(1e-15));
  for (std::size_t i = 2; i < s.size(); ++i) {
    CHECK((s[i] - s[i - 1]) / (s[i - 1] - s[i - 2]) == doctest::Approx(1.5).epsilon(1e-12));
  }
}

TEST_CASE("source budgets") {
  SUBCASE("unit shell: both budgets vanish") {
    const auto ref = make_ref(kUnit, 0.0, 1.0, 2.0, 1.0, 0.5);
    const auto b = rf::source_budget(ref, 20.0);
    CHECK(b.F_budget <= 1e-12);
    CHECK(b.G_budget <= 1e-12);
  }
  SUBCASE("mu = nu: G budget vanishes, F budget does not") {
    const auto ref = make_ref(kShell, 0.1, 1.0, 2.0, 0.8, 0.8);
    const auto b = rf::source_budget(ref, 20.0);
    CHECK(b.F_budget > 0.0);
    CHECK(b.G_budget <= 1e-12 * b.F_budget);
  }
  SUBCASE("budgets are nonnegative and the tail shrinks with T") {
    const auto ref = make_ref(kShell, 0.1, 1.0, 2.0, 1.0, 0.5);
    const auto b5 = rf::source_budget(ref, 5.0);
    const auto b20 = rf::source_budget(ref, 20.0);
    CHECK(b5.F_tail >= 0.0);
    CHECK(b5.G_tail >= 0.0);
    CHECK(b20.F_tail < b5.F_tail);
    CHECK(b20.G_tail < b5.G_tail);
    CHECK(b20.F_budget > 0.0);
    CHECK(b20.G_budget > 0.0);
    CHECK(b20.converged);
    CHECK(b20.quadrature_error_estimate <= 1e-2 * (b20.F_budget + b20.G_budget));
    // the budget on [0, 5] plus its tail bound dominates the budget on [0, 20]
    CHECK(b5.F_budget >= b20.F_quadrature * (1.0 - 1e-3));
    CHECK(b5.G_budget >= b20.G_quadrature * (1.0 - 1e-3));
  }
  SUBCASE("nonpositive horizon is rejected") {
    const auto ref = make_ref(kUnit, 0.0, 1.0, 2.0, 1.0, 0.5);
    CHECK_THROWS_AS(rf::source_budget(ref, 0.0), std::invalid_argument);
  }
}

TEST_CASE("evaluator cache returns consistent entries") {
  const auto ref = make_ref(kShell, 0.1, 1.0, 2.0, 1.0, 0.5);
  rf::ReferenceEvaluator ev(ref);
  const auto& e = ev.at(0.3);
  CHECK(e.t == 0.3);
  CHECK(max_diff(e.f_hat, rf::evaluate_f(ref, 0.3)) == 0.0);
  const auto F = rf::assemble_F(ref, 0.3);
  auto pF = sp::leray_project(F.field);
  pF *= -1.0;
  CHECK(max_diff(e.sources.projected_F, pF) <= 1e-12 * max_modulus(pF));
  const auto G = rf::assemble_G(ref, 0.3);
  CHECK(max_diff(e.sources.G, G.field) <= 1e-12 * max_modulus(G.field));
}
