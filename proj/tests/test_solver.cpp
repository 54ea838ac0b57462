#include <doctest.h>

#include <cmath>
#include <limits>

#include "bmhd/beltrami.hpp"
#include "bmhd/norms.hpp"
#include "bmhd/oracle.hpp"
#include "bmhd/reference_flow.hpp"
#include "bmhd/solver.hpp"
#include "bmhd/spectral_ops.hpp"
#include "helpers.hpp"

using namespace bmhd;
using namespace testing;
namespace bt = bmhd::beltrami;
namespace rf = bmhd::reference;
namespace sv = bmhd::solver;
namespace sp = bmhd::spectral;

namespace {

bt::BeltramiSpec cap_spec(double delta, double M = 1.0) {
  bt::BeltramiSpec s;
  s.delta = delta;
  s.cap_k = 0.5;
  s.target_M = M;
  return s;
}

/// bound on one quadratic term: |xi|max * max|a| * W(b)
double quad_scale(const SpectralVectorField& a, const SpectralVectorField& b) {
  const GridSpec& g = a.grid();
  const double kmax = std::sqrt(3.0) * g.band_limit() * g.k0;
  return kmax * sp::max_amplitude(a) * norms::wiener_norm(b);
}

double state_diff(const sv::StateSnapshot& a, const sv::StateSnapshot& b) {
  return std::max(max_diff(a.u, b.u), max_diff(a.h, b.h));
}

SpectralVectorField minus_laplacian_times(const SpectralVectorField& s, double kappa) {
  SpectralVectorField out(s.grid());
  for_each_mode(s.grid(), [&](std::size_t i, const Vec3& xi) {
    const CVec3 c = s.at(i);
    const double w = -kappa * dot(xi, xi);
    out.set(i, {w * c[0], w * c[1], w * c[2]});
  });
  return out;
}

}  // namespace

TEST_CASE("physics and solver configuration") {
  sv::PhysicsParams p{1.0, 0.0, false};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.exploratory = true;
  CHECK_NOTHROW(p.validate());
  p = {0.0, 1.0, false};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  sv::SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.blowup_threshold = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  CHECK(sv::formulation_from_string("primitive") == sv::Formulation::Primitive);
  CHECK(sv::formulation_from_string("perturbation") == sv::Formulation::Perturbation);
  CHECK_THROWS_AS(sv::formulation_from_string("other"), std::invalid_argument);
}

TEST_CASE("aligned fields u = h: only diffusion remains") {
  const GridSpec g{16, 0.5};
  const auto u = bt::random_solenoidal(g, 0.5, 2.5, 1.0, 11);
  const auto n = sv::nonlinear_primitive(u, u);
  CHECK(max_modulus(n.du) <= 1e-13 * quad_scale(u, u));
  CHECK(max_modulus(n.dh) <= 1e-13 * quad_scale(u, u));

  const sv::PhysicsParams p{0.7, 0.7};
  const auto r = sv::rhs_primitive({0.0, u, u}, p);
  const auto lap = minus_laplacian_times(u, 0.7);
  CHECK(max_diff(r.du, lap) <= 1e-12 * max_modulus(lap));
  CHECK(max_diff(r.dh, lap) <= 1e-12 * max_modulus(lap));
}

TEST_CASE("single helical mode with h = alpha u: quadratic terms project away") {
  const GridSpec g{32, 0.25};
  const auto v0 = bt::generate_v0(cap_spec(0.0, 3.0), g);
  const auto h = 2.0 * v0;
  const auto n = sv::nonlinear_primitive(v0, h);
  CHECK(max_modulus(n.du) <= 1e-13 * quad_scale(h, h));
  CHECK(max_modulus(n.dh) <= 1e-13 * quad_scale(h, h));
}

TEST_CASE("induction term on two single modes") {
  const GridSpec g{16, 0.5};
  const std::array<int, 3> m1{1, 2, -1}, m2{2, -1, 3};
  const Vec3 xi1{0.5, 1.0, -0.5}, xi2{1.0, -0.5, 1.5};
  // a perpendicular to xi1, b perpendicular to xi2
  const Vec3 ar = cross(xi1, {1.0, 0.0, 0.0}), br = cross(xi2, {0.0, 1.0, 0.0});
  const CVec3 a{complex(ar[0], 0.3), complex(ar[1], 0.0), complex(ar[2], -0.2)};
  const CVec3 b{complex(br[0], -1.0), complex(br[1], 0.5), complex(br[2], 0.0)};
  SpectralVectorField u(g), h(g);
  u.set(g.flat_of_mode(m1), a);
  h.set(g.flat_of_mode(m2), b);
  u = sp::leray_project(u);
  h = sp::leray_project(h);
  const CVec3 pa = u.at(g.flat_of_mode(m1)), pb = h.at(g.flat_of_mode(m2));

  const auto n = sv::nonlinear_primitive(u, h);
  // -i cell [ (xi . a) b - (xi . b) a ] at xi = xi1 + xi2
  const Vec3 xi{1.5, 0.5, 1.0};
  const complex xa = dot(xi, pa), xb = dot(xi, pb);
  const double cell = g.cell_volume();
  const complex mi(0.0, -1.0);
  CVec3 expect;
  for (int k = 0; k < 3; ++k) expect[k] = mi * cell * (xa * pb[k] - xb * pa[k]);
  const std::size_t target = g.flat_of_mode({3, 1, 2});
  const CVec3 got = n.dh.at(target);
  const double err =
      modulus(CVec3{got[0] - expect[0], got[1] - expect[1], got[2] - expect[2]});
  CHECK(err <= 1e-13 * modulus(expect));
  CHECK(modulus(expect) > 0.0);
  // nothing else is generated in h, and u only sees u (x) u - h (x) h
  auto rest = n.dh;
  rest.set(target, CVec3{});
  CHECK(max_modulus(rest) <= 1e-14 * modulus(expect));
  CHECK(modulus(n.du.at(target)) <= 1e-14 * modulus(expect));
}

TEST_CASE("perturbation sources and consistency with the primitive system") {
  const GridSpec g{64, 1.0 / 8.0};
  const auto v0 = bt::generate_v0(cap_spec(0.1, 2.0), g);
  const rf::ReferenceFields ref{v0, 1.5 * v0, 1.0, 0.5};
  rf::ReferenceEvaluator ev(ref);
  const double t = 0.3;
  const auto U = bt::random_solenoidal(g, 0.5, 1.0, 0.05, 21);
  const auto H = bt::random_solenoidal(g, 0.5, 1.0, 0.05, 22);

  SUBCASE("nonlinear parts") {
    const auto& e = ev.at(t);
    const auto pert = sv::nonlinear_perturbation(U, H, ev, t);
    const auto prim = sv::nonlinear_primitive(U + e.f_hat, H + e.g_hat);
    const double scale = quad_scale(U + e.f_hat, H + e.g_hat) + quad_scale(H + e.g_hat, U + e.f_hat);
    CHECK(max_diff(pert.du, prim.du) <= 1e-10 * scale);
    CHECK(max_diff(pert.dh, prim.dh) <= 1e-10 * scale);
    CHECK(max_modulus(prim.du) > 1e-6 * scale);
  }
  SUBCASE("full right-hand sides minus the heat terms of f and g") {
    const auto& e = ev.at(t);
    const sv::PhysicsParams p{ref.nu, ref.mu};
    const auto pert = sv::rhs_perturbation({t, U, H}, ev, p);
    auto prim = sv::rhs_primitive({t, U + e.f_hat, H + e.g_hat}, p);
    prim.du -= minus_laplacian_times(e.f_hat, ref.nu);
    prim.dh -= minus_laplacian_times(e.g_hat, ref.mu);
    const double scale = quad_scale(U + e.f_hat, H + e.g_hat) + quad_scale(H + e.g_hat, U + e.f_hat);
    CHECK(max_diff(pert.du, prim.du) <= 1e-10 * scale);
    CHECK(max_diff(pert.dh, prim.dh) <= 1e-10 * scale);
  }
  SUBCASE("zero reference fields reduce to the primitive system") {
    const rf::ReferenceFields zero{SpectralVectorField(g), SpectralVectorField(g), 1.0, 0.5};
    rf::ReferenceEvaluator ez(zero);
    const auto pert = sv::nonlinear_perturbation(U, H, ez, t);
    const auto prim = sv::nonlinear_primitive(U, H);
    CHECK(max_diff(pert.du, prim.du) <= 1e-14 * quad_scale(U, U));
    CHECK(max_diff(pert.dh, prim.dh) <= 1e-14 * quad_scale(U, U));
  }
}

TEST_CASE("zero perturbation is an equilibrium on the unit shell") {
  const GridSpec g{32, 0.25};
  const auto v0 = bt::generate_v0(cap_spec(0.0, 2.0), g);
  const rf::ReferenceFields ref{v0, 2.0 * v0, 1.0, 0.5};
  rf::ReferenceEvaluator ev(ref);
  const SpectralVectorField zero(g);
  const auto d = sv::nonlinear_perturbation(zero, zero, ev, 0.2);
  const double scale = quad_scale(ref.h02, ref.h02);
  CHECK(max_modulus(d.du) <= 1e-13 * scale);
  CHECK(max_modulus(d.dh) <= 1e-13 * scale);
}

TEST_CASE("stepper basics") {
  const GridSpec g{16, 0.5};
  const sv::PhysicsParams p{0.8, 0.3};
  sv::SolverConfig c;
  c.dt = 0.01;

  SUBCASE("zero state stays zero") {
    const sv::StateSnapshot z{0.0, SpectralVectorField(g), SpectralVectorField(g)};
    const auto s = sv::step(z, p, c);
    CHECK(s.t == doctest::Approx(0.01));
    CHECK(max_modulus(s.u) == 0.0);
    CHECK(max_modulus(s.h) == 0.0);
  }
  SUBCASE("linear hook is the exact heat semigroup") {
    c.linear_only = true;
    const auto u = bt::random_solenoidal(g, 0.5, 2.5, 1.0, 5);
    const auto h = bt::random_solenoidal(g, 0.5, 2.5, 1.0, 6);
    const auto s = sv::step({0.0, u, h}, p, c);
    const auto eu = sp::heat_multiply(u, p.nu, c.dt), eh = sp::heat_multiply(h, p.mu, c.dt);
    CHECK(max_diff(s.u, eu) <= 1e-15 * max_modulus(u));
    CHECK(max_diff(s.h, eh) <= 1e-15 * max_modulus(h));
  }
  SUBCASE("non-finite coefficients are detected") {
    auto u = bt::random_solenoidal(g, 0.5, 2.5, 1.0, 5);
    u.set(g.flat_of_mode({1, 0, 0}), {0.0, complex(std::numeric_limits<double>::quiet_NaN(), 0.0), 0.0});
    CHECK_THROWS_AS(sv::step({0.0, u, u}, p, c), sv::BlowupDetected);
  }
}

TEST_CASE("run: exact decay on the unit shell") {
  const GridSpec g{32, 0.25};
  const auto v0 = bt::generate_v0(cap_spec(0.0), g);
  const sv::PhysicsParams p{1.0, 0.5};
  sv::SolverConfig c;
  c.dt = 1e-2;
  c.T = 0.5;
  c.snapshot_stride = 10;
  const auto r = sv::run({0.0, v0, 2.0 * v0}, p, c);
  REQUIRE_FALSE(r.blowup);
  CHECK(r.steps == 50);
  CHECK(r.diagnostics.size() == 6);
  const auto eu = std::exp(-0.5) * v0, eh = 2.0 * std::exp(-0.25) * v0;
  CHECK(max_diff(r.final_state.u, eu) <= 1e-12 * max_modulus(eu));
  CHECK(max_diff(r.final_state.h, eh) <= 1e-12 * max_modulus(eh));
  CHECK_FALSE(r.real_valued);
  CHECK(r.max_div_residual <= 1e-11);
}

TEST_CASE("run: real data keeps the energy identities") {
  const GridSpec g{16, 0.5};
  const auto u = bt::random_solenoidal(g, 0.5, 2.5, 1.0, 31);
  const auto h = bt::random_solenoidal(g, 0.5, 2.5, 1.0, 32);
  const sv::PhysicsParams p{0.5, 0.4};
  sv::SolverConfig c;
  c.dt = 2e-3;
  c.T = 0.2;
  c.snapshot_stride = 10;
  const auto r = sv::run({0.0, u, h}, p, c);
  REQUIRE_FALSE(r.blowup);
  CHECK(r.real_valued);
  CHECK(r.max_transfer <= 1e-10);
  CHECK(r.max_div_residual <= 1e-11);
  CHECK(r.max_energy_balance <= 1e-8);
  CHECK(r.final_state.u.at(0) == CVec3{});
  CHECK(r.final_state.h.at(0) == CVec3{});
  for (std::size_t i = 1; i < r.diagnostics.size(); ++i) {
    CHECK(r.diagnostics[i].E1_cum >= r.diagnostics[i - 1].E1_cum);
  }
}

TEST_CASE("run: overflow becomes a structured blow-up result") {
  const GridSpec g{16, 0.5};
  auto u = bt::random_solenoidal(g, 0.5, 2.5, 1e154, 41);
  sv::SolverConfig c;
  c.dt = 1e-200;
  c.T = 1e-200;
  c.snapshot_stride = 1;
  const auto r = sv::run({0.0, u, SpectralVectorField(g, true)}, {1.0, 1.0}, c);
  CHECK(r.blowup);
  CHECK(r.blowup_time == doctest::Approx(1e-200));
  CHECK(contains(r.blowup_message, "non-finite"));
  CHECK(r.diagnostics.size() == 1);
}

TEST_CASE("run: preflight and argument errors") {
  const GridSpec g{16, 0.5};
  const auto u = bt::random_solenoidal(g, 0.5, 2.5, 10.0, 51);
  sv::SolverConfig c;
  c.dt = 1.0;
  c.T = 1.0;
  try {
    sv::run({0.0, u, u}, {1.0, 1.0}, c);
    FAIL("expected preflight failure");
  } catch (const std::invalid_argument& e) {
    CHECK(contains(e.what(), "preflight"));
  }
  c.dt = 1e-3;
  c.formulation = sv::Formulation::Perturbation;
  CHECK_THROWS_AS(sv::run({0.0, u, u}, {1.0, 1.0}, c), std::invalid_argument);
  c.formulation = sv::Formulation::Primitive;
  auto bad = u;
  bad.set(g.flat_of_mode({1, 0, 0}), {complex(1.0, 0.0), 0.0, 0.0});
  CHECK_THROWS_AS(sv::run({0.0, bad, u}, {1.0, 1.0}, c), std::invalid_argument);
}

TEST_CASE("diagnostics CSV layout") {
  CHECK(sv::csv_header() == "t,energy_u,energy_h,E0_U,E0_H,E1_cum,div_residual,max_amp");
  sv::DiagnosticsRow row;
  row.t = 0.5;
  row.max_amp = 2.0;
  CHECK(sv::csv_row(row) == "0.5,0,0,0,0,0,0,2");
}

TEST_CASE("fourth-order self-convergence on a shell of width 0.1") {
  const GridSpec g{16, 0.25};
  auto spec = cap_spec(0.1, 5.0);
  spec.alpha2 = 0.6;
  const auto v0 = bt::generate_v0(spec, g);
  const auto U = oracle::random_band_field(g, 61, true);
  const double s = 0.1 * sp::max_amplitude(v0) / sp::max_amplitude(U);
  const sv::StateSnapshot init{0.0, v0 + s * U, 0.6 * v0 - s * U};
  const sv::PhysicsParams p{0.1, 0.05};

  auto final_state = [&](double dt) {
    sv::SolverConfig c;
    c.dt = dt;
    c.T = 0.4;
    c.snapshot_stride = 1000;
    const auto r = sv::run(init, p, c);
    REQUIRE_FALSE(r.blowup);
    return r.final_state;
  };
  const auto ref = final_state(0.4 / 320);
  const double e1 = state_diff(final_state(0.02), ref);
  const double e2 = state_diff(final_state(0.01), ref);
  const double e3 = state_diff(final_state(0.005), ref);
  const double scale = std::max(max_modulus(ref.u), max_modulus(ref.h));
  MESSAGE("errors " << e1 / scale << " " << e2 / scale << " " << e3 / scale);
  REQUIRE(e3 > 1e-13 * scale);
  CHECK(std::log2(e1 / e2) == doctest::Approx(4.0).epsilon(0.05));
  CHECK(std::log2(e2 / e3) == doctest::Approx(4.0).epsilon(0.05));
}
