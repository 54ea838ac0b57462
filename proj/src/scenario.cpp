#include "bmhd/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bmhd/log.hpp"

namespace bmhd {
namespace {

using nlohmann::json;

/// Reads one JSON object, rejecting unknown keys and wrong types.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "must be an object");
  }

  ~Block() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail(k, "unknown key");
    }
  }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k) && !j_.at(k).is_null();
  }

  double number(const std::string& k, double def) {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_number()) fail(k, "must be a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& k, std::int64_t def) {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_number_integer()) fail(k, "must be an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& k, std::uint64_t def) {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(k, "must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& k, bool def) {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_boolean()) fail(k, "must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& k, const std::string& def) {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_string()) fail(k, "must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& k, const std::vector<double>& def) {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_array()) fail(k, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(k, "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Vec3 vec3(const std::string& k, const Vec3& def) {
    if (!has(k)) return def;
    const auto v = numbers(k, {});
    if (v.size() != 3) fail(k, "must have three components");
    return {v[0], v[1], v[2]};
  }

  const json* child(const std::string& k) {
    if (!has(k)) return nullptr;
    return &j_.at(k);
  }

  std::string path(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  [[noreturn]] void fail(const std::string& k, const std::string& msg) const {
    throw ScenarioError("scenario." + path(k) + ": " + msg);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ScenarioError("scenario." + field + ": " + msg);
}

}  // namespace

Scenario Scenario::from_json(const json& j) {
  Scenario s;
  Block root(j, "");
  s.seed = root.unsigned_integer("seed", 0);

  if (const auto* g = root.child("grid")) {
    Block b(*g, "grid");
    s.grid.n = static_cast<int>(b.integer("n", s.grid.n));
    s.grid.k0 = b.number("k0", s.grid.k0);
    s.grid.dealias_fraction = b.number("dealias_fraction", s.grid.dealias_fraction);
  }
  if (const auto* p = root.child("physics")) {
    Block b(*p, "physics");
    s.physics.nu = b.number("nu", s.physics.nu);
    s.physics.mu = b.number("mu", s.physics.mu);
  }
  if (const auto* e = root.child("exploratory")) {
    Block b(*e, "exploratory");
    s.exploratory.allow_mu_zero = b.boolean("allow_mu_zero", false);
    s.exploratory.allow_hermitian_v0 = b.boolean("allow_hermitian_v0", false);
  }
  s.physics.exploratory = s.exploratory.allow_mu_zero;

  if (const auto* bj = root.child("beltrami")) {
    Block b(*bj, "beltrami");
    beltrami::BeltramiSpec bs;
    bs.delta = b.number("delta", bs.delta);
    bs.cap_k = b.number("cap_k", bs.cap_k);
    bs.cap_axis = b.vec3("cap_axis", bs.cap_axis);
    bs.target_M = b.number("target_M", bs.target_M);
    bs.alpha1 = b.number("alpha1", bs.alpha1);
    bs.alpha2 = b.number("alpha2", bs.alpha2);
    bs.random_phases = b.boolean("random_phases", false);
    bs.seed = b.unsigned_integer("seed", s.seed);
    bs.hermitian_symmetrized = b.boolean("hermitian_symmetrized", false);
    s.beltrami = bs;
  }

  s.perturbation.seed = s.seed + 1;
  if (const auto* pj = root.child("perturbation")) {
    Block b(*pj, "perturbation");
    s.perturbation.epsilon = b.number("epsilon", s.perturbation.epsilon);
    s.perturbation.xi_min = b.number("xi_min", s.perturbation.xi_min);
    s.perturbation.xi_max = b.number("xi_max", s.perturbation.xi_max);
    s.perturbation.u_share = b.number("u_share", s.perturbation.u_share);
    s.perturbation.seed = b.unsigned_integer("seed", s.perturbation.seed);
  }

  if (const auto* sj = root.child("solver")) {
    Block b(*sj, "solver");
    s.solver.dt = b.number("dt", s.solver.dt);
    s.solver.T = b.number("T", s.solver.T);
    try {
      s.solver.formulation =
          solver::formulation_from_string(b.string("formulation", "primitive"));
    } catch (const std::invalid_argument&) {
      b.fail("formulation", "must be \"primitive\" or \"perturbation\"");
    }
    s.solver.snapshot_stride = static_cast<int>(b.integer("snapshot_stride", s.solver.snapshot_stride));
    s.solver.blowup_threshold = b.number("blowup_threshold", s.solver.blowup_threshold);
  }

  if (const auto* cj = root.child("certificate")) {
    Block b(*cj, "certificate");
    auto& c = s.certificate;
    c.C_star = b.number("C_star", c.C_star);
    c.budget_horizon = b.number("budget_horizon", c.budget_horizon);
    c.quadrature.intervals = static_cast<int>(b.integer("quadrature_intervals", c.quadrature.intervals));
    c.quadrature.growth = b.number("quadrature_growth", c.quadrature.growth);
    c.quadrature.tolerance = b.number("quadrature_tolerance", c.quadrature.tolerance);
    c.lei_lin_samples = b.unsigned_integer("lei_lin_samples", c.lei_lin_samples);
    c.ratio_samples = b.unsigned_integer("ratio_samples", c.ratio_samples);
    c.support_check_times = b.numbers("support_check_times", c.support_check_times);
  }

  if (const auto* scj = root.child("scaling")) {
    Block b(*scj, "scaling");
    s.scaling.deltas = b.numbers("deltas", s.scaling.deltas);
    s.scaling.M_factor = b.number("M_factor", s.scaling.M_factor);
    s.scaling.ratio_delta = b.number("ratio_delta", s.scaling.ratio_delta);
    s.scaling.simulate = b.boolean("simulate", s.scaling.simulate);
  }

  s.validate();
  return s;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("scenario: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ScenarioError("scenario: " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

json Scenario::to_json() const {
  json j;
  j["seed"] = seed;
  j["grid"] = {{"n", grid.n}, {"k0", grid.k0}, {"dealias_fraction", grid.dealias_fraction}};
  j["physics"] = {{"nu", physics.nu}, {"mu", physics.mu}};
  if (beltrami) {
    const auto& b = *beltrami;
    j["beltrami"] = {{"delta", b.delta},
                     {"cap_k", b.cap_k},
                     {"cap_axis", {b.cap_axis[0], b.cap_axis[1], b.cap_axis[2]}},
                     {"target_M", b.target_M},
                     {"alpha1", b.alpha1},
                     {"alpha2", b.alpha2},
                     {"random_phases", b.random_phases},
                     {"seed", b.seed},
                     {"hermitian_symmetrized", b.hermitian_symmetrized}};
  } else {
    j["beltrami"] = nullptr;
  }
  j["perturbation"] = {{"epsilon", perturbation.epsilon},
                       {"xi_min", perturbation.xi_min},
                       {"xi_max", perturbation.xi_max},
                       {"u_share", perturbation.u_share},
                       {"seed", perturbation.seed}};
  j["solver"] = {{"dt", solver.dt},
                 {"T", solver.T},
                 {"formulation", solver::to_string(solver.formulation)},
                 {"snapshot_stride", solver.snapshot_stride},
                 {"blowup_threshold", solver.blowup_threshold}};
  j["certificate"] = {{"C_star", certificate.C_star},
                      {"budget_horizon", certificate.budget_horizon},
                      {"quadrature_intervals", certificate.quadrature.intervals},
                      {"quadrature_growth", certificate.quadrature.growth},
                      {"quadrature_tolerance", certificate.quadrature.tolerance},
                      {"lei_lin_samples", certificate.lei_lin_samples},
                      {"ratio_samples", certificate.ratio_samples},
                      {"support_check_times", certificate.support_check_times}};
  j["exploratory"] = {{"allow_mu_zero", exploratory.allow_mu_zero},
                      {"allow_hermitian_v0", exploratory.allow_hermitian_v0}};
  j["scaling"] = {{"deltas", scaling.deltas},
                  {"M_factor", scaling.M_factor},
                  {"ratio_delta", scaling.ratio_delta},
                  {"simulate", scaling.simulate}};
  return j;
}

void Scenario::validate() const {
  try {
    grid.validate();
  } catch (const std::invalid_argument& e) {
    fail("grid", e.what());
  }
  if (physics.mu == 0.0 && !physics.exploratory) {
    fail("physics.mu",
         "mu = 0 is the non-resistive case (alpha2 = 1, mu = 0) that the theory leaves as an "
         "open problem; set exploratory.allow_mu_zero or pass --exploratory to run it without "
         "certificate claims");
  }
  try {
    physics.validate();
  } catch (const std::invalid_argument& e) {
    fail("physics", e.what());
  }
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    fail("solver", e.what());
  }

  if (beltrami) {
    const auto& b = *beltrami;
    if (!(b.delta >= 0.0 && b.delta <= 0.5)) fail("beltrami.delta", "must satisfy 0 <= delta <= 1/2");
    if (!(b.cap_k > 0.0)) fail("beltrami.cap_k", "must be positive");
    if (!(b.cap_k < 1.0)) {
      fail("beltrami.cap_k", "must satisfy k < 1 (cone condition xi'.eta' > -k with k < 1)");
    }
    if (std::abs(norm(b.cap_axis) - 1.0) > 1e-12) fail("beltrami.cap_axis", "must be a unit vector");
    if (!(b.target_M >= 0.0)) fail("beltrami.target_M", "must be nonnegative");
    if (b.hermitian_symmetrized && !exploratory.allow_hermitian_v0) {
      fail("beltrami.hermitian_symmetrized",
           "the real (hermitian) variant breaks the cone condition; set "
           "exploratory.allow_hermitian_v0 to use it");
    }
    if (!grid.resolves_shell_interactions(b.delta)) {
      std::ostringstream msg;
      msg << "scenario: resolved band k0*n/2 = " << grid.k0 * grid.n / 2
          << " does not exceed 3(1+delta) = " << 3.0 * (1.0 + b.delta)
          << "; quadratic interactions of the shell are Galerkin-truncated";
      warn(msg.str());
    }
  } else if (solver.formulation == solver::Formulation::Perturbation) {
    fail("beltrami", "the perturbation formulation requires a beltrami block");
  }

  const auto& p = perturbation;
  if (!(p.epsilon >= 0.0)) fail("perturbation.epsilon", "must be nonnegative");
  if (!(p.xi_min > 0.0)) fail("perturbation.xi_min", "must be positive");
  if (!(p.xi_max >= p.xi_min)) fail("perturbation.xi_max", "must be >= xi_min");
  if (!(p.u_share >= 0.0 && p.u_share <= 1.0)) fail("perturbation.u_share", "must lie in [0, 1]");

  const auto& c = certificate;
  if (!(c.C_star > 0.0)) fail("certificate.C_star", "must be positive");
  if (!(c.budget_horizon > 0.0)) fail("certificate.budget_horizon", "must be positive");
  if (c.quadrature.intervals < 1) fail("certificate.quadrature_intervals", "must be >= 1");
  if (!(c.quadrature.growth >= 1.0)) fail("certificate.quadrature_growth", "must be >= 1");
  if (!(c.quadrature.tolerance > 0.0)) fail("certificate.quadrature_tolerance", "must be positive");
  for (double t : c.support_check_times) {
    if (!(t >= 0.0)) fail("certificate.support_check_times", "times must be nonnegative");
  }

  for (double d : scaling.deltas) {
    if (!(d >= 0.0 && d <= 0.5)) fail("scaling.deltas", "every delta must lie in [0, 1/2]");
  }
  if (!(scaling.M_factor > 0.0)) fail("scaling.M_factor", "must be positive");
}

void Scenario::override_seed(std::uint64_t s) {
  seed = s;
  if (beltrami) beltrami->seed = s;
  perturbation.seed = s + 1;
}

}  // namespace bmhd
