#include <catch_amalgamated.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vortexlab/analysis.hpp"
#include "vortexlab/error.hpp"

using namespace vortexlab;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;
constexpr Point center{1.25, 1.25};

TorusSetup small_setup(int nu1, int nu2, int n = 64) {
  auto g = build_grid(2.5, 2.5, n, n, 0.5);
  std::vector<Vortex> v;
  if (nu1 > 0) v.push_back({center, 1, nu1});
  if (nu2 > 0) v.push_back({center, 2, nu2});
  return make_setup(g, VortexSet(v));
}

SweepOptions half_ball() {
  SweepOptions o;
  o.ball_radius = 0.5;
  return o;
}
}  // namespace

TEST_CASE("check comparison semantics") {
  CheckResult c;
  c.measured = {1.01, 0.0};
  c.reference = {1.0, 0.0};
  c.tol = 0.02;
  c.relative = true;
  CHECK(evaluate(c));
  c.measured[1] = 0.03;  // zero reference: absolute
  CHECK_FALSE(evaluate(c));
  c.comparison = Comparison::at_most;
  c.tol = 0.0;
  c.measured = {0.5, 1.0};
  c.reference = {1.0, 1.0};
  CHECK(evaluate(c));
  c.measured[0] = NAN;
  CHECK_FALSE(evaluate(c));
  c.reference.pop_back();
  c.measured = {0.5, 0.5};
  CHECK_FALSE(evaluate(c));
}

TEST_CASE("flux check for unequal totals and for no vortices") {
  auto g = build_grid(2 * pi, 2 * pi, 64, 64, 0.3);
  auto s = make_setup(g, VortexSet({{{1.0, 1.0}, 1, 1}, {{4.0, 3.0}, 1, 1}, {{2.0, 5.0}, 2, 1}}));
  auto r = monotone_solve(s, 0.25);
  auto c = check_flux(s, r.solution);
  CHECK(c.pass);
  CHECK_THAT(c.measured[0], WithinRel(8 * pi, 1e-3));
  CHECK_THAT(c.measured[1], WithinRel(4 * pi, 1e-3));
  CHECK_FALSE(c.anchor.empty());

  auto empty = make_setup(g, VortexSet{});
  auto z = check_flux(empty, monotone_solve(empty, 0.25).solution);
  CHECK(z.measured == std::vector<double>{0.0, 0.0});
  CHECK(z.pass);
}

TEST_CASE("sweep contract and failure recording") {
  auto s = small_setup(1, 1, 32);
  CHECK_THROWS_WITH(epsilon_sweep(s, {}), ContainsSubstring("empty ladder"));
  CHECK_THROWS_WITH(epsilon_sweep(s, {0.1, 0.2}), ContainsSubstring("strictly decreasing"));
  CHECK_THROWS_WITH(epsilon_sweep(s, {0.2, 0.2}), ContainsSubstring("strictly decreasing"));

  SweepOptions o;
  o.solver.max_iter = 2;
  auto sweep = epsilon_sweep(s, {0.3, 0.2, 0.1}, o);
  REQUIRE(sweep.entries.size() == 3);
  for (const auto& e : sweep.entries) {
    CHECK_FALSE(e.converged);
    CHECK_THAT(e.failure, ContainsSubstring("max_iter exceeded"));
    CHECK(e.report.residual > 0);
  }
  CHECK_THROWS_WITH(check_concentration(sweep, s), ContainsSubstring("ladder too short"));
  CHECK_THROWS_WITH(check_smallness(sweep, s), ContainsSubstring("ladder too short"));
}

TEST_CASE("sweep records match direct quadrature and are deterministic") {
  auto s = small_setup(1, 1);
  SweepOptions one = half_ball(), many = half_ball();
  one.threads = 1;
  many.threads = 3;
  auto a = epsilon_sweep(s, {0.2, 0.15, 0.1}, one);
  auto b = epsilon_sweep(s, {0.2, 0.15, 0.1}, many);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& e = a.entries[k];
    REQUIRE(e.converged);
    CHECK(e.report.classification == Classification::topological);
    const FieldPair full = to_full(s, e.solution);
    for (int c = 0; c < 2; ++c) CHECK_THAT(e.report.means[c], WithinAbs(full.u[c].values().mean(), 1e-12));
    CHECK(e.ball_mass == b.entries[k].ball_mass);
    CHECK(e.report.energy == b.entries[k].report.energy);
  }
  std::ostringstream csv;
  write_sweep_csv(csv, a);
  CHECK_THAT(csv.str(), ContainsSubstring("eps,converged,classification"));
  CHECK_THAT(csv.str(), ContainsSubstring("ball0_mixed"));
}

TEST_CASE("concentration with a vortex in one component only") {
  auto s = small_setup(1, 0);
  auto sweep = epsilon_sweep(s, {0.3, 0.2, 0.1}, half_ball());
  auto c = check_concentration(sweep, s, 0.05);
  CHECK(c.pass);
  REQUIRE(c.measured.size() == 3);
  // The second component never moves off zero, so its masses vanish exactly.
  CHECK(c.measured[1] == 0.0);
  CHECK(c.measured[2] == 0.0);
  CHECK_THAT(c.measured[0], WithinRel(4 * pi, 0.05));
  CHECK_THAT(c.detail, ContainsSubstring("monotone approach yes"));
}

TEST_CASE("checks on an empty vortex set pass vacuously") {
  auto s = small_setup(0, 0, 32);
  auto sweep = epsilon_sweep(s, {0.4, 0.3, 0.2}, half_ball());
  auto conc = check_concentration(sweep, s);
  CHECK(conc.measured.empty());
  CHECK(conc.pass);
  auto small = check_smallness(sweep, s);
  CHECK(small.pass);
  for (std::size_t k = 0; k < 2; ++k) CHECK(small.measured[k] == 0.0);

  // Zero multiplicity at a generic point matches the zero radial solution.
  auto radial = solve_radial(0, 0, 20.0, 200);
  auto m = check_rescaling(sweep, s, radial, {0.3, 0.7}, 1.0);
  for (double v : m.measured) CHECK(v == 0.0);
}

TEST_CASE("rescaling check rejects mismatched multiplicities") {
  auto s = small_setup(1, 1, 32);
  auto sweep = epsilon_sweep(s, {0.2, 0.15, 0.1}, half_ball());
  auto radial = solve_radial(2, 1, 20.0, 200);
  CHECK_THROWS_WITH(check_rescaling(sweep, s, radial, center, 1.0), ContainsSubstring("vortex mismatch"));
}

TEST_CASE("rescaled matching improves as eps shrinks") {
  auto s = small_setup(1, 1, 128);
  auto sweep = epsilon_sweep(s, {0.2, 0.15, 0.1}, half_ball());
  auto radial = solve_radial(1, 1, 20.0, 4000);
  auto m = check_rescaling(sweep, s, radial, center, 1.25, 0.05);
  CHECK(m.pass);
  CHECK(m.measured[2] < m.measured[1]);
  auto grad = check_gradient_bound(sweep, s, center, 1.25);
  CHECK(grad.pass);
  auto ball = check_ball_against_radial(sweep, s, radial_integrals(radial), center);
  CHECK(ball.pass);
}

TEST_CASE("uniqueness starts are admissible and reproducible") {
  auto s = small_setup(2, 1);
  double core = 0, amp = 0;
  auto a = uniqueness_start(s, 0.2, 7, 3, &core, &amp);
  auto b = uniqueness_start(s, 0.2, 7, 3);
  auto c = uniqueness_start(s, 0.2, 7, 4);
  CHECK(a.form == Form::regular);
  CHECK(max_distance(a.u[0], b.u[0]) == 0.0);
  CHECK(max_distance(a.u[0], c.u[0]) > 0.0);
  CHECK(core >= 1.0);
  CHECK(core <= 3.0);
  CHECK(amp >= 0.0);
  CHECK(amp <= 0.5);
  const FieldPair full = to_full(s, a);
  for (const auto& f : full.u) CHECK(f.values().maxCoeff() <= 0.0);
}

TEST_CASE("uniqueness experiment finds one cluster") {
  auto s = small_setup(1, 1);
  CHECK_THROWS_WITH(uniqueness_experiment(s, 0.2, {.starts = 1}), ContainsSubstring("at least 2"));

  UniquenessOptions o;
  o.starts = 4;
  o.seed = 5;
  auto r = uniqueness_experiment(s, 0.2, o);
  CHECK(r.check.pass);
  CHECK(r.clusters == 1);
  CHECK(r.max_pairwise <= 1e-8);
  CHECK_FALSE(r.counterexample);
  o.seed = 6;
  auto q = uniqueness_experiment(s, 0.2, o);
  for (const auto& st : q.starts) CHECK(st.distance_to_maximal <= 1e-8);
  CHECK(max_distance(q.maximal.u[0], r.maximal.u[0]) == 0.0);

  std::ostringstream csv;
  write_starts_csv(csv, r);
  CHECK_THAT(csv.str(), ContainsSubstring("start,seed,core_scale"));

  o.newton.max_iter = 0;
  CHECK_THROWS_WITH(uniqueness_experiment(s, 0.2, o), ContainsSubstring("solver failures exceed half of starts"));
}

TEST_CASE("report requires anchors") {
  CheckResult c;
  c.name = "example";
  c.measured = {1.0};
  c.reference = {1.0};
  c.pass = true;
  std::ostringstream out;
  CHECK_THROWS_WITH(write_report_csv(out, {c}), ContainsSubstring("missing anchor"));
  c.anchor = "a = b";
  std::ostringstream ok;
  write_report_csv(ok, {c, c});
  std::istringstream in(ok.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "name,measured,reference,tol,pass,anchor");
  std::getline(in, line);
  CHECK(line == "\"example\",1,1,0,true,\"a = b\"");
  std::ostringstream summary;
  write_summary(summary, {c});
  CHECK_THAT(summary.str(), ContainsSubstring("1 of 1 checks passed"));
}

TEST_CASE("radial checks on a (2,1) profile") {
  auto sol = solve_radial(2, 1, 25.0, 2000);
  auto integrals = check_radial_integrals(sol);
  CHECK(integrals.pass);
  CHECK(integrals.reference == std::vector<double>{8 * pi, 16 * pi, 12 * pi});
  CHECK(check_decay(sol).pass);
  CHECK_THROWS_WITH(check_symmetric_profiles(sol), ContainsSubstring("equal multiplicities"));

  auto sym = solve_radial(1, 1, 20.0, 1000);
  auto c = check_symmetric_profiles(sym);
  CHECK(c.pass);
  CHECK(c.measured[0] <= 1e-12);
}

TEST_CASE("non-degeneracy check reports three stable sigma values") {
  auto c = check_nondegeneracy(1, 1, 20.0, 1000);
  CHECK(c.pass);
  REQUIRE(c.measured.size() == 2);
  for (double v : c.measured) CHECK(v <= 1e-3);
  CHECK_THAT(c.detail, ContainsSubstring("0.2480"));
}

TEST_CASE("zero base check is exact on every grid") {
  CHECK_THROWS_WITH(check_zero_base({16}), ContainsSubstring("at least two"));
  auto c = check_zero_base({16, 32});
  CHECK(c.pass);
  for (double e : c.measured) CHECK(e <= 1e-10);
  CHECK_THAT(c.detail, ContainsSubstring("not measurable"));
}
