#include <catch_amalgamated.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "vortexlab/error.hpp"
#include "vortexlab/torus_solver.hpp"

using namespace vortexlab;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;

TorusSetup shared_vortex_setup(double l, int n, double delta = 0.25) {
  auto g = build_grid(l, l, n, n, delta);
  return make_setup(g, VortexSet({{{l / 2, l / 2}, 1, 1}, {{l / 2, l / 2}, 2, 1}}));
}

Field smooth_bump(const TorusGrid& g, double phase) {
  return g.sample([&](Point p) {
    return std::sin(2 * pi * p.x / g.l1() + phase) * std::cos(2 * pi * p.y / g.l2()) + 0.3 * std::cos(4 * pi * p.y / g.l2());
  });
}

double pair_distance(const FieldPair& a, const FieldPair& b) {
  return std::max(max_distance(a.u[0], b.u[0]), max_distance(a.u[1], b.u[1]));
}
}  // namespace

TEST_CASE("zero vortices give the zero solution") {
  auto g = build_grid(2 * pi, 2 * pi, 32, 32, 0.2);
  auto s = make_setup(g, VortexSet{});
  auto r = monotone_solve(s, 0.1);
  CHECK(r.report.iterations <= 1);
  CHECK(r.solution.u[0].max_abs() == 0.0);
  CHECK(r.solution.u[1].max_abs() == 0.0);
  CHECK(r.report.classification == Classification::topological);
  CHECK(energy(s, 0.1, r.solution) == 0.0);
  CHECK(flux(s, 0.1, r.solution)[0] == 0.0);

  FieldPair zero{{g.zeros(), g.zeros()}, 0.1, Form::regular};
  auto n = newton_solve(s, 0.1, zero);
  CHECK(n.report.iterations == 0);
  CHECK(n.solution.u[0].max_abs() == 0.0);
}

TEST_CASE("residual far from the solution and its mean identity") {
  auto s = shared_vortex_setup(2 * pi, 64);
  const auto& g = s.grid;
  FieldPair zero{{g.zeros(), g.zeros()}, 0.1, Form::regular};
  CHECK(residual(s, 0.1, zero).norm >= 1.0);

  // The mean of r_i equals the flux mismatch divided by the area.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 0.3);
  FieldPair random{{g.zeros(), g.zeros()}, 0.1, Form::regular};
  for (auto& f : random.u)
    for (Eigen::Index m = 0; m < f.size(); ++m) f[m] = n(rng);
  const auto res = residual(s, 0.1, random);
  const auto fl = flux(s, 0.1, random);
  for (int c = 0; c < 2; ++c) CHECK_THAT(res.r[c].mean(), WithinAbs((fl[c] - 4 * pi) / g.area(), 1e-9));
}

TEST_CASE("regular and full forms convert back and forth") {
  auto s = shared_vortex_setup(2.5, 32);
  FieldPair p{{smooth_bump(s.grid, 0), smooth_bump(s.grid, 1)}, 0.2, Form::regular};
  auto back = to_regular(s, to_full(s, p));
  CHECK(pair_distance(back, p) < 1e-13);
  CHECK(to_full(s, p).form == Form::full);
  CHECK_THROWS_WITH(residual(s, 0.2, to_full(s, p)), ContainsSubstring("regular form"));
}

TEST_CASE("monotone scheme: decrease, sign, flux, coefficient ranges") {
  auto s = shared_vortex_setup(2.5, 64, 0.5);
  const double eps = 0.2;
  auto r = monotone_solve(s, eps);
  REQUIRE(r.report.converged);
  CHECK(r.report.residual <= 1e-8);
  REQUIRE(r.report.monotonicity_log.size() == std::size_t(r.report.iterations));
  for (const auto& e : r.report.monotonicity_log) {
    CHECK(e.max_increase <= e.allowed_increase);
    CHECK(e.shift > 0);
    CHECK(std::isfinite(e.energy));
  }
  const auto full = to_full(s, r.solution);
  for (const auto& f : full.u) {
    CHECK(f.values().maxCoeff() <= 1e-10);
    const Eigen::ArrayXd e = f.values().exp();
    CHECK(e.minCoeff() >= 0.0);
    CHECK(e.maxCoeff() <= 1.0 + 1e-12);
  }
  CHECK_THAT(r.report.flux[0], WithinRel(4 * pi, 1e-3));
  CHECK_THAT(r.report.flux[1], WithinRel(4 * pi, 1e-3));
  CHECK_THAT(r.report.means[0], WithinAbs(full.u[0].mean(), 1e-12));
  CHECK(r.report.classification == Classification::topological);
}

// Distance 1/2 is rescaled radius 5, where the entire profile is ~0.05; at
// distance 1/4 (rescaled 2.5) the profile itself is still about -0.6.
TEST_CASE("smallness away from the vortex at eps = 0.1") {
  auto s = shared_vortex_setup(2 * pi, 128);
  const double eps = 0.1;
  auto r = monotone_solve(s, eps);
  const auto full = to_full(s, r.solution);
  const auto keep = excision_mask(s.grid, s.vortices, 0.5);
  double sup = 0.0;
  for (int c = 0; c < 2; ++c)
    for (Eigen::Index m = 0; m < full.u[c].size(); ++m)
      if (keep[std::size_t(m)]) sup = std::max(sup, std::abs(full.u[c][m]));
  CHECK(sup <= 10 * eps * eps);
}

TEST_CASE("component swap gives the swapped solution exactly") {
  auto g = build_grid(2.5, 2.5, 64, 64, 0.25);
  VortexSet v({{{1.25, 1.25}, 1, 2}, {{0.5, 0.7}, 2, 1}});
  auto a = monotone_solve(make_setup(g, v), 0.25);
  auto b = monotone_solve(make_setup(g, v.swapped()), 0.25);
  CHECK(a.report.iterations == b.report.iterations);
  CHECK(max_distance(a.solution.u[0], b.solution.u[1]) == 0.0);
  CHECK(max_distance(a.solution.u[1], b.solution.u[0]) == 0.0);
  CHECK_THAT(a.report.flux[0], WithinRel(8 * pi, 1e-3));
  CHECK_THAT(a.report.flux[1], WithinRel(4 * pi, 1e-3));
}

TEST_CASE("monotone scheme reports exhausted iterations") {
  auto s = shared_vortex_setup(2.5, 32);
  MonotoneOptions o;
  o.max_iter = 3;
  try {
    monotone_solve(s, 0.2, o);
    FAIL("expected failure");
  } catch (const SolverFailure& e) {
    CHECK_THAT(std::string(e.what()), ContainsSubstring("max_iter exceeded"));
    CHECK(e.last_residual() > 0);
  }
}

TEST_CASE("Newton agrees with the monotone scheme") {
  auto s = shared_vortex_setup(2.5, 64);
  const double eps = 0.1;
  auto m = monotone_solve(s, eps);
  auto n = newton_solve(s, eps, m.solution);
  CHECK(n.report.iterations <= 3);
  CHECK(pair_distance(n.solution, m.solution) <= 1e-8);

  FieldPair p = m.solution;
  for (int c = 0; c < 2; ++c) p.u[c] += 0.05 * smooth_bump(s.grid, c);
  auto back = newton_solve(s, eps, p);
  CHECK(back.report.residual <= 1e-8);
  CHECK(pair_distance(back.solution, m.solution) <= 1e-8);
  CHECK(!back.report.newton_log.empty());
}

TEST_CASE("energy derivative is minus the residual pairing") {
  auto s = shared_vortex_setup(2.5, 32);
  const double eps = 0.3;
  FieldPair p{{smooth_bump(s.grid, 0.2), smooth_bump(s.grid, 0.9)}, eps, Form::regular};
  const Field phi = smooth_bump(s.grid, 2.0);
  const double t = 1e-5;
  FieldPair plus = p, minus = p;
  plus.u[0] += t * phi;
  minus.u[0] -= t * phi;
  const double fd = (energy(s, eps, plus) - energy(s, eps, minus)) / (2 * t);
  const auto res = residual(s, eps, p);
  const double exact = -s.grid.integrate(Field(phi.n1(), phi.n2(), phi.values() * res.r[1].values()));
  CHECK_THAT(fd, WithinRel(exact, 1e-6));
}

TEST_CASE("converged solutions are critical points of the energy") {
  auto s = shared_vortex_setup(2.5, 64);
  const double eps = 0.2;
  NewtonOptions o;
  o.tol = 1e-10;
  auto sol = newton_solve(s, eps, monotone_solve(s, eps).solution, o).solution;
  const Field phi = smooth_bump(s.grid, 0.4);
  const double t = 1e-4;
  FieldPair plus = sol, minus = sol;
  for (int c = 0; c < 2; ++c) {
    plus.u[c] += t * phi;
    minus.u[c] -= t * phi;
  }
  const double fd = (energy(s, eps, plus) - energy(s, eps, minus)) / (2 * t);
  CHECK(std::abs(fd) <= 1e-6 * phi.max_abs());
}

TEST_CASE("grid refinement converges on a smooth configuration") {
  const double eps = 0.4, l = 2 * pi;
  std::vector<FieldPair> sols;
  std::vector<TorusSetup> setups;
  for (int n : {32, 64, 128}) {
    setups.push_back(shared_vortex_setup(l, n));
    sols.push_back(to_full(setups.back(), monotone_solve(setups.back(), eps).solution));
  }
  auto coarse_distance = [&](const FieldPair& a, const FieldPair& b, const TorusSetup& sa) {
    double d = 0.0;
    const int stride = b.u[0].n1() / a.u[0].n1();
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < a.u[c].n1(); ++i)
        for (int j = 0; j < a.u[c].n2(); ++j) {
          if (sa.vortices.distance_to_nearest(sa.grid.node(i, j), sa.grid) < 0.5) continue;
          d = std::max(d, std::abs(a.u[c](i, j) - b.u[c](i * stride, j * stride)));
        }
    return d;
  };
  const double d1 = coarse_distance(sols[0], sols[1], setups[0]);
  const double d2 = coarse_distance(sols[1], sols[2], setups[1]);
  CHECK(d2 < 0.25 * d1);
}

TEST_CASE("classification reports indeterminate when the threshold is not met") {
  auto s = shared_vortex_setup(2.5, 32);
  MonotoneOptions o;
  o.topological_threshold = 1e-14;
  auto r = monotone_solve(s, 0.3, o);
  CHECK(r.report.classification == Classification::indeterminate);
  CHECK(to_string(Classification::non_topological_candidate) == "non-topological-candidate");
}
