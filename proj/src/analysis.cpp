#include "vortexlab/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "vortexlab/error.hpp"
#include "vortexlab/field_io.hpp"

namespace vortexlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Runs body(0..count-1) on up to `threads` workers. Each index writes only its
// own output slot, so results do not depend on scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = int(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int k; (k = next++) < count;) body(k);
    });
  for (auto& th : pool) th.join();
}

double pair_distance(const FieldPair& a, const FieldPair& b) {
  return std::max(max_distance(a.u[0], b.u[0]), max_distance(a.u[1], b.u[1]));
}

int vortex_index(const SweepRecord& sweep, const TorusGrid& grid, Point p) {
  for (std::size_t k = 0; k < sweep.points.size(); ++k)
    if (grid.distance(sweep.points[k], p) < 1e-12) return int(k);
  return -1;
}

std::array<int, 2> multiplicities(const TorusSetup& setup, Point p) {
  return {setup.vortices.multiplicity_at(1, p, setup.grid), setup.vortices.multiplicity_at(2, p, setup.grid)};
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ';';
    s += format_double(v[k]);
  }
  return s;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

bool evaluate(const CheckResult& check) {
  if (check.measured.size() != check.reference.size()) return false;
  for (std::size_t k = 0; k < check.measured.size(); ++k) {
    const double m = check.measured[k], r = check.reference[k];
    if (!std::isfinite(m)) return false;
    if (check.comparison == Comparison::at_most) {
      if (!(m <= r + check.tol)) return false;
    } else {
      const double scale = check.relative && r != 0.0 ? std::abs(r) : 1.0;
      if (!(std::abs(m - r) <= check.tol * scale)) return false;
    }
  }
  return true;
}

std::vector<const SweepEntry*> SweepRecord::converged() const {
  std::vector<const SweepEntry*> out;
  for (const auto& e : entries)
    if (e.converged) out.push_back(&e);
  return out;
}

std::array<double, 3> ball_mass(const TorusSetup& setup, const FieldPair& pair, Point p, double radius) {
  const TorusGrid& g = setup.grid;
  const ExpFields k = exp_fields(setup, pair);
  const double w = g.cell_area() / (pair.eps * pair.eps);
  std::array<double, 3> mass{0.0, 0.0, 0.0};
  for (int i = 0; i < g.n1(); ++i)
    for (int j = 0; j < g.n2(); ++j) {
      if (g.distance(p, g.node(i, j)) >= radius) continue;
      const Eigen::Index m = Eigen::Index(i) * g.n2() + j;
      mass[0] += w * k.P[1][m] * k.Q[0][m];
      mass[1] += w * k.P[0][m] * k.Q[1][m];
      mass[2] += 2.0 * w * k.Q[0][m] * k.Q[1][m];
    }
  return mass;
}

SweepRecord epsilon_sweep(const TorusSetup& setup, const std::vector<double>& ladder, const SweepOptions& opts) {
  if (ladder.empty()) throw Error("empty ladder");
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (!(ladder[k] > 0)) throw Error("ladder values must be positive");
    if (k > 0 && !(ladder[k] < ladder[k - 1])) throw Error("ladder must be strictly decreasing");
  }
  const TorusGrid& g = setup.grid;
  SweepRecord sweep;
  sweep.ladder = ladder;
  sweep.points = setup.vortices.distinct_points(g);
  sweep.ball_radius = opts.ball_radius;
  sweep.entries.resize(ladder.size());
  const auto keep = excision_mask(g, setup.vortices, g.delta());

  parallel_for(int(ladder.size()), opts.threads, [&](int k) {
    SweepEntry& e = sweep.entries[std::size_t(k)];
    e.eps = ladder[std::size_t(k)];
    try {
      SolveResult r = monotone_solve(setup, e.eps, opts.solver);
      e.converged = true;
      e.report = std::move(r.report);
      e.solution = std::move(r.solution);
    } catch (const SolverFailure& f) {
      e.failure = f.what();
      e.report.residual = f.last_residual();
      e.report.iterations = f.iterations();
      return;
    }
    for (Point p : sweep.points) e.ball_mass.push_back(ball_mass(setup, e.solution, p, opts.ball_radius));
    const FieldPair full = to_full(setup, e.solution);
    for (int c = 0; c < 2; ++c) {
      double sum = 0.0;
      for (Eigen::Index m = 0; m < full.u[c].size(); ++m)
        if (keep[std::size_t(m)]) sum += std::abs(full.u[c][m]);
      e.l1_excised[c] = sum * g.cell_area();
    }
  });
  return sweep;
}

CheckResult check_flux(const TorusSetup& setup, const FieldPair& pair, double tol) {
  CheckResult c;
  c.name = "flux quantization";
  c.anchor = "integral over T of eps^-2 e^{u_j}(1-e^{u_i}) equals 4 pi N_i";
  const auto f = flux(setup, pair.eps, pair);
  c.measured = {f[0], f[1]};
  c.reference = {4.0 * kPi * setup.background.totals[0], 4.0 * kPi * setup.background.totals[1]};
  c.tol = tol;
  c.relative = true;
  c.pass = evaluate(c);
  return c;
}

CheckResult check_concentration(const SweepRecord& sweep, const TorusSetup& setup, double tol) {
  const auto done = sweep.converged();
  if (done.size() < 3) throw Error("ladder too short");
  CheckResult c;
  c.name = "concentration of ball masses";
  c.anchor = "eps^-2 e^{u_j}(1-e^{u_i}) -> 4 pi nu_i(p) delta_p and 2 eps^-2 (1-e^{u1})(1-e^{u2}) -> 8 pi nu1 nu2 delta_p";
  c.tol = tol;
  c.relative = true;
  bool monotone = true;
  std::ostringstream detail;
  detail << "ball radius " << sweep.ball_radius << "; normalized errors per eps:";
  for (std::size_t q = 0; q < sweep.points.size(); ++q) {
    const auto nu = multiplicities(setup, sweep.points[q]);
    const std::array<double, 3> ref{4.0 * kPi * nu[0], 4.0 * kPi * nu[1], 8.0 * kPi * nu[0] * nu[1]};
    double previous = INFINITY;
    for (const SweepEntry* e : done) {
      double err = 0.0;
      for (int j = 0; j < 3; ++j)
        err = std::max(err, std::abs(e->ball_mass[q][j] - ref[j]) / std::max(ref[j], 4.0 * kPi));
      detail << ' ' << err;
      if (err > previous + 1e-12) monotone = false;
      previous = err;
    }
    for (int j = 0; j < 3; ++j) {
      c.measured.push_back(done.back()->ball_mass[q][j]);
      c.reference.push_back(ref[j]);
    }
  }
  detail << "; monotone approach " << (monotone ? "yes" : "no");
  c.detail = detail.str();
  c.pass = evaluate(c) && monotone;
  return c;
}

CheckResult check_smallness(const SweepRecord& sweep, const TorusSetup& setup) {
  const auto done = sweep.converged();
  if (done.size() < 3) throw Error("ladder too short");
  CheckResult c;
  c.name = "smallness off vortices (order>=2 proxy)";
  c.anchor = "sup over T_2delta of |u_i| decays faster than eps^2; ||u_i||_L1(T_delta) <= 8 pi e N_i eps^2";
  c.comparison = Comparison::at_most;
  std::ostringstream detail;
  detail << "sup ratios then L1 norms against their bounds; sup values:";
  for (const SweepEntry* e : done) detail << ' ' << e->report.sup_outside;
  for (std::size_t k = 1; k < done.size(); ++k) {
    const double s0 = done[k - 1]->report.sup_outside, s1 = done[k]->report.sup_outside;
    c.measured.push_back(s0 > 0 ? s1 / s0 : 0.0);
    const double ratio = done[k]->eps / done[k - 1]->eps;
    c.reference.push_back(ratio * ratio);
  }
  for (const SweepEntry* e : done)
    for (int i = 0; i < 2; ++i) {
      c.measured.push_back(e->l1_excised[i]);
      c.reference.push_back(8.0 * kPi * std::exp(1.0) * setup.background.totals[i] * e->eps * e->eps);
    }
  c.detail = detail.str();
  c.pass = evaluate(c);
  return c;
}

namespace {

// Grid nodes x with 0 < |x - p| <= radius that are not vortex points, with
// their displacement from p.
struct ChartNode {
  Eigen::Index index;
  Point d;
};

std::vector<ChartNode> chart_nodes(const TorusSetup& setup, Point p, double radius) {
  const TorusGrid& g = setup.grid;
  const auto& w = setup.background.weight;
  std::vector<ChartNode> out;
  for (int i = 0; i < g.n1(); ++i)
    for (int j = 0; j < g.n2(); ++j) {
      const Point d = g.displacement(p, g.node(i, j));
      const double r = std::hypot(d.x, d.y);
      const Eigen::Index m = Eigen::Index(i) * g.n2() + j;
      if (r == 0 || r > radius || w[0][m] == 0.0 || w[1][m] == 0.0) continue;
      out.push_back({m, d});
    }
  return out;
}

}  // namespace

CheckResult check_rescaling(const SweepRecord& sweep, const TorusSetup& setup, const RadialSolution& radial, Point p,
                            double chart_radius, double tol) {
  const auto nu = multiplicities(setup, p);
  if (nu != radial.nu) throw Error("vortex mismatch");
  const auto done = sweep.converged();
  if (done.empty()) throw Error("ladder too short");
  if (chart_radius / done.back()->eps > radial.radius())
    throw Error("radial solution is shorter than the rescaled chart");
  const RadialInterpolant interp(radial);
  const auto nodes = chart_nodes(setup, p, chart_radius);

  CheckResult c;
  c.name = "rescaled matching with the radial solution";
  c.anchor = "sup over B_{r0/eps} of |u_i(eps y + p) - u_i^rad(y)| -> 0";
  c.comparison = Comparison::at_most;
  bool decreasing = true;
  for (const SweepEntry* e : done) {
    const FieldPair full = to_full(setup, e->solution);
    double m = 0.0;
    for (const auto& n : nodes) {
      const double s = std::hypot(n.d.x, n.d.y) / e->eps;
      for (int i = 0; i < 2; ++i) m = std::max(m, std::abs(full.u[i][n.index] - interp.full(i, s)));
    }
    if (!c.measured.empty() && !(m < c.measured.back())) decreasing = false;
    c.measured.push_back(m);
  }
  // Every value is bounded by its predecessor; the last also by tol.
  c.reference.push_back(INFINITY);
  for (std::size_t k = 1; k < c.measured.size(); ++k) c.reference.push_back(c.measured[k - 1]);
  c.reference.back() = std::min(c.reference.back(), tol);
  c.detail = "chart radius " + format_double(chart_radius) + "; strictly decreasing " + (decreasing ? "yes" : "no");
  c.pass = evaluate(c) && decreasing;
  return c;
}

CheckResult check_gradient_bound(const SweepRecord& sweep, const TorusSetup& setup, Point p, double chart_radius,
                                 double growth) {
  const auto done = sweep.converged();
  if (done.empty()) throw Error("ladder too short");
  const TorusGrid& g = setup.grid;
  const GreenTable table(g, sweep.points);
  const int self = vortex_index(sweep, g, p);
  const auto nodes = chart_nodes(setup, p, chart_radius);

  // Part of grad u(full) - 2 nu(p) (x-p)/|x-p|^2 that does not depend on eps:
  // -4 pi sum_q nu(q) grad gamma_q plus the full log gradient of q != p.
  std::array<std::array<Field, 2>, 2> fixed{{{g.zeros(), g.zeros()}, {g.zeros(), g.zeros()}}};
  for (std::size_t q = 0; q < table.size(); ++q) {
    const auto nu = multiplicities(setup, table.source(q));
    const auto gg = table.regular_gradient(q);
    for (int i = 0; i < 2; ++i) {
      if (nu[i] == 0) continue;
      for (int a = 0; a < 2; ++a) fixed[i][a].values() -= 4.0 * kPi * nu[i] * gg[a].values();
      if (int(q) == self) continue;
      for (const auto& n : nodes) {
        const Point d = g.displacement(table.source(q), g.node(int(n.index / g.n2()), int(n.index % g.n2())));
        const double r2 = d.x * d.x + d.y * d.y;
        fixed[i][0][n.index] += 2.0 * nu[i] * d.x / r2;
        fixed[i][1][n.index] += 2.0 * nu[i] * d.y / r2;
      }
    }
  }

  CheckResult c;
  c.name = "gradient bound on the rescaled chart";
  c.anchor = "|grad_y u_i(eps y + p) - 2 nu_i y/|y|^2| <= C uniformly in eps";
  c.comparison = Comparison::at_most;
  for (const SweepEntry* e : done) {
    double sup = 0.0;
    for (int i = 0; i < 2; ++i) {
      const auto gu = gradient(g, e->solution.u[i]);
      for (const auto& n : nodes) {
        const double gx = gu[0][n.index] + fixed[i][0][n.index];
        const double gy = gu[1][n.index] + fixed[i][1][n.index];
        sup = std::max(sup, std::hypot(gx, gy));
      }
    }
    c.measured.push_back(e->eps * sup);
  }
  const double lowest = *std::min_element(c.measured.begin(), c.measured.end());
  c.reference.assign(c.measured.size(), growth * lowest);
  c.detail = "bound is " + format_double(growth) + " times the smallest value along the ladder";
  c.pass = evaluate(c);
  return c;
}

CheckResult check_ball_against_radial(const SweepRecord& sweep, const TorusSetup& setup,
                                      const RadialIntegrals& radial, Point p, double tol) {
  const auto done = sweep.converged();
  if (done.empty()) throw Error("ladder too short");
  const int q = vortex_index(sweep, setup.grid, p);
  if (q < 0) throw Error("vortex mismatch");
  CheckResult c;
  c.name = "torus ball mass against the radial integral";
  c.anchor = "mixed ball mass at small eps equals 2 I12 of the entire radial solution";
  c.measured = {done.back()->ball_mass[std::size_t(q)][2]};
  c.reference = {2.0 * radial.i12};
  c.tol = tol;
  c.relative = true;
  c.pass = evaluate(c);
  return c;
}

CheckResult check_radial_integrals(const RadialSolution& radial, double tol) {
  const double n1 = radial.nu[0], n2 = radial.nu[1];
  const RadialIntegrals j = radial_integrals(radial);
  CheckResult c;
  c.name = "radial integral identities";
  c.anchor = "int (1-e^{u1})(1-e^{u2}) = 4 pi nu1 nu2 and int (1-e^{u_i}) = 4 pi (nu1 nu2 + nu_i) over R^2";
  c.measured = {j.i12, j.i1, j.i2};
  c.reference = {4.0 * kPi * n1 * n2, 4.0 * kPi * (n1 * n2 + n1), 4.0 * kPi * (n1 * n2 + n2)};
  c.tol = tol;
  c.relative = true;
  c.detail = "relative tail contribution " + format_double(j.tail) + (j.tail_warning ? " (above 1e-5)" : "");
  c.pass = evaluate(c);
  return c;
}

CheckResult check_decay(const RadialSolution& radial, double r_min) {
  const DecayFit f = decay_fit(radial, r_min);
  CheckResult c;
  c.name = "exponential decay of the radial profiles";
  c.anchor = "|u_i(r)| ~ C r^{-1/2} e^{-r} as r -> infinity";
  c.measured = {f.rate, f.power};
  c.reference = {1.0, 0.5};
  c.tol = 0.05;
  c.relative = true;
  // The prefactor power has its own absolute tolerance.
  c.detail = "power tolerance 0.2 absolute; fit over [" + format_double(r_min) + ", 0.9 R]";
  c.pass = std::abs(f.rate - 1.0) <= 0.05 && std::abs(f.power - 0.5) <= 0.2;
  return c;
}

CheckResult check_symmetric_profiles(const RadialSolution& radial, double tol) {
  if (radial.nu[0] != radial.nu[1]) throw Error("profiles are symmetric only for equal multiplicities");
  CheckResult c;
  c.name = "symmetric reduction u1 = u2";
  c.anchor = "for nu1 = nu2 the system reduces to one scalar equation with u1 = u2";
  c.measured = {(radial.v[0] - radial.v[1]).abs().maxCoeff()};
  c.reference = {0.0};
  c.tol = tol;
  c.pass = evaluate(c);
  return c;
}

CheckResult check_nondegeneracy(int nu1, int nu2, double radius, int mesh, double tol) {
  auto sigma = [&](double r, int m) {
    const RadialSolution base = solve_radial(nu1, nu2, r, m);
    return smallest_modes(LinearizedOperator::radial(base, 0), 1).sigma[0];
  };
  const double coarse = sigma(radius, mesh / 2), fine = sigma(radius, mesh), wide = sigma(1.5 * radius, mesh);
  CheckResult c;
  c.name = "non-degeneracy of the radial linearization";
  c.anchor = "the linearized system about the entire radial solution has trivial bounded kernel";
  c.comparison = Comparison::at_most;
  c.measured = {std::abs(coarse - fine) / fine, std::abs(wide - fine) / fine};
  c.reference = {tol, tol};
  std::ostringstream d;
  d << "sigma_min " << coarse << " (R " << radius << ", mesh " << mesh / 2 << "), " << fine << " (R " << radius
    << ", mesh " << mesh << "), " << wide << " (R " << 1.5 * radius << ", mesh " << mesh << ")";
  c.detail = d.str();
  c.pass = evaluate(c) && std::min({coarse, fine, wide}) > 0.0;
  return c;
}

CheckResult check_zero_base(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw Error("zero-base check needs at least two grids");
  CheckResult c;
  c.name = "linearization about the zero solution";
  c.anchor = "Delta - 1 has smallest singular value 1";
  c.comparison = Comparison::at_most;
  // The eigen-iteration stops at this relative change, so smaller errors are
  // indistinguishable from zero.
  const double floor = ModeOptions{}.tol;
  for (int n : sizes) {
    const auto g = build_grid(2.0 * kPi, 2.0 * kPi, n, n, 0.0);
    const auto s = make_setup(g, VortexSet{});
    const FieldPair zero{{g.zeros(), g.zeros()}, 1.0, Form::regular};
    const double sigma = smallest_modes(LinearizedOperator::torus(s, zero), 1).sigma[0];
    c.measured.push_back(std::abs(sigma - 1.0));
  }
  const bool roundoff = *std::max_element(c.measured.begin(), c.measured.end()) <= floor;
  bool order_ok = true;
  std::ostringstream d;
  d << "observed orders:";
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    const double e0 = c.measured[k - 1], e1 = c.measured[k];
    const double order = e0 > 0 && e1 > 0 ? std::log(e0 / e1) / std::log(double(sizes[k]) / sizes[k - 1]) : NAN;
    d << ' ' << order;
    if (!(order >= 1.8)) order_ok = false;
  }
  if (roundoff) d << "; errors below the eigen-solver tolerance on every grid, so the order is not measurable";
  c.reference.assign(c.measured.size(), floor);
  c.detail = d.str();
  c.pass = roundoff || order_ok;
  return c;
}

FieldPair uniqueness_start(const TorusSetup& setup, double eps, std::uint64_t seed, int index, double* core_scale,
                           double* amplitude) {
  const TorusGrid& g = setup.grid;
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s = 1.0 + 2.0 * unit(rng);
  const double a = 0.5 * unit(rng);
  if (core_scale) *core_scale = s;
  if (amplitude) *amplitude = a;

  const auto points = setup.vortices.distinct_points(g);
  const double core2 = s * s * eps * eps;
  const double node_log = cell_mean_log(g.h1(), g.h2());
  FieldPair p{{g.zeros(), g.zeros()}, eps, Form::full};
  for (int c = 0; c < 2; ++c) {
    Field phi = g.zeros();
    for (int k1 = -3; k1 <= 3; ++k1)
      for (int k2 = -3; k2 <= 3; ++k2) {
        const double amp = (2.0 * unit(rng) - 1.0) / (1.0 + k1 * k1 + k2 * k2);
        const double phase = 2.0 * kPi * unit(rng);
        phi.values() += g.sample([&](Point x) {
                           return amp * std::cos(2.0 * kPi * (k1 * x.x / g.l1() + k2 * x.y / g.l2()) + phase);
                         }).values();
      }
    const double lo = phi.values().minCoeff(), hi = phi.values().maxCoeff();
    phi.values() = (phi.values() - lo) / (hi - lo);

    Field ansatz = g.zeros();
    for (Point q : points) {
      const int nu = setup.vortices.multiplicity_at(c + 1, q, g);
      if (nu == 0) continue;
      ansatz.values() += g.sample([&](Point x) {
                           const double r2 = std::pow(g.distance(q, x), 2);
                           const double log_r = r2 > 0 ? 0.5 * std::log(r2) : node_log;
                           return 2.0 * nu * (log_r - 0.5 * std::log(r2 + core2));
                         }).values();
    }
    p.u[c].values() = (ansatz.values() - a * phi.values()).min(0.0);
  }
  return to_regular(setup, p);
}

UniquenessResult uniqueness_experiment(const TorusSetup& setup, double eps, const UniquenessOptions& opts) {
  if (opts.starts < 2) throw Error("uniqueness experiment needs at least 2 starts");
  UniquenessResult out;
  out.maximal = monotone_solve(setup, eps, opts.monotone).solution;

  out.starts.resize(std::size_t(opts.starts));
  std::vector<FieldPair> solutions(std::size_t(opts.starts));
  parallel_for(opts.starts, opts.threads, [&](int k) {
    StartRecord& s = out.starts[std::size_t(k)];
    s.index = k;
    s.seed = opts.seed;
    const FieldPair init = uniqueness_start(setup, eps, opts.seed, k, &s.core_scale, &s.amplitude);
    try {
      SolveResult r = newton_solve(setup, eps, init, opts.newton);
      s.converged = true;
      s.iterations = r.report.iterations;
      s.residual = r.report.residual;
      s.distance_to_maximal = pair_distance(r.solution, out.maximal);
      solutions[std::size_t(k)] = std::move(r.solution);
    } catch (const SolverFailure& f) {
      s.failure = f.what();
      s.residual = f.last_residual();
      s.iterations = f.iterations();
    }
  });
  const int failures = int(std::count_if(out.starts.begin(), out.starts.end(), [](auto& s) { return !s.converged; }));
  if (2 * failures > opts.starts)
    throw Error("solver failures exceed half of starts (" + std::to_string(failures) + " of " +
                std::to_string(opts.starts) + ")");

  // Greedy clustering with the maximal solution as the first representative.
  std::vector<const FieldPair*> reps{&out.maximal};
  std::vector<const FieldPair*> all{&out.maximal};
  for (std::size_t k = 0; k < out.starts.size(); ++k) {
    if (!out.starts[k].converged) continue;
    const FieldPair& u = solutions[k];
    all.push_back(&u);
    int cluster = -1;
    for (std::size_t r = 0; r < reps.size() && cluster < 0; ++r)
      if (pair_distance(u, *reps[r]) <= opts.cluster_tol) cluster = int(r);
    if (cluster < 0) {
      cluster = int(reps.size());
      reps.push_back(&u);
      if (!out.counterexample) out.counterexample = u;
    }
    out.starts[k].cluster = cluster;
  }
  out.clusters = int(reps.size());
  for (std::size_t a = 0; a < all.size(); ++a)
    for (std::size_t b = a + 1; b < all.size(); ++b)
      out.max_pairwise = std::max(out.max_pairwise, pair_distance(*all[a], *all[b]));

  CheckResult& c = out.check;
  c.name = "uniqueness of the maximal solution";
  c.anchor = "every topological solution coincides with the maximal solution for small eps";
  c.comparison = Comparison::at_most;
  c.measured = {out.max_pairwise, double(out.clusters)};
  c.reference = {opts.cluster_tol, 1.0};
  c.detail = std::to_string(opts.starts - failures) + " of " + std::to_string(opts.starts) +
             " starts converged; seed " + std::to_string(opts.seed);
  c.pass = evaluate(c);
  return out;
}

void write_report_csv(std::ostream& out, const std::vector<CheckResult>& checks) {
  for (const auto& c : checks)
    if (c.anchor.empty()) throw Error("missing anchor for check '" + c.name + "'");
  out << "name,measured,reference,tol,pass,anchor\n";
  for (const auto& c : checks)
    out << quoted(c.name) << ',' << join(c.measured) << ',' << join(c.reference) << ',' << format_double(c.tol) << ','
        << (c.pass ? "true" : "false") << ',' << quoted(c.anchor) << '\n';
}

void write_report_csv(const std::filesystem::path& path, const std::vector<CheckResult>& checks) {
  std::ostringstream s;
  write_report_csv(s, checks);
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << s.str();
}

void write_summary(std::ostream& out, const std::vector<CheckResult>& checks) {
  int passed = 0;
  for (const auto& c : checks) {
    passed += c.pass;
    out << (c.pass ? "PASS " : "FAIL ") << c.name << '\n';
    out << "  measured  " << join(c.measured) << '\n';
    out << "  reference " << join(c.reference) << (c.comparison == Comparison::at_most ? " (upper bounds)" : "");
    if (c.comparison == Comparison::within) out << " tol " << c.tol << (c.relative ? " relative" : " absolute");
    out << '\n' << "  checks    " << c.anchor << '\n';
    if (!c.detail.empty()) out << "  note      " << c.detail << '\n';
  }
  out << passed << " of " << checks.size() << " checks passed\n";
}

void write_sweep_csv(std::ostream& out, const SweepRecord& sweep) {
  out << "eps,converged,classification,residual,iterations,sup_outside,mean1,mean2,flux1,flux2,energy,l1_1,l1_2";
  for (std::size_t q = 0; q < sweep.points.size(); ++q)
    out << ",ball" << q << "_m1,ball" << q << "_m2,ball" << q << "_mixed";
  out << ",failure\n";
  for (const auto& e : sweep.entries) {
    const auto& r = e.report;
    out << format_double(e.eps) << ',' << (e.converged ? "true" : "false") << ','
        << to_string(e.converged ? r.classification : Classification::diverged) << ',' << format_double(r.residual)
        << ',' << r.iterations;
    for (double v : {r.sup_outside, r.means[0], r.means[1], r.flux[0], r.flux[1], r.energy, e.l1_excised[0],
                     e.l1_excised[1]})
      out << ',' << (e.converged ? format_double(v) : "");
    for (std::size_t q = 0; q < sweep.points.size(); ++q)
      for (int j = 0; j < 3; ++j) out << ',' << (e.converged ? format_double(e.ball_mass[q][std::size_t(j)]) : "");
    out << ',' << quoted(e.failure) << '\n';
  }
}

void write_starts_csv(std::ostream& out, const UniquenessResult& result) {
  out << "start,seed,core_scale,amplitude,converged,iterations,residual,distance_to_maximal,cluster,failure\n";
  for (const auto& s : result.starts)
    out << s.index << ',' << s.seed << ',' << format_double(s.core_scale) << ',' << format_double(s.amplitude) << ','
        << (s.converged ? "true" : "false") << ',' << s.iterations << ',' << format_double(s.residual) << ','
        << format_double(s.distance_to_maximal) << ',' << s.cluster << ',' << quoted(s.failure) << '\n';
}

}  // namespace vortexlab
