#include "vortexlab/torus_solver.hpp"

#include <cmath>
#include <numbers>

#include "vortexlab/error.hpp"
#include "vortexlab/krylov.hpp"

namespace vortexlab {

namespace {

constexpr double kPi = std::numbers::pi;

using Coefficients = ExpFields;

Coefficients coefficients(const TorusSetup& s, const FieldPair& pair) {
  Coefficients k;
  for (int c = 0; c < 2; ++c) {
    const auto& w = s.background.weight[c].values();
    const Eigen::ArrayXd U = s.background.u0[c].values() + pair.u[c].values();
    k.P[c] = w * pair.u[c].values().exp();
    k.Q[c] = Eigen::ArrayXd(U.size());
    for (Eigen::Index m = 0; m < U.size(); ++m) k.Q[c][m] = w[m] == 0.0 ? 1.0 : -std::expm1(U[m]);
  }
  return k;
}

double source_density(const TorusSetup& s, int c) {
  return 4.0 * kPi * s.background.totals[c] / s.grid.area();
}

void require_regular(const FieldPair& pair, const TorusSetup& s) {
  if (pair.form != Form::regular) throw Error("field pair must be in regular form");
  for (const auto& f : pair.u)
    if (f.n1() != s.grid.n1() || f.n2() != s.grid.n2()) throw Error("field pair does not match the grid");
}

Residual residual_from(const TorusSetup& s, double eps, const FieldPair& pair, const Coefficients& k) {
  Residual res;
  const double ie2 = 1.0 / (eps * eps);
  for (int c = 0; c < 2; ++c) {
    const int o = 1 - c;
    Field r = laplacian(s.grid, pair.u[c]);
    r.values() += ie2 * k.P[o] * k.Q[c] - source_density(s, c);
    res.norm = std::max(res.norm, r.max_abs());
    res.r[c] = std::move(r);
  }
  return res;
}

double l2_norm(const Residual& r) {
  return std::sqrt((r.r[0].values().square().sum() + r.r[1].values().square().sum()) /
                   double(2 * r.r[0].size()));
}

// l1 norm of the negative part of the discrete kernel of (lambda - Delta_h)^{-1}.
double resolvent_negative_mass(const TorusGrid& grid, double lambda) {
  Field e = grid.zeros();
  e(0, 0) = 1.0;
  const Field k = resolvent(grid, e, lambda);
  return (-k.values()).max(0.0).sum();
}

Eigen::VectorXd stack(const std::array<Field, 2>& f) {
  Eigen::VectorXd v(f[0].size() * 2);
  v << f[0].values().matrix(), f[1].values().matrix();
  return v;
}

std::array<Field, 2> unstack(const TorusGrid& g, const Eigen::VectorXd& v) {
  const Eigen::Index n = Eigen::Index(g.points());
  return {Field(g.n1(), g.n2(), v.head(n).array()), Field(g.n1(), g.n2(), v.tail(n).array())};
}

}  // namespace

ExpFields exp_fields(const TorusSetup& setup, const FieldPair& pair) {
  require_regular(pair, setup);
  return coefficients(setup, pair);
}

TorusSetup make_setup(const TorusGrid& grid, const VortexSet& vortices) {
  VortexSet reduced = vortices.reduce(grid);
  Background bg = background_fields(grid, reduced);
  return TorusSetup{grid, std::move(reduced), std::move(bg)};
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::topological: return "topological";
    case Classification::non_topological_candidate: return "non-topological-candidate";
    case Classification::indeterminate: return "indeterminate";
    case Classification::diverged: return "diverged";
  }
  return "diverged";
}

Residual residual(const TorusSetup& setup, double eps, const FieldPair& pair) {
  require_regular(pair, setup);
  return residual_from(setup, eps, pair, coefficients(setup, pair));
}

double energy(const TorusSetup& setup, double eps, const FieldPair& pair) {
  require_regular(pair, setup);
  const Coefficients k = coefficients(setup, pair);
  const Field lap2 = laplacian(setup.grid, pair.u[1]);
  const double ie2 = 1.0 / (eps * eps);
  const Eigen::ArrayXd density = -pair.u[0].values() * lap2.values() + ie2 * k.Q[0] * k.Q[1] +
                                 source_density(setup, 1) * pair.u[0].values() +
                                 source_density(setup, 0) * pair.u[1].values();
  return density.sum() * setup.grid.cell_area();
}

std::array<double, 2> flux(const TorusSetup& setup, double eps, const FieldPair& pair) {
  require_regular(pair, setup);
  const Coefficients k = coefficients(setup, pair);
  const double scale = setup.grid.cell_area() / (eps * eps);
  return {(k.P[1] * k.Q[0]).sum() * scale, (k.P[0] * k.Q[1]).sum() * scale};
}

FieldPair to_full(const TorusSetup& setup, const FieldPair& pair) {
  if (pair.form == Form::full) return pair;
  FieldPair out = pair;
  for (int c = 0; c < 2; ++c) out.u[c] += setup.background.u0[c];
  out.form = Form::full;
  return out;
}

FieldPair to_regular(const TorusSetup& setup, const FieldPair& pair) {
  if (pair.form == Form::regular) return pair;
  FieldPair out = pair;
  for (int c = 0; c < 2; ++c) out.u[c] -= setup.background.u0[c];
  out.form = Form::regular;
  return out;
}

void summarize(const TorusSetup& setup, const FieldPair& pair, double threshold, SolverReport& report) {
  const FieldPair full = to_full(setup, pair);
  const auto keep = excision_mask(setup.grid, setup.vortices, 2.0 * setup.grid.delta());
  double sup = 0.0;
  for (int c = 0; c < 2; ++c)
    for (Eigen::Index m = 0; m < full.u[c].size(); ++m)
      if (keep[std::size_t(m)]) sup = std::max(sup, std::abs(full.u[c][m]));
  report.sup_outside = sup;
  report.means = {full.u[0].mean(), full.u[1].mean()};
  report.flux = flux(setup, pair.eps, pair);
  report.energy = energy(setup, pair.eps, pair);
  if (!report.converged)
    report.classification = Classification::diverged;
  else if (sup < threshold)
    report.classification = Classification::topological;
  else if (std::min(report.means[0], report.means[1]) < -5.0)
    report.classification = Classification::non_topological_candidate;
  else
    report.classification = Classification::indeterminate;
}

SolveResult monotone_solve(const TorusSetup& setup, double eps, const MonotoneOptions& opts) {
  if (!(eps > 0)) throw Error("eps must be positive");
  const TorusGrid& g = setup.grid;
  FieldPair u{{-1.0 * setup.background.u0[0], -1.0 * setup.background.u0[1]}, eps, Form::regular};
  SolverReport report;
  const double ie2 = 1.0 / (eps * eps);
  for (int k = 0;; ++k) {
    const Coefficients co = coefficients(setup, u);
    const Residual res = residual_from(setup, eps, u, co);
    report.residual = res.norm;
    report.iterations = k;
    if (res.norm <= opts.tol) break;
    if (k >= opts.max_iter)
      throw SolverFailure("max_iter exceeded (last residual " + std::to_string(res.norm) + ")", res.norm, k);

    double shift = 0.0;
    for (int c = 0; c < 2; ++c) shift = std::max(shift, (co.P[1 - c] * (1.0 + co.P[c])).maxCoeff());
    shift = std::max(shift, 1e-12);
    const double lambda = shift * ie2;

    SweepLogEntry entry;
    entry.sweep = k;
    entry.residual = res.norm;
    entry.shift = shift;
    entry.energy = energy(setup, eps, u);
    const double umax = std::max(u.u[0].max_abs(), u.u[1].max_abs());
    entry.allowed_increase = 2.0 * resolvent_negative_mass(g, lambda) * res.norm + 1e-13 * (1.0 + umax);

    FieldPair next = u;
    for (int c = 0; c < 2; ++c) {
      Field rhs = g.zeros();
      rhs.values() = source_density(setup, c) - ie2 * (co.P[1 - c] * co.Q[c] + shift * u.u[c].values());
      next.u[c] = -1.0 * resolvent(g, rhs, lambda);
      entry.max_increase = std::max(entry.max_increase, (next.u[c].values() - u.u[c].values()).maxCoeff());
    }
    report.monotonicity_log.push_back(entry);
    if (entry.max_increase > entry.allowed_increase)
      throw SolverFailure("monotonicity violated at sweep " + std::to_string(k), res.norm, k);
    u = std::move(next);
  }
  report.converged = true;
  summarize(setup, u, opts.topological_threshold, report);
  return {std::move(u), std::move(report)};
}

std::array<Field, 2> apply_jacobian(const TorusSetup& setup, double eps, const FieldPair& base,
                                    const std::array<Field, 2>& d) {
  const Coefficients k = coefficients(setup, base);
  const double ie2 = 1.0 / (eps * eps);
  std::array<Field, 2> out;
  for (int c = 0; c < 2; ++c) {
    const int o = 1 - c;
    Field r = laplacian(setup.grid, d[c]);
    r.values() += ie2 * (-(k.P[0] * k.P[1]) * d[c].values() + k.P[o] * k.Q[c] * d[o].values());
    out[c] = std::move(r);
  }
  return out;
}

SolveResult newton_solve(const TorusSetup& setup, double eps, const FieldPair& init,
                         const NewtonOptions& opts) {
  if (!(eps > 0)) throw Error("eps must be positive");
  require_regular(init, setup);
  const TorusGrid& g = setup.grid;
  const double ie2 = 1.0 / (eps * eps);
  FieldPair u = init;
  u.eps = eps;
  SolverReport report;
  std::vector<double> trace;
  Residual res = residual(setup, eps, u);
  for (int it = 0;; ++it) {
    report.iterations = it;
    report.residual = res.norm;
    if (res.norm <= opts.tol) break;
    trace.push_back(res.norm);
    if (it >= opts.max_iter) throw SolverFailure("max_iter exceeded (last residual " + std::to_string(res.norm) + ")", trace);

    const Coefficients k = coefficients(setup, u);
    const Eigen::ArrayXd diag = -(k.P[0] * k.P[1]) * ie2;
    const std::array<Eigen::ArrayXd, 2> cross{k.P[1] * k.Q[0] * ie2, k.P[0] * k.Q[1] * ie2};
    const Eigen::Index n = Eigen::Index(g.points());
    auto apply = [&](const Eigen::VectorXd& v) {
      auto d = unstack(g, v);
      Eigen::VectorXd out(2 * n);
      for (int c = 0; c < 2; ++c) {
        Field r = laplacian(g, d[c]);
        r.values() += diag * d[c].values() + cross[c] * d[1 - c].values();
        out.segment(c * n, n) = r.values().matrix();
      }
      return out;
    };
    const double sigma = std::clamp((k.P[0] * k.P[1]).maxCoeff(), 1e-3, 1.0);
    auto precond = [&](const Eigen::VectorXd& v) {
      auto d = unstack(g, v);
      Eigen::VectorXd out(2 * n);
      for (int c = 0; c < 2; ++c) out.segment(c * n, n) = -resolvent(g, d[c], sigma * ie2).values().matrix();
      return out;
    };
    const Eigen::VectorXd rhs = -stack(res.r);
    const GmresResult lin = gmres(apply, precond, rhs, Eigen::VectorXd::Zero(2 * n));
    if (!lin.converged && lin.relative_residual > 0.1)
      throw SolverFailure("singular Jacobian (smallest singular value estimate " +
                              std::to_string(lin.sigma_min_estimate) + ")",
                          trace);
    const auto step = unstack(g, lin.x);

    const double merit = l2_norm(res);
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
      FieldPair trial = u;
      for (int c = 0; c < 2; ++c) trial.u[c].values() += t * step[c].values();
      Residual tr = residual(setup, eps, trial);
      if (std::isfinite(tr.norm) && l2_norm(tr) < merit) {
        report.newton_log.push_back({it, res.norm, t, std::max(step[0].max_abs(), step[1].max_abs()),
                                     lin.iterations});
        u = std::move(trial);
        res = std::move(tr);
        accepted = true;
        break;
      }
    }
    if (!accepted) throw SolverFailure("line search stalled", trace);
  }
  report.converged = true;
  summarize(setup, u, opts.topological_threshold, report);
  return {std::move(u), std::move(report)};
}

}  // namespace vortexlab
