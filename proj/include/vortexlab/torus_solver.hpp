#pragma once

#include <array>
#include <string>
#include <vector>

#include "vortexlab/field_pair.hpp"
#include "vortexlab/geometry.hpp"

namespace vortexlab {

// Grid, reduced vortex set and background fields: everything about a torus
// configuration that does not depend on eps.
struct TorusSetup {
  TorusGrid grid;
  VortexSet vortices;
  Background background;
};

TorusSetup make_setup(const TorusGrid& grid, const VortexSet& vortices);

enum class Classification { topological, non_topological_candidate, indeterminate, diverged };
std::string to_string(Classification c);

struct SweepLogEntry {
  int sweep = 0;
  double residual = 0.0;        // residual of the iterate entering the sweep
  double shift = 0.0;           // c in (Delta_h - c/eps^2)
  double max_increase = 0.0;    // max over grid of u^{k+1} - u^k
  double allowed_increase = 0.0;
  double energy = 0.0;          // functional at the entering iterate
};

struct NewtonLogEntry {
  int iteration = 0;
  double residual = 0.0;  // residual entering the iteration
  double step = 0.0;      // accepted damping factor
  double step_norm = 0.0; // infinity norm of the full Newton update
  int krylov_iterations = 0;
};

struct SolverReport {
  int iterations = 0;
  double residual = 0.0;  // infinity norm of the discrete regular system
  bool converged = false;
  std::vector<SweepLogEntry> monotonicity_log;
  std::vector<NewtonLogEntry> newton_log;
  Classification classification = Classification::diverged;
  double sup_outside = 0.0;  // max_i sup |u_i(full)| on T_{2 delta}
  std::array<double, 2> means{0.0, 0.0};  // d_i = mean of u_i(full)
  std::array<double, 2> flux{0.0, 0.0};
  double energy = 0.0;
};

struct SolveResult {
  FieldPair solution;  // regular form
  SolverReport report;
};

struct Residual {
  std::array<Field, 2> r;
  double norm = 0.0;
};

// r_i = Delta_h u_i + eps^-2 e^{U_j}(1 - e^{U_i}) - 4 pi N_i/|T|, U = u0 + u.
Residual residual(const TorusSetup& setup, double eps, const FieldPair& pair);

// Discrete functional whose critical points solve the regular system:
// sum h1 h2 [ -u1 Delta_h u2 + eps^-2 (1-e^{U1})(1-e^{U2}) + (4pi/|T|)(N2 u1 + N1 u2) ].
double energy(const TorusSetup& setup, double eps, const FieldPair& pair);

// Per-component eps^-2 sum h1 h2 e^{U_j}(1 - e^{U_i}).
std::array<double, 2> flux(const TorusSetup& setup, double eps, const FieldPair& pair);

FieldPair to_full(const TorusSetup& setup, const FieldPair& pair);
FieldPair to_regular(const TorusSetup& setup, const FieldPair& pair);

// Fills classification, sup_outside, means, flux and energy of `report` from a
// converged regular pair.
void summarize(const TorusSetup& setup, const FieldPair& pair, double threshold, SolverReport& report);

struct MonotoneOptions {
  double tol = 1e-8;
  int max_iter = 20000;
  double topological_threshold = 0.1;
};

// Monotone iteration from the supersolution u(full) = 0. Throws SolverFailure
// with "max_iter exceeded" or "monotonicity violated".
SolveResult monotone_solve(const TorusSetup& setup, double eps, const MonotoneOptions& opts = {});

struct NewtonOptions {
  double tol = 1e-8;
  int max_iter = 40;
  int max_halvings = 30;
  double topological_threshold = 0.1;
};

// Damped Newton on the regular system with matrix-free GMRES. Throws
// SolverFailure with "singular Jacobian", "max_iter exceeded" or
// "line search stalled".
SolveResult newton_solve(const TorusSetup& setup, double eps, const FieldPair& init,
                         const NewtonOptions& opts = {});

// P_i = e^{U_i} and Q_i = 1 - e^{U_i} with U_i = u0_i + u_i. Q uses expm1 to
// keep relative accuracy where U is tiny; at vortex nodes P = 0 and Q = 1.
struct ExpFields {
  std::array<Eigen::ArrayXd, 2> P, Q;
};
ExpFields exp_fields(const TorusSetup& setup, const FieldPair& pair);

// Applies the Jacobian of the regular system at `base` to (d1, d2).
std::array<Field, 2> apply_jacobian(const TorusSetup& setup, double eps, const FieldPair& base,
                                    const std::array<Field, 2>& d);

}  // namespace vortexlab
