#pragma once

#include <Eigen/Core>
#include <functional>

namespace vortexlab {

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct GmresOptions {
  double tol = 1e-10;  // relative to ||b||
  int restart = 60;
  int max_iter = 600;
};

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 1.0;
  bool converged = false;
  // Smallest singular value of the last Arnoldi Hessenberg matrix: an
  // estimate of sigma_min of the preconditioned operator.
  double sigma_min_estimate = 0.0;
};

// Restarted GMRES with right preconditioning: solves A x = b by minimizing
// ||b - A M^{-1} y|| and returning x = M^{-1} y. Pass an empty `precond` for
// the identity.
GmresResult gmres(const LinearMap& apply, const LinearMap& precond, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& x0, const GmresOptions& opts = {});

}  // namespace vortexlab
