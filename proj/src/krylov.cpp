#include "vortexlab/krylov.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace vortexlab {

GmresResult gmres(const LinearMap& apply, const LinearMap& precond, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& x0, const GmresOptions& opts) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  auto M = [&](const VectorXd& v) { return precond ? precond(v) : v; };
  GmresResult out;
  out.x = x0;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.x.setZero();
    out.relative_residual = 0.0;
    out.converged = true;
    return out;
  }
  const int m = opts.restart;
  while (out.iterations < opts.max_iter) {
    VectorXd r = b - apply(out.x);
    double beta = r.norm();
    out.relative_residual = beta / bnorm;
    if (out.relative_residual <= opts.tol) {
      out.converged = true;
      return out;
    }
    MatrixXd V(b.size(), m + 1);
    MatrixXd H = MatrixXd::Zero(m + 1, m);
    VectorXd cs(m), sn(m), g = VectorXd::Zero(m + 1);
    V.col(0) = r / beta;
    g(0) = beta;
    int k = 0;
    for (; k < m && out.iterations < opts.max_iter; ++k, ++out.iterations) {
      VectorXd w = apply(M(V.col(k)));
      for (int i = 0; i <= k; ++i) {  // modified Gram-Schmidt, two passes
        H(i, k) = V.col(i).dot(w);
        w -= H(i, k) * V.col(i);
      }
      for (int i = 0; i <= k; ++i) {
        const double c = V.col(i).dot(w);
        H(i, k) += c;
        w -= c * V.col(i);
      }
      H(k + 1, k) = w.norm();
      if (H(k + 1, k) > 0) V.col(k + 1) = w / H(k + 1, k);
      // Rotated copy for the least-squares residual; H keeps the raw values
      // for the singular value estimate.
      VectorXd col = H.col(k).head(k + 2);
      for (int i = 0; i < k; ++i) {
        const double t = cs(i) * col(i) + sn(i) * col(i + 1);
        col(i + 1) = -sn(i) * col(i) + cs(i) * col(i + 1);
        col(i) = t;
      }
      const double rho = std::hypot(col(k), col(k + 1));
      cs(k) = rho > 0 ? col(k) / rho : 1.0;
      sn(k) = rho > 0 ? col(k + 1) / rho : 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);
      out.relative_residual = std::abs(g(k + 1)) / bnorm;
      if (out.relative_residual <= opts.tol || H(k + 1, k) == 0.0) {
        ++k;
        ++out.iterations;
        break;
      }
    }
    // Solve the k x k least-squares problem on the raw Hessenberg.
    const MatrixXd Hk = H.topLeftCorner(k + 1, k);
    VectorXd rhs = VectorXd::Zero(k + 1);
    rhs(0) = beta;
    Eigen::JacobiSVD<MatrixXd> svd(Hk, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd y = svd.solve(rhs);
    out.sigma_min_estimate = svd.singularValues()(k - 1);
    out.x += M(V.leftCols(k) * y);
    if (out.relative_residual <= opts.tol) {
      const double true_rel = (b - apply(out.x)).norm() / bnorm;
      out.relative_residual = true_rel;
      if (true_rel <= 10 * opts.tol) {
        out.converged = true;
        return out;
      }
    }
  }
  out.relative_residual = (b - apply(out.x)).norm() / bnorm;
  out.converged = out.relative_residual <= opts.tol;
  return out;
}

}  // namespace vortexlab
