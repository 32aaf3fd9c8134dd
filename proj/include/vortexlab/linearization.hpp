#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vortexlab/radial.hpp"
#include "vortexlab/torus_solver.hpp"

namespace vortexlab {

// Linearization of the system about a converged solution, acting on stacked
// perturbations [A; B]. All vector operations use the weighted variables
// x = W^{1/2} [A; B], W being the control volume of each unknown, so the
// Euclidean norm of x is the L2 norm of the perturbation and the singular
// values below are those of L in L2.
class LinearizedOperator {
 public:
  enum class Kind { torus, radial };

  // Jacobian of the regular torus system. Throws Error("base not converged")
  // when the residual of `base` exceeds `tol`.
  static LinearizedOperator torus(const TorusSetup& setup, const FieldPair& base, double tol = 1e-6);

  // Radial linearization restricted to angular mode m: the Laplacian picks up
  // -m^2/r^2 and A(0) = B(0) = 0 for m >= 1. The far field uses the same Robin
  // closure as the profile solver.
  static LinearizedOperator radial(const RadialSolution& base, int angular_mode = 0, double tol = 1e-6);

  Kind kind() const { return kind_; }
  Eigen::Index size() const { return weights_.size(); }
  int mesh_size() const { return mesh_size_; }
  const std::string& descriptor() const { return descriptor_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& b) const;

  // Converts between weighted variables and the perturbation pair.
  std::array<Eigen::ArrayXd, 2> unweight(const Eigen::VectorXd& x) const;
  Eigen::VectorXd weight(const std::array<Eigen::ArrayXd, 2>& ab) const;

 private:
  struct TorusData;
  struct RadialData;

  LinearizedOperator() = default;
  Eigen::VectorXd torus_apply(const Eigen::VectorXd& x, bool transpose) const;
  Eigen::VectorXd torus_solve(const Eigen::VectorXd& b, bool transpose) const;

  Kind kind_ = Kind::torus;
  int mesh_size_ = 0;
  std::string descriptor_;
  Eigen::VectorXd weights_;
  std::shared_ptr<const TorusData> torus_;
  std::shared_ptr<const RadialData> radial_;
};

struct ModeOptions {
  double tol = 1e-10;  // relative change of the Ritz values between sweeps
  int max_iter = 400;
  int extra_vectors = 3;
  std::uint64_t seed = 12345;
};

struct Modes {
  std::vector<double> sigma;                         // ascending
  std::vector<std::array<Eigen::ArrayXd, 2>> vectors;  // right singular vectors, L2-normalized
  int iterations = 0;
};

// Smallest singular values of L by subspace inverse iteration on L^T L with
// Rayleigh-Ritz. Throws Error("iteration stagnated") without convergence.
Modes smallest_modes(const LinearizedOperator& op, int count, const ModeOptions& opts = {});

void write_modes_csv(std::ostream& out, const Modes& modes, int mesh_size, const std::string& base);
void write_modes_csv(const std::filesystem::path& path, const Modes& modes, int mesh_size,
                     const std::string& base);

// Normalized difference of two pairs sampled on a lattice.
struct LinearizedPair {
  std::array<Eigen::ArrayXd, 2> values;  // A, B; row-major over xs x ys
  Eigen::ArrayXd xs, ys;
  double norm = 0.0;  // infinity norm of the component normalized to 1
  Point peak;         // lattice point where |A| = 1
  bool swapped = false;
  // Exact difference quotients (e^a - e^b)/(a - b) of e^{U_A}, e^{U_B} and
  // e^{U_A + U_B}, so that for two exact solutions
  //   Delta A + eps^-2 [q_B B - q_AB (A + B)] = 0
  // and symmetrically for B.
  std::array<Eigen::ArrayXd, 3> quotients;
};

// (u - v)/||u_1 - v_1|| for two regular pairs on the same grid and eps. The
// components swap roles when the second difference is larger. Throws
// Error("identical solutions") when both differences are below 1e-13.
LinearizedPair difference_pair(const TorusSetup& setup, const FieldPair& u, const FieldPair& v);

// Samples a torus difference pair at center + eps*y for y on the square
// lattice [-radius, radius]^2 with the given spacing. Throws
// Error("radius exceeds chart") when eps*radius > chart_radius.
LinearizedPair rescaled_pair(const TorusGrid& grid, const LinearizedPair& pair, Point center, double eps,
                             double radius, double spacing, double chart_radius);

}  // namespace vortexlab
