#pragma once

#include <Eigen/Core>
#include <array>
#include <boost/math/interpolators/makima.hpp>
#include <memory>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace vortexlab {

// Finite-volume geometry on [0, R]: node radii, face weights and control
// volumes for (1/r)(r v')'. The first interval starts at hmax/20 and grows by
// a factor 1.05 until it reaches hmax; the rest is uniform.
struct RadialMesh {
  Eigen::ArrayXd r;       // N+1 nodes, r[0] = 0, r[N] = R
  Eigen::ArrayXd face;    // N entries: face radius times 1/h between nodes k, k+1
  Eigen::ArrayXd volume;  // N+1 entries: int r dr over each control volume

  int intervals() const { return int(r.size()) - 1; }
  double radius() const { return r[r.size() - 1]; }
};

RadialMesh make_radial_mesh(double radius, int intervals);

enum class FarField { robin, dirichlet };

struct RadialOptions {
  double tol = 1e-8;
  int max_iter = 100;
  FarField far_field = FarField::robin;
};

// Radial topological profiles u_i = 2 nu_i ln r + v_i on [0, R].
struct RadialSolution {
  RadialMesh mesh;
  std::array<int, 2> nu{0, 0};
  std::array<Eigen::ArrayXd, 2> u;  // u(0) = -inf when nu > 0
  std::array<Eigen::ArrayXd, 2> v;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_trace;

  double radius() const { return mesh.radius(); }
};

RadialSolution solve_radial(int nu1, int nu2, double radius, int mesh_size, const RadialOptions& opts = {});

// Balance residual per node: (flux_out - flux_in)/V + e^{u_j}(1 - e^{u_i}).
std::array<Eigen::ArrayXd, 2> radial_residual(const RadialMesh& mesh, const std::array<int, 2>& nu,
                                              const std::array<Eigen::ArrayXd, 2>& v, FarField far_field);

struct DecayFit {
  double rate = 0.0;
  double power = 0.0;
};

// Least-squares fit ln|u| = c - rate*r - power*ln r over [r_min, r_max],
// averaged over the components that do not vanish.
DecayFit decay_fit(const RadialSolution& sol, double r_min);
DecayFit decay_fit_profiles(const Eigen::ArrayXd& r, const std::vector<Eigen::ArrayXd>& profiles, double r_min,
                            double r_max);

struct RadialIntegrals {
  double i12 = 0.0;  // 2pi int (1-e^{u1})(1-e^{u2}) r dr
  double i1 = 0.0;   // 2pi int (1-e^{u1}) r dr
  double i2 = 0.0;
  double tail = 0.0;  // largest relative contribution of the analytic tail
  bool tail_warning = false;
};

RadialIntegrals radial_integrals(const RadialSolution& sol);

// 2pi r^2 [u1' u2' - (1-e^{u1})(1-e^{u2})] - (-2 I12(r) + 8pi nu1 nu2) at
// the mesh node nearest to `radius`; tends to 0 with the discretization error.
double pohozaev_defect(const RadialSolution& sol, double radius);

// Smooth interpolation of v_i (and hence u_i) at arbitrary radii in [0, R].
class RadialInterpolant {
 public:
  explicit RadialInterpolant(const RadialSolution& sol);
  double regular(int component, double r) const;
  double full(int component, double r) const;  // 2 nu ln r + v
  const std::array<int, 2>& nu() const { return nu_; }

 private:
  using Spline = boost::math::interpolators::makima<std::vector<double>>;
  std::array<int, 2> nu_;
  double radius_;
  std::array<std::shared_ptr<const Spline>, 2> v_;
};

void write_profile_csv(std::ostream& out, const RadialSolution& sol);
void write_profile_csv(const std::filesystem::path& path, const RadialSolution& sol);

}  // namespace vortexlab
