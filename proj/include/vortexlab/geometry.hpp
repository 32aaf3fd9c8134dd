#pragma once

#include <array>
#include <memory>
#include <vector>

#include "vortexlab/field.hpp"
#include "vortexlab/spectral.hpp"

namespace vortexlab {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Periodic rectangular lattice on the flat torus [0,L1) x [0,L2). Node (i,j)
// sits at (i*h1, j*h2). delta is the excision radius of T_delta, the set of
// points at distance >= delta from every vortex.
class TorusGrid {
 public:
  TorusGrid(double l1, double l2, int n1, int n2, double delta = 0.0);

  double l1() const { return l1_; }
  double l2() const { return l2_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double h1() const { return l1_ / n1_; }
  double h2() const { return l2_ / n2_; }
  double area() const { return l1_ * l2_; }
  double cell_area() const { return h1() * h2(); }
  double delta() const { return delta_; }
  std::size_t points() const { return std::size_t(n1_) * n2_; }

  Point node(int i, int j) const { return {i * h1(), j * h2()}; }
  Point wrap(Point p) const;
  // Minimum-image displacement to - from, components in [-L/2, L/2).
  Point displacement(Point from, Point to) const;
  double distance(Point a, Point b) const;

  // Signed wave numbers: k1 over the full axis, k2 over the half axis.
  double k1(int index) const;
  double k2(int index) const;
  // |k|^2 in the half-spectrum layout (n1 x (n2/2+1)).
  const Eigen::ArrayXd& k_squared() const { return *k_squared_; }
  const SpectralPlan& plan() const { return *plan_; }

  Field zeros() const { return Field(n1_, n2_, 0.0); }
  template <class F>
  Field sample(F&& f) const {
    Field out = zeros();
    for (int i = 0; i < n1_; ++i)
      for (int j = 0; j < n2_; ++j) out(i, j) = f(node(i, j));
    return out;
  }
  // Grid sum times cell area.
  double integrate(const Field& f) const { return f.values().sum() * cell_area(); }

 private:
  double l1_, l2_;
  int n1_, n2_;
  double delta_;
  std::shared_ptr<const SpectralPlan> plan_;
  std::shared_ptr<const Eigen::ArrayXd> k_squared_;
};

TorusGrid build_grid(double l1, double l2, int n1, int n2, double delta);

using Spectrum = std::vector<Complex>;

// Unnormalized forward transform and its normalized inverse.
Spectrum forward(const TorusGrid& grid, const Field& f);
Field inverse(const TorusGrid& grid, Spectrum s);

Field laplacian(const TorusGrid& grid, const Field& f);

struct PoissonResult {
  Field solution;       // mean zero, laplacian(solution) = g - mean(g)
  double removed_mean;  // mean(g)
  bool flux_mismatch;   // |mean(g)| * area exceeded the tolerance
};
PoissonResult poisson_solve(const TorusGrid& grid, const Field& g, double flux_tolerance = 1e-8);

// (lambda - Delta_h)^{-1} f for lambda > 0.
Field resolvent(const TorusGrid& grid, const Field& f, double lambda);

// Spectral first derivatives (Nyquist mode dropped).
std::array<Field, 2> gradient(const TorusGrid& grid, const Field& f);

// Trigonometric interpolation of grid samples at arbitrary points. The
// tensor form evaluates on the lattice xs x ys and returns an xs.size() x
// ys.size() row-major array.
double interpolate(const TorusGrid& grid, const Field& f, Point p);
Eigen::ArrayXXd interpolate_tensor(const TorusGrid& grid, const Field& f, const Eigen::ArrayXd& xs,
                                   const Eigen::ArrayXd& ys);

struct Vortex {
  Point p;
  int component = 1;  // 1 or 2
  int multiplicity = 1;
};

// Vortex points of both components. On a torus, build with reduce() so points
// are wrapped into the fundamental domain and coincident points of one
// component are merged.
class VortexSet {
 public:
  VortexSet() = default;
  explicit VortexSet(std::vector<Vortex> vortices);

  VortexSet reduce(const TorusGrid& grid) const;
  const std::vector<Vortex>& vortices() const { return vortices_; }
  bool empty() const { return vortices_.empty(); }

  int total(int component) const;
  // nu_i(p): multiplicity of component i sources located at p.
  int multiplicity_at(int component, Point p, const TorusGrid& grid) const;
  // Distinct locations over both components, in first-seen order.
  std::vector<Point> distinct_points(const TorusGrid& grid) const;
  // Minimum distance from x to any vortex point.
  double distance_to_nearest(Point x, const TorusGrid& grid) const;

  VortexSet swapped() const;
  VortexSet scaled(int factor) const;

 private:
  std::vector<Vortex> vortices_;
};

// Discrete unit mass at q: the band-limited delta whose Fourier coefficients
// are e^{-ik.q}/|T| (real cosine at the Nyquist modes).
Field discrete_delta(const TorusGrid& grid, Point q);

// Discrete spectral Green function: mean zero, -Delta_h G = delta_q^h - 1/|T|.
Field green_function(const TorusGrid& grid, Point q);

// Continuum Green functions for a fixed list of sources, built by splitting
// G = S + R + C where S = -(1/2pi) ln r * psi(r) is a smoothly cut-off log,
// R solves Delta R = -Delta S - delta + 1/|T| spectrally (smooth data) and C
// fixes the zero mean. Grid samples use the exact cell average of the log at
// the source node.
class GreenTable {
 public:
  GreenTable(const TorusGrid& grid, std::vector<Point> sources);

  std::size_t size() const { return entries_.size(); }
  Point source(std::size_t k) const { return entries_[k].q; }

  const Field& discrete(std::size_t k) const { return entries_[k].discrete; }
  const Field& continuum(std::size_t k) const { return entries_[k].continuum; }
  // gamma(x,q) = G(x,q) + (1/2pi) ln|x-q| on the grid, finite at q.
  Field regular_part(std::size_t k) const;
  std::array<Field, 2> regular_gradient(std::size_t k) const;
  // G(x, q_k) at an arbitrary point x != q_k.
  double evaluate(std::size_t k, Point x) const;

 private:
  struct Entry {
    Point q;
    Field discrete;
    Field smooth;  // R + C
    Field continuum;
  };
  TorusGrid grid_;
  double cut_center_, cut_width_;
  std::vector<Entry> entries_;

  double cutoff(double r) const;
  double cutoff_slope(double r) const;
  double singular_part(double r) const;
};

// Mean of ln r over the axis-aligned cell of sides h1 x h2 centred at r = 0.
double cell_mean_log(double h1, double h2);

struct Background {
  std::array<Field, 2> u0;      // -4pi sum G(x, p_ji), discrete mean 0
  std::array<Field, 2> weight;  // e^{u0}, exactly 0 at vortex nodes
  std::array<int, 2> totals{0, 0};
};

Background background_fields(const TorusGrid& grid, const VortexSet& vortices);
Background background_fields(const TorusGrid& grid, const VortexSet& vortices,
                             const GreenTable& table);

// Nodes closer than `radius` to some vortex are false.
std::vector<bool> excision_mask(const TorusGrid& grid, const VortexSet& vortices, double radius);

}  // namespace vortexlab
