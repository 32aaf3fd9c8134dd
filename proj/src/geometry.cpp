#include "vortexlab/geometry.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "vortexlab/error.hpp"

namespace vortexlab {

namespace {

constexpr double kPi = std::numbers::pi;

using RowMajorComplex = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double wrap_coordinate(double x, double l) {
  double w = std::fmod(x, l);
  if (w < 0) w += l;
  if (w >= l) w -= l;
  return w;
}

double min_image(double d, double l) {
  d = std::fmod(d, l);
  if (d >= 0.5 * l) d -= l;
  if (d < -0.5 * l) d += l;
  return d;
}

bool same_point(Point a, Point b, const TorusGrid& grid) {
  const double tol = 1e-12 * std::max(grid.l1(), grid.l2());
  return grid.distance(a, b) <= tol;
}

// Phase factor of a shifted delta along one axis: e^{-ikq}, replaced by the
// real cosine on the Nyquist mode so that the band-limited field stays real
// and symmetric.
Complex shift_phase(double k, double q, bool nyquist) {
  if (nyquist) return {std::cos(k * q), 0.0};
  return std::polar(1.0, -k * q);
}

// Per-axis interpolation basis; see interpolate_tensor.
Eigen::MatrixXcd axis_basis_full(const TorusGrid& grid, const Eigen::ArrayXd& xs) {
  const int n = grid.n1();
  Eigen::MatrixXcd b(xs.size(), n);
  for (Eigen::Index a = 0; a < xs.size(); ++a)
    for (int i = 0; i < n; ++i) {
      const double k = grid.k1(i);
      b(a, i) = (i == n / 2) ? Complex(std::cos(k * xs[a]), 0.0) : std::polar(1.0, k * xs[a]);
    }
  return b;
}

Eigen::MatrixXcd axis_basis_half(const TorusGrid& grid, const Eigen::ArrayXd& ys) {
  const int n = grid.n2();
  const int nh = n / 2 + 1;
  Eigen::MatrixXcd b(nh, ys.size());
  for (int j = 0; j < nh; ++j) {
    const double k = grid.k2(j);
    for (Eigen::Index c = 0; c < ys.size(); ++c) {
      if (j == 0)
        b(j, c) = 1.0;
      else if (j == n / 2)
        b(j, c) = Complex(std::cos(k * ys[c]), 0.0);
      else
        b(j, c) = 2.0 * std::polar(1.0, k * ys[c]);
    }
  }
  return b;
}

}  // namespace

TorusGrid::TorusGrid(double l1, double l2, int n1, int n2, double delta)
    : l1_(l1), l2_(l2), n1_(n1), n2_(n2), delta_(delta) {
  if (!(l1 > 0) || !(l2 > 0)) throw Error("side lengths must be positive");
  if (n1 % 2 != 0 || n2 % 2 != 0) throw Error("grid size must be even");
  if (n1 < 16 || n2 < 16) throw Error("grid size must be at least 16");
  if (!(delta >= 0) || !(delta < 0.5 * std::min(l1, l2)))
    throw Error("excision radius must satisfy 0 <= delta < min(L1, L2)/2");
  plan_ = std::make_shared<const SpectralPlan>(n1, n2);
  const int nh = n2 / 2 + 1;
  Eigen::ArrayXd ks(std::size_t(n1) * nh);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < nh; ++j) ks[i * nh + j] = k1(i) * k1(i) + k2(j) * k2(j);
  k_squared_ = std::make_shared<const Eigen::ArrayXd>(std::move(ks));
}

TorusGrid build_grid(double l1, double l2, int n1, int n2, double delta) {
  return TorusGrid(l1, l2, n1, n2, delta);
}

Point TorusGrid::wrap(Point p) const { return {wrap_coordinate(p.x, l1_), wrap_coordinate(p.y, l2_)}; }

Point TorusGrid::displacement(Point from, Point to) const {
  return {min_image(to.x - from.x, l1_), min_image(to.y - from.y, l2_)};
}

double TorusGrid::distance(Point a, Point b) const {
  const Point d = displacement(a, b);
  return std::hypot(d.x, d.y);
}

double TorusGrid::k1(int index) const {
  const int m = index <= n1_ / 2 ? index : index - n1_;
  return 2.0 * kPi * m / l1_;
}

double TorusGrid::k2(int index) const { return 2.0 * kPi * index / l2_; }

Spectrum forward(const TorusGrid& grid, const Field& f) {
  Spectrum s(grid.plan().spectrum_size());
  grid.plan().forward(f.data(), s.data());
  return s;
}

Field inverse(const TorusGrid& grid, Spectrum s) {
  Field out = grid.zeros();
  grid.plan().inverse(s.data(), out.data());
  out *= 1.0 / double(grid.points());
  return out;
}

Field laplacian(const TorusGrid& grid, const Field& f) {
  Spectrum s = forward(grid, f);
  const auto& ks = grid.k_squared();
  for (std::size_t m = 0; m < s.size(); ++m) s[m] *= -ks[Eigen::Index(m)];
  return inverse(grid, std::move(s));
}

PoissonResult poisson_solve(const TorusGrid& grid, const Field& g, double flux_tolerance) {
  Spectrum s = forward(grid, g);
  const double mean = s[0].real() / double(grid.points());
  const auto& ks = grid.k_squared();
  s[0] = 0.0;
  for (std::size_t m = 1; m < s.size(); ++m) s[m] /= -ks[Eigen::Index(m)];
  PoissonResult out{inverse(grid, std::move(s)), mean, false};
  out.flux_mismatch = std::abs(mean) * grid.area() > flux_tolerance;
  return out;
}

Field resolvent(const TorusGrid& grid, const Field& f, double lambda) {
  Spectrum s = forward(grid, f);
  const auto& ks = grid.k_squared();
  for (std::size_t m = 0; m < s.size(); ++m) s[m] /= lambda + ks[Eigen::Index(m)];
  return inverse(grid, std::move(s));
}

std::array<Field, 2> gradient(const TorusGrid& grid, const Field& f) {
  const Spectrum s = forward(grid, f);
  const int n1 = grid.n1();
  const int nh = grid.n2() / 2 + 1;
  Spectrum sx(s.size()), sy(s.size());
  const Complex I(0.0, 1.0);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < nh; ++j) {
      const std::size_t m = std::size_t(i) * nh + j;
      sx[m] = (i == n1 / 2) ? 0.0 : I * grid.k1(i) * s[m];
      sy[m] = (j == grid.n2() / 2) ? 0.0 : I * grid.k2(j) * s[m];
    }
  return {inverse(grid, std::move(sx)), inverse(grid, std::move(sy))};
}

Eigen::ArrayXXd interpolate_tensor(const TorusGrid& grid, const Field& f, const Eigen::ArrayXd& xs,
                                   const Eigen::ArrayXd& ys) {
  const Spectrum s = forward(grid, f);
  const int nh = grid.n2() / 2 + 1;
  Eigen::Map<const RowMajorComplex> spec(s.data(), grid.n1(), nh);
  const Eigen::MatrixXcd left = axis_basis_full(grid, xs) * spec;
  const Eigen::MatrixXcd vals = left * axis_basis_half(grid, ys);
  return vals.real().array() / double(grid.points());
}

double interpolate(const TorusGrid& grid, const Field& f, Point p) {
  Eigen::ArrayXd xs(1), ys(1);
  xs << p.x;
  ys << p.y;
  return interpolate_tensor(grid, f, xs, ys)(0, 0);
}

VortexSet::VortexSet(std::vector<Vortex> vortices) : vortices_(std::move(vortices)) {
  for (const auto& v : vortices_) {
    if (v.component != 1 && v.component != 2) throw Error("vortex component must be 1 or 2");
    if (v.multiplicity < 1) throw Error("vortex multiplicity must be at least 1");
    if (!std::isfinite(v.p.x) || !std::isfinite(v.p.y)) throw Error("vortex position must be finite");
  }
}

VortexSet VortexSet::reduce(const TorusGrid& grid) const {
  std::vector<Vortex> out;
  for (Vortex v : vortices_) {
    v.p = grid.wrap(v.p);
    bool merged = false;
    for (auto& w : out)
      if (w.component == v.component && same_point(w.p, v.p, grid)) {
        w.multiplicity += v.multiplicity;
        merged = true;
        break;
      }
    if (!merged) out.push_back(v);
  }
  return VortexSet(std::move(out));
}

int VortexSet::total(int component) const {
  int n = 0;
  for (const auto& v : vortices_)
    if (v.component == component) n += v.multiplicity;
  return n;
}

int VortexSet::multiplicity_at(int component, Point p, const TorusGrid& grid) const {
  int n = 0;
  for (const auto& v : vortices_)
    if (v.component == component && same_point(v.p, p, grid)) n += v.multiplicity;
  return n;
}

std::vector<Point> VortexSet::distinct_points(const TorusGrid& grid) const {
  std::vector<Point> pts;
  for (const auto& v : vortices_) {
    bool seen = false;
    for (const auto& q : pts) seen = seen || same_point(q, v.p, grid);
    if (!seen) pts.push_back(v.p);
  }
  return pts;
}

double VortexSet::distance_to_nearest(Point x, const TorusGrid& grid) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& v : vortices_) d = std::min(d, grid.distance(x, v.p));
  return d;
}

VortexSet VortexSet::swapped() const {
  auto out = vortices_;
  for (auto& v : out) v.component = 3 - v.component;
  return VortexSet(std::move(out));
}

VortexSet VortexSet::scaled(int factor) const {
  auto out = vortices_;
  for (auto& v : out) v.multiplicity *= factor;
  return VortexSet(std::move(out));
}

namespace {

Spectrum shifted_spectrum(const TorusGrid& grid, Point q, bool invert_laplacian) {
  const int n1 = grid.n1();
  const int nh = grid.n2() / 2 + 1;
  const double scale = double(grid.points()) / grid.area();
  const auto& ks = grid.k_squared();
  Spectrum s(grid.plan().spectrum_size());
  for (int i = 0; i < n1; ++i) {
    const Complex p1 = shift_phase(grid.k1(i), q.x, i == n1 / 2);
    for (int j = 0; j < nh; ++j) {
      const std::size_t m = std::size_t(i) * nh + j;
      const Complex p2 = shift_phase(grid.k2(j), q.y, j == grid.n2() / 2);
      Complex c = scale * p1 * p2;
      if (invert_laplacian) c = (m == 0) ? Complex(0.0) : c / ks[Eigen::Index(m)];
      s[m] = c;
    }
  }
  return s;
}

}  // namespace

Field discrete_delta(const TorusGrid& grid, Point q) {
  return inverse(grid, shifted_spectrum(grid, q, false));
}

Field green_function(const TorusGrid& grid, Point q) {
  return inverse(grid, shifted_spectrum(grid, q, true));
}

double cell_mean_log(double h1, double h2) {
  // Quarter cell [0,a]x[0,b]: int int ln(x^2+y^2) = ab ln(a^2+b^2) - 3ab
  // + a^2 atan(b/a) + b^2 atan(a/b); ln r is half of ln(x^2+y^2).
  const double a = 0.5 * h1, b = 0.5 * h2;
  const double integral =
      a * b * std::log(a * a + b * b) - 3.0 * a * b + a * a * std::atan(b / a) + b * b * std::atan(a / b);
  return integral / (2.0 * a * b);
}

GreenTable::GreenTable(const TorusGrid& grid, std::vector<Point> sources) : grid_(grid) {
  const double lmin = std::min(grid.l1(), grid.l2());
  cut_center_ = lmin / 4.0;
  cut_width_ = lmin / 24.0;
  const double w = cut_width_;
  const double node_tol = 1e-9 * std::min(grid.h1(), grid.h2());

  // int_T S = -int_0^B r ln r psi dr * 2pi/(2pi); psi vanishes to round-off
  // beyond B = lmin/2.
  const double big = 0.5 * lmin;
  const double tail = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double r) { return r > 0 ? r * std::log(r) * (1.0 - cutoff(r)) : 0.0; }, 0.0, big, 15,
      1e-14);
  const double s_integral = -(0.5 * big * big * std::log(big) - 0.25 * big * big - tail);
  const double s_mean = s_integral / grid.area();

  for (Point q : sources) {
    q = grid.wrap(q);
    Field singular = grid.zeros();
    Field source = grid.zeros();
    for (int i = 0; i < grid.n1(); ++i)
      for (int j = 0; j < grid.n2(); ++j) {
        const Point d = grid.displacement(q, grid.node(i, j));
        const double r = std::hypot(d.x, d.y);
        if (r <= node_tol) {
          singular(i, j) = -cell_mean_log(grid.h1(), grid.h2()) / (2.0 * kPi);
          continue;
        }
        singular(i, j) = singular_part(r);
        const double z = (r - cut_center_) / w;
        const double e = std::exp(-z * z);
        const double d1 = -e / (w * std::sqrt(kPi));
        const double d2 = 2.0 * z * e / (w * w * std::sqrt(kPi));
        source(i, j) = (2.0 * d1 / r + std::log(r) * (d2 + d1 / r)) / (2.0 * kPi);
      }
    Field smooth = poisson_solve(grid, source, std::numeric_limits<double>::infinity()).solution;
    smooth += -s_mean;
    Entry e{q, green_function(grid, q), smooth, singular + smooth};
    entries_.push_back(std::move(e));
  }
}

double GreenTable::cutoff(double r) const {
  return 0.5 * std::erfc((r - cut_center_) / cut_width_);
}

double GreenTable::cutoff_slope(double r) const {
  const double z = (r - cut_center_) / cut_width_;
  return -std::exp(-z * z) / (cut_width_ * std::sqrt(kPi));
}

double GreenTable::singular_part(double r) const { return -std::log(r) * cutoff(r) / (2.0 * kPi); }

Field GreenTable::regular_part(std::size_t k) const {
  const Entry& e = entries_[k];
  Field out = e.smooth;
  for (int i = 0; i < grid_.n1(); ++i)
    for (int j = 0; j < grid_.n2(); ++j) {
      const double r = grid_.distance(e.q, grid_.node(i, j));
      if (r > 0) out(i, j) += std::log(r) * (1.0 - cutoff(r)) / (2.0 * kPi);
    }
  return out;
}

std::array<Field, 2> GreenTable::regular_gradient(std::size_t k) const {
  const Entry& e = entries_[k];
  auto g = gradient(grid_, e.smooth);
  for (int i = 0; i < grid_.n1(); ++i)
    for (int j = 0; j < grid_.n2(); ++j) {
      const Point d = grid_.displacement(e.q, grid_.node(i, j));
      const double r = std::hypot(d.x, d.y);
      if (r == 0) continue;
      const double radial = ((1.0 - cutoff(r)) / r - std::log(r) * cutoff_slope(r)) / (2.0 * kPi);
      g[0](i, j) += radial * d.x / r;
      g[1](i, j) += radial * d.y / r;
    }
  return g;
}

double GreenTable::evaluate(std::size_t k, Point x) const {
  const Entry& e = entries_[k];
  const double r = grid_.distance(e.q, x);
  return singular_part(r) + interpolate(grid_, e.smooth, grid_.wrap(x));
}

Background background_fields(const TorusGrid& grid, const VortexSet& vortices) {
  return background_fields(grid, vortices, GreenTable(grid, vortices.distinct_points(grid)));
}

Background background_fields(const TorusGrid& grid, const VortexSet& vortices,
                             const GreenTable& table) {
  Background bg;
  const double node_tol = 1e-9 * std::min(grid.h1(), grid.h2());
  for (int c = 0; c < 2; ++c) {
    Field u0 = grid.zeros();
    for (const auto& v : vortices.vortices()) {
      if (v.component != c + 1) continue;
      std::size_t k = 0;
      while (k < table.size() && grid.distance(table.source(k), v.p) > node_tol) ++k;
      if (k == table.size()) throw Error("Green table lacks a vortex point");
      u0.values() += (-4.0 * kPi * v.multiplicity) * table.continuum(k).values();
    }
    u0 += -u0.mean();
    Field weight = grid.zeros();
    weight.values() = u0.values().exp();
    for (const auto& v : vortices.vortices()) {
      if (v.component != c + 1) continue;
      for (int i = 0; i < grid.n1(); ++i)
        for (int j = 0; j < grid.n2(); ++j)
          if (grid.distance(v.p, grid.node(i, j)) <= node_tol) weight(i, j) = 0.0;
    }
    bg.u0[c] = std::move(u0);
    bg.weight[c] = std::move(weight);
    bg.totals[c] = vortices.total(c + 1);
  }
  return bg;
}

std::vector<bool> excision_mask(const TorusGrid& grid, const VortexSet& vortices, double radius) {
  std::vector<bool> keep(grid.points(), true);
  for (int i = 0; i < grid.n1(); ++i)
    for (int j = 0; j < grid.n2(); ++j)
      keep[std::size_t(i) * grid.n2() + j] = vortices.distance_to_nearest(grid.node(i, j), grid) >= radius;
  return keep;
}

}  // namespace vortexlab
