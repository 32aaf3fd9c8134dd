#include "vortexlab/radial.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

#include "vortexlab/error.hpp"
#include "vortexlab/field_io.hpp"

namespace vortexlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGrowth = 1.05;
constexpr double kFirstRatio = 20.0;  // hmax / first interval

// e^{u} and 1 - e^{u} for u = 2 nu ln r + v, exact at r = 0.
struct Exponentials {
  std::array<Eigen::ArrayXd, 2> e, one_minus_e;
};

Exponentials exponentials(const RadialMesh& m, const std::array<int, 2>& nu,
                          const std::array<Eigen::ArrayXd, 2>& v) {
  Exponentials x;
  const Eigen::Index n = m.r.size();
  for (int c = 0; c < 2; ++c) {
    x.e[c].resize(n);
    x.one_minus_e[c].resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == 0 && nu[c] > 0) {
        x.e[c][k] = 0.0;
        x.one_minus_e[c][k] = 1.0;
        continue;
      }
      const double u = (nu[c] > 0 ? 2.0 * nu[c] * std::log(m.r[k]) : 0.0) + v[c][k];
      x.e[c][k] = std::exp(u);
      x.one_minus_e[c][k] = -std::expm1(u);
    }
  }
  return x;
}

double log_radius(int nu, double r) { return nu > 0 ? 2.0 * nu * std::log(r) : 0.0; }

// Outward flux r v' at R under the Robin closure u' = -(1 + 1/(2R)) u.
double robin_flux(int nu, double radius, double v_end) {
  const double u = log_radius(nu, radius) + v_end;
  return radius * (-(1.0 + 0.5 / radius) * u - 2.0 * nu / radius);
}

}  // namespace

RadialMesh make_radial_mesh(double radius, int intervals) {
  const int graded = int(std::ceil(std::log(kFirstRatio) / std::log(kGrowth)));
  if (intervals < graded + 20) throw Error("radial mesh needs at least " + std::to_string(graded + 20) + " intervals");
  if (!(radius > 0)) throw Error("radius must be positive");
  // Total length is linear in hmax: graded part plus uniform remainder.
  const double graded_sum = (std::pow(kGrowth, graded) - 1.0) / (kGrowth - 1.0) / kFirstRatio;
  const double hmax = radius / (graded_sum + (intervals - graded));
  RadialMesh m;
  m.r.resize(intervals + 1);
  m.r[0] = 0.0;
  double h = hmax / kFirstRatio;
  for (int k = 1; k <= intervals; ++k) {
    const double step = k <= graded ? h : hmax;
    m.r[k] = m.r[k - 1] + step;
    h *= kGrowth;
  }
  m.r[intervals] = radius;
  m.face.resize(intervals);
  for (int k = 0; k < intervals; ++k) {
    const double a = m.r[k], b = m.r[k + 1];
    // Log-mean radius makes the discrete flux of ln r exactly constant.
    const double rho = k == 0 ? 0.5 * b : (b - a) / std::log(b / a);
    m.face[k] = rho / (b - a);
  }
  m.volume.resize(intervals + 1);
  m.volume[0] = m.r[1] * m.r[1] / 8.0;
  for (int k = 1; k < intervals; ++k) m.volume[k] = m.r[k] * (m.r[k + 1] - m.r[k - 1]) / 2.0;
  m.volume[intervals] = radius * (radius - m.r[intervals - 1]) / 2.0;
  return m;
}

std::array<Eigen::ArrayXd, 2> radial_residual(const RadialMesh& m, const std::array<int, 2>& nu,
                                              const std::array<Eigen::ArrayXd, 2>& v, FarField far_field) {
  const int n = m.intervals();
  const Exponentials x = exponentials(m, nu, v);
  std::array<Eigen::ArrayXd, 2> res;
  for (int c = 0; c < 2; ++c) {
    const int o = 1 - c;
    Eigen::ArrayXd r(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double out = k < n ? m.face[k] * (v[c][k + 1] - v[c][k]) : robin_flux(nu[c], m.radius(), v[c][n]);
      const double in = k > 0 ? m.face[k - 1] * (v[c][k] - v[c][k - 1]) : 0.0;
      r[k] = (out - in) / m.volume[k] + x.e[o][k] * x.one_minus_e[c][k];
    }
    if (far_field == FarField::dirichlet) r[n] = v[c][n] + log_radius(nu[c], m.radius());
    res[c] = std::move(r);
  }
  return res;
}

RadialSolution solve_radial(int nu1, int nu2, double radius, int mesh_size, const RadialOptions& opts) {
  if (nu1 < 0 || nu2 < 0) throw Error("multiplicities must be non-negative");
  if (radius < 20.0) throw Error("truncation radius must be at least 20");
  RadialSolution sol;
  sol.mesh = make_radial_mesh(radius, mesh_size);
  sol.nu = {nu1, nu2};
  const RadialMesh& m = sol.mesh;
  const int n = m.intervals();
  const Eigen::Index dim = 2 * Eigen::Index(n + 1);

  std::array<Eigen::ArrayXd, 2> v;
  // Core ansatz u = 2 nu ln(r / sqrt(r^2 + 2 nu)).
  for (int c = 0; c < 2; ++c)
    v[c] = sol.nu[c] > 0 ? Eigen::ArrayXd(-double(sol.nu[c]) * (m.r.square() + 2.0 * sol.nu[c]).log())
                         : Eigen::ArrayXd::Zero(m.r.size());

  auto norm_inf = [](const std::array<Eigen::ArrayXd, 2>& r) {
    return std::max(r[0].abs().maxCoeff(), r[1].abs().maxCoeff());
  };
  auto norm_l2 = [&](const std::array<Eigen::ArrayXd, 2>& r) {
    return std::sqrt(((r[0].square() + r[1].square()) * m.volume).sum());
  };

  auto res = radial_residual(m, sol.nu, v, opts.far_field);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (int it = 0;; ++it) {
    const double rn = norm_inf(res);
    sol.residual_trace.push_back(rn);
    sol.residual = rn;
    sol.iterations = it;
    if (rn <= opts.tol) break;
    if (it >= opts.max_iter) throw SolverFailure("Newton failed: iteration limit", sol.residual_trace);

    // Jacobian with unknowns interleaved as (v1_k, v2_k).
    const Exponentials x = exponentials(m, sol.nu, v);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(std::size_t(dim) * 4);
    for (int c = 0; c < 2; ++c) {
      const int o = 1 - c;
      for (int k = 0; k <= n; ++k) {
        const Eigen::Index row = 2 * k + c;
        if (opts.far_field == FarField::dirichlet && k == n) {
          t.emplace_back(row, row, 1.0);
          continue;
        }
        double diag = 0.0;
        if (k < n) {
          diag -= m.face[k];
          t.emplace_back(row, 2 * (k + 1) + c, m.face[k] / m.volume[k]);
        } else {
          diag -= m.radius() * (1.0 + 0.5 / m.radius());
        }
        if (k > 0) {
          diag -= m.face[k - 1];
          t.emplace_back(row, 2 * (k - 1) + c, m.face[k - 1] / m.volume[k]);
        }
        t.emplace_back(row, row, diag / m.volume[k] - x.e[o][k] * x.e[c][k]);
        t.emplace_back(row, 2 * k + o, x.e[o][k] * x.one_minus_e[c][k]);
      }
    }
    Eigen::SparseMatrix<double> jac(dim, dim);
    jac.setFromTriplets(t.begin(), t.end());
    if (it == 0) lu.analyzePattern(jac);
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) throw SolverFailure("Newton failed: singular Jacobian", sol.residual_trace);
    Eigen::VectorXd rhs(dim);
    for (int k = 0; k <= n; ++k) {
      rhs[2 * k] = -res[0][k];
      rhs[2 * k + 1] = -res[1][k];
    }
    const Eigen::VectorXd step = lu.solve(rhs);

    const double merit = norm_l2(res);
    double damping = 1.0;
    bool accepted = false;
    for (int h = 0; h <= 30; ++h, damping *= 0.5) {
      std::array<Eigen::ArrayXd, 2> trial = v;
      for (int k = 0; k <= n; ++k) {
        trial[0][k] += damping * step[2 * k];
        trial[1][k] += damping * step[2 * k + 1];
      }
      auto tr = radial_residual(m, sol.nu, trial, opts.far_field);
      const double tm = norm_l2(tr);
      if (std::isfinite(tm) && tm < merit) {
        v = std::move(trial);
        res = std::move(tr);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Round-off floor: a full step that no longer lowers the residual while
      // the update itself is negligible counts as converged.
      const double vmax = std::max(v[0].abs().maxCoeff(), v[1].abs().maxCoeff());
      if (step.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + vmax) && rn <= 100 * opts.tol) break;
      throw SolverFailure("Newton failed: line search stalled", sol.residual_trace);
    }
  }

  for (int c = 0; c < 2; ++c) {
    sol.v[c] = v[c];
    sol.u[c].resize(n + 1);
    for (int k = 0; k <= n; ++k)
      sol.u[c][k] = (k == 0 && sol.nu[c] > 0) ? -std::numeric_limits<double>::infinity()
                                               : log_radius(sol.nu[c], m.r[k]) + v[c][k];
    if (std::abs(sol.u[c][n]) > 1e-4)
      throw Error("R too small: far-field value " + format_double(sol.u[c][n]) + " exceeds 1e-4");
  }
  return sol;
}

DecayFit decay_fit_profiles(const Eigen::ArrayXd& r, const std::vector<Eigen::ArrayXd>& profiles, double r_min,
                            double r_max) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < r.size(); ++k)
    if (r[k] >= r_min && r[k] <= r_max) idx.push_back(k);
  if (idx.size() < 20) throw Error("tail underresolved: " + std::to_string(idx.size()) + " mesh points in fit range");
  DecayFit avg;
  int used = 0;
  for (const auto& u : profiles) {
    bool nonzero = true;
    for (auto k : idx) nonzero = nonzero && u[k] != 0.0 && std::isfinite(u[k]);
    if (!nonzero) continue;
    Eigen::MatrixXd a(idx.size(), 3);
    Eigen::VectorXd b(idx.size());
    for (std::size_t q = 0; q < idx.size(); ++q) {
      const double rr = r[idx[q]];
      a.row(Eigen::Index(q)) << 1.0, -rr, -std::log(rr);
      b[Eigen::Index(q)] = std::log(std::abs(u[idx[q]]));
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
    avg.rate += coef[1];
    avg.power += coef[2];
    ++used;
  }
  if (used == 0) throw Error("no decaying component to fit");
  avg.rate /= used;
  avg.power /= used;
  return avg;
}

DecayFit decay_fit(const RadialSolution& sol, double r_min) {
  return decay_fit_profiles(sol.mesh.r, {sol.u[0], sol.u[1]}, r_min, 0.9 * sol.radius());
}

RadialIntegrals radial_integrals(const RadialSolution& sol) {
  const RadialMesh& m = sol.mesh;
  const Exponentials x = exponentials(m, sol.nu, sol.v);
  auto trapezoid = [&](const Eigen::ArrayXd& g) {
    double s = 0.0;
    for (Eigen::Index k = 0; k + 1 < m.r.size(); ++k)
      s += 0.5 * (m.r[k + 1] - m.r[k]) * (m.r[k] * g[k] + m.r[k + 1] * g[k + 1]);
    return 2.0 * kPi * s;
  };
  RadialIntegrals out;
  out.i12 = trapezoid(x.one_minus_e[0] * x.one_minus_e[1]);
  out.i1 = trapezoid(x.one_minus_e[0]);
  out.i2 = trapezoid(x.one_minus_e[1]);

  // Beyond R, u ~ u(R) sqrt(R/r) e^{R-r}: 2pi int_R^inf r(-u) dr =
  // 2pi |u(R)| sqrt(R) e^R Gamma(3/2, R); the product term decays twice as fast.
  const double big = sol.radius();
  const Eigen::Index end = m.r.size() - 1;
  const double u1 = sol.u[0][end], u2 = sol.u[1][end];
  const double single = 2.0 * kPi * std::sqrt(big) * std::exp(big) * boost::math::tgamma(1.5, big);
  const double t1 = single * std::abs(u1), t2 = single * std::abs(u2);
  const double t12 = 2.0 * kPi * u1 * u2 * big / 2.0;
  out.i1 += t1;
  out.i2 += t2;
  out.i12 += t12;
  auto rel = [](double tail, double total) { return total != 0.0 ? std::abs(tail / total) : 0.0; };
  out.tail = std::max({rel(t1, out.i1), rel(t2, out.i2), rel(t12, out.i12)});
  out.tail_warning = out.tail > 1e-5;
  return out;
}

double pohozaev_defect(const RadialSolution& sol, double radius) {
  const RadialMesh& m = sol.mesh;
  const Eigen::Index n = m.r.size() - 1;
  Eigen::Index k = 1;
  for (Eigen::Index q = 1; q < n; ++q)
    if (std::abs(m.r[q] - radius) < std::abs(m.r[k] - radius)) k = q;
  if (k < 1 || k >= n) throw Error("radius outside the mesh interior");
  const Exponentials x = exponentials(m, sol.nu, sol.v);
  const double a = m.r[k - 1], b = m.r[k], c = m.r[k + 1];
  auto derivative = [&](const Eigen::ArrayXd& f) {
    // Three-point derivative on a non-uniform stencil.
    const double h1 = b - a, h2 = c - b;
    return (-h2 / (h1 * (h1 + h2))) * f[k - 1] + ((h2 - h1) / (h1 * h2)) * f[k] + (h1 / (h2 * (h1 + h2))) * f[k + 1];
  };
  const double du1 = derivative(sol.v[0]) + 2.0 * sol.nu[0] / b;
  const double du2 = derivative(sol.v[1]) + 2.0 * sol.nu[1] / b;
  double partial = 0.0;
  const Eigen::ArrayXd g = x.one_minus_e[0] * x.one_minus_e[1];
  for (Eigen::Index q = 0; q < k; ++q)
    partial += 0.5 * (m.r[q + 1] - m.r[q]) * (m.r[q] * g[q] + m.r[q + 1] * g[q + 1]);
  const double i12 = 2.0 * kPi * partial;
  const double boundary = 2.0 * kPi * b * b * (du1 * du2 - g[k]);
  return boundary - (-2.0 * i12 + 8.0 * kPi * sol.nu[0] * sol.nu[1]);
}

RadialInterpolant::RadialInterpolant(const RadialSolution& sol) : nu_(sol.nu), radius_(sol.radius()) {
  for (int c = 0; c < 2; ++c) {
    std::vector<double> r(sol.mesh.r.data(), sol.mesh.r.data() + sol.mesh.r.size());
    std::vector<double> v(sol.v[c].data(), sol.v[c].data() + sol.v[c].size());
    v_[c] = std::make_shared<const Spline>(std::move(r), std::move(v));
  }
}

double RadialInterpolant::regular(int component, double r) const {
  if (r < 0 || r > radius_) throw Error("radius outside the radial mesh");
  return (*v_[component])(r);
}

double RadialInterpolant::full(int component, double r) const {
  if (r == 0 && nu_[component] > 0) return -std::numeric_limits<double>::infinity();
  return log_radius(nu_[component], r) + regular(component, r);
}

void write_profile_csv(std::ostream& out, const RadialSolution& sol) {
  out << "r,u1,u2,v1,v2\n";
  for (Eigen::Index k = 0; k < sol.mesh.r.size(); ++k)
    out << format_double(sol.mesh.r[k]) << ',' << format_double(sol.u[0][k]) << ',' << format_double(sol.u[1][k])
        << ',' << format_double(sol.v[0][k]) << ',' << format_double(sol.v[1][k]) << '\n';
}

void write_profile_csv(const std::filesystem::path& path, const RadialSolution& sol) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_profile_csv(out, sol);
}

}  // namespace vortexlab
