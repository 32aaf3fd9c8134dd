#include "vortexlab/linearization.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "vortexlab/error.hpp"
#include "vortexlab/krylov.hpp"

namespace vortexlab {

struct LinearizedOperator::TorusData {
  TorusGrid grid;
  double eps;
  Eigen::ArrayXd diag;                  // -P1 P2 / eps^2
  std::array<Eigen::ArrayXd, 2> cross;  // row c, column 1-c: P_o Q_c / eps^2
  double shift;                         // preconditioner (shift - Delta_h)^{-1}
};

struct LinearizedOperator::RadialData {
  Eigen::SparseMatrix<double> matrix;  // W^{1/2} L W^{-1/2}
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;  // transpose() is non-const
};

namespace {

std::string format_number(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

}  // namespace

LinearizedOperator LinearizedOperator::torus(const TorusSetup& setup, const FieldPair& base, double tol) {
  const Residual res = residual(setup, base.eps, base);
  if (!(res.norm <= tol)) throw Error("base not converged (residual " + format_number(res.norm) + ")");
  const ExpFields k = exp_fields(setup, base);
  const double ie2 = 1.0 / (base.eps * base.eps);
  auto data = std::make_shared<TorusData>(TorusData{setup.grid, base.eps, -ie2 * k.P[0] * k.P[1],
                                                    {ie2 * k.P[1] * k.Q[0], ie2 * k.P[0] * k.Q[1]}, 0.0});
  data->shift = std::clamp((k.P[0] * k.P[1]).maxCoeff(), 1e-3, 1.0) * ie2;

  LinearizedOperator op;
  op.kind_ = Kind::torus;
  op.mesh_size_ = setup.grid.n1();
  const TorusGrid& g = setup.grid;
  op.descriptor_ = "torus " + format_number(g.l1()) + "x" + format_number(g.l2()) + " grid " +
                   std::to_string(g.n1()) + "x" + std::to_string(g.n2()) + " eps " + format_number(base.eps) +
                   " vortices " + std::to_string(setup.vortices.vortices().size());
  op.weights_ = Eigen::VectorXd::Constant(2 * Eigen::Index(g.n1()) * g.n2(), g.cell_area());
  op.torus_ = std::move(data);
  return op;
}

LinearizedOperator LinearizedOperator::radial(const RadialSolution& base, int angular_mode, double tol) {
  if (angular_mode < 0) throw Error("angular mode must be non-negative");
  if (!(base.residual <= tol)) throw Error("base not converged (residual " + format_number(base.residual) + ")");
  const RadialMesh& m = base.mesh;
  const int n = m.intervals();
  const int first = angular_mode == 0 ? 0 : 1;
  const Eigen::Index count = n + 1 - first;
  const double mm = double(angular_mode) * angular_mode;

  std::array<Eigen::ArrayXd, 2> e;
  for (int c = 0; c < 2; ++c) e[c] = base.u[c].exp();  // u(0) = -inf gives 0

  Eigen::VectorXd w(2 * count);
  for (int c = 0; c < 2; ++c) w.segment(c * count, count) = m.volume.segment(first, count).matrix();
  const Eigen::ArrayXd sw = w.array().sqrt();

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(std::size_t(count) * 8);
  auto add = [&](Eigen::Index row, Eigen::Index col, double value) {
    t.emplace_back(row, col, sw[row] * value / sw[col]);
  };
  for (int c = 0; c < 2; ++c) {
    const int o = 1 - c;
    for (int k = first; k <= n; ++k) {
      const Eigen::Index row = c * count + (k - first);
      double diag = 0.0;
      if (k < n) {
        diag -= m.face[k];
        add(row, row + 1, m.face[k] / m.volume[k]);
      } else {
        diag -= m.radius() * (1.0 + 0.5 / m.radius());
      }
      if (k > 0) {
        diag -= m.face[k - 1];
        if (k - 1 >= first) add(row, row - 1, m.face[k - 1] / m.volume[k]);
      }
      diag /= m.volume[k];
      if (k > 0) diag -= mm / (m.r[k] * m.r[k]);
      add(row, row, diag - e[0][k] * e[1][k]);
      add(row, o * count + (k - first), e[o][k] * (1.0 - e[c][k]));
    }
  }
  auto data = std::make_shared<RadialData>();
  data->matrix.resize(2 * count, 2 * count);
  data->matrix.setFromTriplets(t.begin(), t.end());
  data->lu.compute(data->matrix);
  if (data->lu.info() != Eigen::Success) throw Error("radial linearization is singular");

  LinearizedOperator op;
  op.kind_ = Kind::radial;
  op.mesh_size_ = n;
  op.descriptor_ = "radial nu (" + std::to_string(base.nu[0]) + "," + std::to_string(base.nu[1]) + ") R " +
                   format_number(m.radius()) + " mode " + std::to_string(angular_mode);
  op.weights_ = std::move(w);
  op.radial_ = std::move(data);
  return op;
}

Eigen::VectorXd LinearizedOperator::torus_apply(const Eigen::VectorXd& x, bool transpose) const {
  const TorusData& d = *torus_;
  const Eigen::Index n = x.size() / 2;
  Eigen::VectorXd out(x.size());
  std::array<Field, 2> f{d.grid.zeros(), d.grid.zeros()};
  for (int c = 0; c < 2; ++c) f[c].values() = x.segment(c * n, n).array();
  for (int c = 0; c < 2; ++c) {
    const int o = 1 - c;
    // The transpose moves the coupling coefficient to the other row.
    const Eigen::ArrayXd& cross = transpose ? d.cross[o] : d.cross[c];
    Field r = laplacian(d.grid, f[c]);
    r.values() += d.diag * f[c].values() + cross * f[o].values();
    out.segment(c * n, n) = r.values().matrix();
  }
  return out;
}

Eigen::VectorXd LinearizedOperator::torus_solve(const Eigen::VectorXd& b, bool transpose) const {
  const TorusData& d = *torus_;
  const Eigen::Index n = b.size() / 2;
  auto apply = [&](const Eigen::VectorXd& x) { return torus_apply(x, transpose); };
  auto precond = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd out(x.size());
    Field f = d.grid.zeros();
    for (int c = 0; c < 2; ++c) {
      f.values() = x.segment(c * n, n).array();
      out.segment(c * n, n) = -resolvent(d.grid, f, d.shift).values().matrix();
    }
    return out;
  };
  GmresOptions opts;
  opts.tol = 1e-13;
  opts.max_iter = 3000;
  const GmresResult r = gmres(apply, precond, b, Eigen::VectorXd::Zero(b.size()), opts);
  // Round-off can stop the relative residual slightly above 1e-13.
  if (!r.converged && r.relative_residual > 1e-10)
    throw SolverFailure("linearized solve did not converge", r.relative_residual, r.iterations);
  return r.x;
}

Eigen::VectorXd LinearizedOperator::apply(const Eigen::VectorXd& x) const {
  if (kind_ == Kind::radial) return radial_->matrix * x;
  return torus_apply(x, false);
}

Eigen::VectorXd LinearizedOperator::apply_transpose(const Eigen::VectorXd& x) const {
  if (kind_ == Kind::radial) return radial_->matrix.transpose() * x;
  return torus_apply(x, true);
}

Eigen::VectorXd LinearizedOperator::solve(const Eigen::VectorXd& b) const {
  if (kind_ == Kind::radial) return radial_->lu.solve(b);
  return torus_solve(b, false);
}

Eigen::VectorXd LinearizedOperator::solve_transpose(const Eigen::VectorXd& b) const {
  if (kind_ == Kind::radial) return radial_->lu.transpose().solve(b);
  return torus_solve(b, true);
}

std::array<Eigen::ArrayXd, 2> LinearizedOperator::unweight(const Eigen::VectorXd& x) const {
  const Eigen::Index n = size() / 2;
  const Eigen::ArrayXd s = weights_.array().sqrt();
  return {x.head(n).array() / s.head(n), x.tail(n).array() / s.tail(n)};
}

Eigen::VectorXd LinearizedOperator::weight(const std::array<Eigen::ArrayXd, 2>& ab) const {
  const Eigen::Index n = size() / 2;
  if (ab[0].size() != n || ab[1].size() != n) throw Error("perturbation size does not match the operator");
  Eigen::VectorXd x(2 * n);
  x << ab[0].matrix(), ab[1].matrix();
  return (x.array() * weights_.array().sqrt()).matrix();
}

Modes smallest_modes(const LinearizedOperator& op, int count, const ModeOptions& opts) {
  const Eigen::Index dim = op.size();
  if (count < 1) throw Error("mode count must be positive");
  const int p = int(std::min<Eigen::Index>(count + opts.extra_vectors, dim));
  if (p < count) throw Error("mode count exceeds the dimension");

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd X(dim, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) X(i, j) = normal(rng);

  Modes out;
  std::vector<double> previous;
  for (int it = 1; it <= opts.max_iter; ++it) {
    Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(X).householderQ() * Eigen::MatrixXd::Identity(dim, p);
    // Rayleigh-Ritz for L^T L on span(Q).
    Eigen::MatrixXd Z(dim, p);
    for (int j = 0; j < p; ++j) Z.col(j) = op.apply(Q.col(j));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Z.transpose() * Z);
    Q = Q * eig.eigenvectors();
    std::vector<double> sigma(count);
    for (int j = 0; j < count; ++j) sigma[j] = std::sqrt(std::max(eig.eigenvalues()[j], 0.0));

    bool done = !previous.empty();
    for (int j = 0; j < count && done; ++j)
      done = std::abs(sigma[j] - previous[j]) <= opts.tol * std::max(sigma[j], 1e-300);
    previous = sigma;
    if (done) {
      out.sigma = sigma;
      out.iterations = it;
      for (int j = 0; j < count; ++j) {
        auto ab = op.unweight(Q.col(j));
        // Sign convention: the entry of largest magnitude is positive.
        Eigen::Index at;
        Q.col(j).cwiseAbs().maxCoeff(&at);
        if (Q(at, j) < 0) {
          ab[0] = -ab[0];
          ab[1] = -ab[1];
        }
        out.vectors.push_back(std::move(ab));
      }
      return out;
    }
    for (int j = 0; j < p; ++j) X.col(j) = op.solve(op.solve_transpose(Q.col(j)));
  }
  throw Error("iteration stagnated after " + std::to_string(opts.max_iter) + " sweeps");
}

void write_modes_csv(std::ostream& out, const Modes& modes, int mesh_size, const std::string& base) {
  out << "mode,sigma,mesh_size,base\n";
  out.precision(17);
  for (std::size_t j = 0; j < modes.sigma.size(); ++j)
    out << j << ',' << modes.sigma[j] << ',' << mesh_size << ",\"" << base << "\"\n";
}

void write_modes_csv(const std::filesystem::path& path, const Modes& modes, int mesh_size,
                     const std::string& base) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  write_modes_csv(f, modes, mesh_size, base);
}

namespace {

// (e^a - e^b)/(a - b), accurate when a and b are close.
double exp_quotient(double a, double b) {
  const double d = a - b;
  if (d == 0.0) return std::exp(b);
  return std::exp(b) * std::expm1(d) / d;
}

}  // namespace

LinearizedPair difference_pair(const TorusSetup& setup, const FieldPair& u, const FieldPair& v) {
  if (u.form != Form::regular || v.form != Form::regular) throw Error("field pair must be in regular form");
  if (u.eps != v.eps) throw Error("pairs have different eps");
  const TorusGrid& g = setup.grid;
  for (const FieldPair* p : {&u, &v})
    for (const auto& f : p->u)
      if (f.n1() != g.n1() || f.n2() != g.n2()) throw Error("field pair does not match the grid");

  std::array<Eigen::ArrayXd, 2> d{u.u[0].values() - v.u[0].values(), u.u[1].values() - v.u[1].values()};
  const std::array<double, 2> norms{d[0].abs().maxCoeff(), d[1].abs().maxCoeff()};
  if (std::max(norms[0], norms[1]) < 1e-13) throw Error("identical solutions");

  LinearizedPair out;
  out.swapped = norms[1] > norms[0];
  const int a = out.swapped ? 1 : 0;
  const int b = 1 - a;
  out.norm = norms[a];
  out.values = {d[a] / out.norm, d[b] / out.norm};

  const Eigen::Index size = d[0].size();
  const auto& w = setup.background.weight;
  for (auto& q : out.quotients) q.resize(size);
  for (Eigen::Index m = 0; m < size; ++m) {
    const double ua[2] = {u.u[a].values()[m], u.u[b].values()[m]};
    const double va[2] = {v.u[a].values()[m], v.u[b].values()[m]};
    const double wa = w[a].values()[m], wb = w[b].values()[m];
    // e^{U} = w e^{u}; the background factor is common to both pairs.
    out.quotients[0][m] = wa * exp_quotient(ua[0], va[0]);
    out.quotients[1][m] = wb * exp_quotient(ua[1], va[1]);
    out.quotients[2][m] = wa * wb * exp_quotient(ua[0] + ua[1], va[0] + va[1]);
  }

  out.xs.resize(g.n1());
  out.ys.resize(g.n2());
  for (int i = 0; i < g.n1(); ++i) out.xs[i] = i * g.h1();
  for (int j = 0; j < g.n2(); ++j) out.ys[j] = j * g.h2();
  Eigen::Index at;
  out.values[0].abs().maxCoeff(&at);
  out.peak = Point{out.xs[at / g.n2()], out.ys[at % g.n2()]};
  return out;
}

LinearizedPair rescaled_pair(const TorusGrid& grid, const LinearizedPair& pair, Point center, double eps,
                             double radius, double spacing, double chart_radius) {
  if (!(eps > 0) || !(radius > 0) || !(spacing > 0)) throw Error("eps, radius and spacing must be positive");
  if (eps * radius > chart_radius) throw Error("radius exceeds chart");
  if (pair.values[0].size() != Eigen::Index(grid.n1()) * grid.n2())
    throw Error("pair is not sampled on the torus grid");
  const int half = int(std::floor(radius / spacing + 1e-12));
  const Eigen::ArrayXd y = Eigen::ArrayXd::LinSpaced(2 * half + 1, -half * spacing, half * spacing);
  LinearizedPair out;
  out.xs = y;
  out.ys = y;
  out.norm = pair.norm;
  out.swapped = pair.swapped;
  const Eigen::ArrayXd px = center.x + eps * y;
  const Eigen::ArrayXd py = center.y + eps * y;
  auto sample = [&](const Eigen::ArrayXd& v) {
    Field f = grid.zeros();
    f.values() = v;
    const Eigen::ArrayXXd t = interpolate_tensor(grid, f, px, py);
    Eigen::ArrayXd flat(t.size());
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      for (Eigen::Index j = 0; j < t.cols(); ++j) flat[i * t.cols() + j] = t(i, j);
    return flat;
  };
  out.values = {sample(pair.values[0]), sample(pair.values[1])};
  for (int q = 0; q < 3; ++q) out.quotients[q] = sample(pair.quotients[q]);
  Eigen::Index at;
  out.values[0].abs().maxCoeff(&at);
  out.peak = Point{y[at / y.size()], y[at % y.size()]};
  return out;
}

}  // namespace vortexlab
