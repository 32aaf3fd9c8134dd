#include "vortexlab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "vortexlab/analysis.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/field_io.hpp"
#include "vortexlab/linearization.hpp"
#include "vortexlab/radial.hpp"
#include "vortexlab/torus_solver.hpp"

namespace vortexlab {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, Command> kCommands = {
    {"solve-torus", Command::solve_torus}, {"solve-radial", Command::solve_radial}, {"verify", Command::verify},
    {"sweep", Command::sweep},             {"modes", Command::modes},               {"uniqueness", Command::uniqueness},
};

void validate(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw Error("invalid configuration: " + m); };
  if (!(c.length > 0)) fail("L must be positive");
  if (c.n < 16 || c.n % 2 != 0) fail("n must be even and at least 16");
  if (!(c.delta >= 0) || !(c.delta < c.length / 2)) fail("delta must satisfy 0 <= delta < L/2");
  if (c.eps && !(*c.eps > 0)) fail("eps must be positive");
  for (std::size_t k = 0; k < c.ladder.size(); ++k) {
    if (!(c.ladder[k] > 0)) fail("ladder values must be positive");
    if (k > 0 && !(c.ladder[k] < c.ladder[k - 1])) fail("ladder must be strictly decreasing");
  }
  if (c.nu1 < 0 || c.nu2 < 0) fail("nu1 and nu2 must be non-negative");
  if (!(c.radius >= 20.0)) fail("R must be at least 20");
  if (c.mesh < 200) fail("mesh must be at least 200");
  if (!(c.tol > 0)) fail("tol must be positive");
  if (c.starts < 2) fail("starts must be at least 2");
  if (c.modes < 1) fail("modes must be positive");
  if (c.threads < 0) fail("threads must be non-negative");
  if (c.out.empty()) fail("out must not be empty");
  if (c.command == Command::verify && c.sweep_ladder().size() < 3) fail("verify needs a ladder of at least 3 values");
}

TorusSetup torus_setup(const RunConfig& c) {
  const TorusGrid g = build_grid(c.length, c.length, c.n, c.n, c.delta);
  VortexSet v;
  if (c.vortices.empty()) {
    const Point centre{c.length / 2, c.length / 2};
    std::vector<Vortex> list;
    if (c.nu1 > 0) list.push_back({centre, 1, c.nu1});
    if (c.nu2 > 0) list.push_back({centre, 2, c.nu2});
    v = VortexSet(list);
  } else {
    v = read_vortex_file(c.vortices);
  }
  return make_setup(g, v);
}

RadialOptions radial_options(const RunConfig& c) {
  RadialOptions o;
  o.tol = c.tol;
  if (c.dirichlet) o.far_field = FarField::dirichlet;
  return o;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

std::string solver_report(const SolverReport& r) {
  std::ostringstream s;
  s << "iterations " << r.iterations << '\n'
    << "residual " << format_double(r.residual) << '\n'
    << "classification " << to_string(r.classification) << '\n'
    << "sup_outside " << format_double(r.sup_outside) << '\n'
    << "flux1 " << format_double(r.flux[0]) << '\n'
    << "flux2 " << format_double(r.flux[1]) << '\n'
    << "energy " << format_double(r.energy) << '\n'
    << "mean1 " << format_double(r.means[0]) << '\n'
    << "mean2 " << format_double(r.means[1]) << '\n';
  return s.str();
}

void write_monotonicity_csv(const fs::path& path, const SolverReport& r) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << "sweep,residual,shift,max_increase,allowed_increase,energy\n";
  for (const auto& e : r.monotonicity_log)
    f << e.sweep << ',' << format_double(e.residual) << ',' << format_double(e.shift) << ','
      << format_double(e.max_increase) << ',' << format_double(e.allowed_increase) << ',' << format_double(e.energy)
      << '\n';
}

std::string eps_tag(double eps) { return "eps" + format_double(eps); }

// Largest chart radius around p that stays inside the fundamental cell and
// away from the other vortex points.
double chart_radius(const TorusSetup& s, Point p) {
  double r = std::min(s.grid.l1(), s.grid.l2()) / 2;
  for (Point q : s.vortices.distinct_points(s.grid)) {
    const double d = s.grid.distance(p, q);
    if (d > 0) r = std::min(r, d / 2);
  }
  return r;
}

int finish(const std::vector<CheckResult>& checks, const fs::path& out, std::ostream& log) {
  write_report_csv(out / "report.csv", checks);
  std::ostringstream summary;
  write_summary(summary, checks);
  write_text(out / "summary.txt", summary.str());
  log << summary.str();
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; }) ? 0 : 1;
}

int run_verify(const RunConfig& c, const fs::path& out, std::ostream& log) {
  const TorusSetup s = torus_setup(c);
  const auto ladder = c.sweep_ladder();
  SweepOptions so;
  so.ball_radius = c.delta;
  so.solver.tol = c.tol;
  so.threads = c.threads;
  log << "sweep over " << ladder.size() << " values of eps\n";
  const SweepRecord sweep = epsilon_sweep(s, ladder, so);
  {
    std::ofstream f(out / "sweep.csv");
    write_sweep_csv(f, sweep);
  }
  for (const auto& e : sweep.entries)
    if (!e.converged) log << "eps " << e.eps << " failed: " << e.failure << '\n';
  const auto done = sweep.converged();
  if (done.empty()) throw SolverFailure("no ladder entry converged", sweep.entries.back().report.residual);

  std::vector<CheckResult> checks;
  checks.push_back(check_flux(s, done.back()->solution));
  checks.push_back(check_concentration(sweep, s));
  checks.push_back(check_smallness(sweep, s));

  const double eps_min = done.back()->eps;
  std::map<std::array<int, 2>, RadialSolution> radial;
  for (Point p : sweep.points) {
    const std::array<int, 2> nu{s.vortices.multiplicity_at(1, p, s.grid), s.vortices.multiplicity_at(2, p, s.grid)};
    const double r0 = chart_radius(s, p);
    auto it = radial.find(nu);
    if (it == radial.end()) {
      const double R = std::max(c.radius, std::ceil(r0 / eps_min));
      log << "radial solve nu (" << nu[0] << "," << nu[1] << ") R " << R << " mesh " << c.mesh << '\n';
      it = radial.emplace(nu, solve_radial(nu[0], nu[1], R, c.mesh)).first;
    }
    checks.push_back(check_rescaling(sweep, s, it->second, p, r0));
    checks.push_back(check_gradient_bound(sweep, s, p, r0));
    checks.push_back(check_ball_against_radial(sweep, s, radial_integrals(it->second), p));
  }
  for (const auto& [nu, sol] : radial) {
    checks.push_back(check_radial_integrals(sol));
    checks.push_back(check_decay(sol));
    if (nu[0] == nu[1]) checks.push_back(check_symmetric_profiles(sol));
    checks.push_back(check_nondegeneracy(nu[0], nu[1], c.radius, c.mesh));
  }
  checks.push_back(check_zero_base({16, 32, 64}));

  log << "uniqueness experiment at eps " << eps_min << " with " << c.starts << " starts\n";
  UniquenessOptions uo;
  uo.starts = c.starts;
  uo.seed = c.seed;
  uo.newton.tol = c.tol;
  uo.monotone.tol = c.tol;
  uo.threads = c.threads;
  const UniquenessResult u = uniqueness_experiment(s, eps_min, uo);
  {
    std::ofstream f(out / "starts.csv");
    write_starts_csv(f, u);
  }
  if (u.counterexample) write_field_pair(out / "counterexample.field", *u.counterexample, s.grid.l1(), s.grid.l2());
  checks.push_back(u.check);
  return finish(checks, out, log);
}

int run_command(const RunConfig& c, const fs::path& out, std::ostream& log) {
  switch (c.command) {
    case Command::solve_torus: {
      const TorusSetup s = torus_setup(c);
      MonotoneOptions o;
      o.tol = c.tol;
      const SolveResult r = monotone_solve(s, c.single_eps(), o);
      write_field_pair(out / "solution.field", r.solution, s.grid.l1(), s.grid.l2());
      write_field_pair(out / "solution_full.field", to_full(s, r.solution), s.grid.l1(), s.grid.l2());
      write_text(out / "report.txt", solver_report(r.report));
      write_monotonicity_csv(out / "monotonicity.csv", r.report);
      log << solver_report(r.report);
      return 0;
    }
    case Command::solve_radial: {
      const RadialSolution sol = solve_radial(c.nu1, c.nu2, c.radius, c.mesh, radial_options(c));
      write_profile_csv(out / "profile.csv", sol);
      const RadialIntegrals j = radial_integrals(sol);
      std::ostringstream s;
      s << "iterations " << sol.iterations << '\n'
        << "residual " << format_double(sol.residual) << '\n'
        << "i12 " << format_double(j.i12) << '\n'
        << "i1 " << format_double(j.i1) << '\n'
        << "i2 " << format_double(j.i2) << '\n'
        << "tail " << format_double(j.tail) << (j.tail_warning ? " warning" : "") << '\n';
      if (c.nu1 + c.nu2 > 0) {
        const DecayFit f = decay_fit(sol, 8.0);
        s << "decay_rate " << format_double(f.rate) << '\n' << "decay_power " << format_double(f.power) << '\n';
      }
      write_text(out / "radial_report.txt", s.str());
      log << s.str();
      return 0;
    }
    case Command::sweep: {
      const TorusSetup s = torus_setup(c);
      SweepOptions so;
      so.ball_radius = c.delta;
      so.solver.tol = c.tol;
      so.threads = c.threads;
      const SweepRecord sweep = epsilon_sweep(s, c.sweep_ladder(), so);
      std::ofstream f(out / "sweep.csv");
      write_sweep_csv(f, sweep);
      for (const auto& e : sweep.entries) {
        if (e.converged)
          write_field_pair(out / ("solution_" + eps_tag(e.eps) + ".field"), e.solution, s.grid.l1(), s.grid.l2());
        log << "eps " << e.eps << ": " << (e.converged ? to_string(e.report.classification) : e.failure) << '\n';
      }
      const bool all = std::all_of(sweep.entries.begin(), sweep.entries.end(), [](auto& e) { return e.converged; });
      return all ? 0 : 2;
    }
    case Command::modes: {
      std::ofstream f(out / "modes.csv");
      if (!f) throw Error("cannot write modes.csv");
      const RadialSolution base = solve_radial(c.nu1, c.nu2, c.radius, c.mesh, radial_options(c));
      ModeOptions mo;
      mo.seed = c.seed;
      bool header = true;
      auto emit = [&](const LinearizedOperator& op) {
        const Modes m = smallest_modes(op, c.modes, mo);
        std::ostringstream s;
        write_modes_csv(s, m, op.mesh_size(), op.descriptor());
        std::string text = s.str();
        if (!header) text = text.substr(text.find('\n') + 1);
        header = false;
        f << text;
        log << op.descriptor() << ": sigma_min " << m.sigma[0] << '\n';
      };
      for (int mode = 0; mode <= 2; ++mode) emit(LinearizedOperator::radial(base, mode));
      if (c.eps) {
        const TorusSetup s = torus_setup(c);
        MonotoneOptions o;
        o.tol = c.tol;
        emit(LinearizedOperator::torus(s, monotone_solve(s, *c.eps, o).solution));
      }
      return 0;
    }
    case Command::uniqueness: {
      const TorusSetup s = torus_setup(c);
      UniquenessOptions uo;
      uo.starts = c.starts;
      uo.seed = c.seed;
      uo.newton.tol = c.tol;
      uo.monotone.tol = c.tol;
      uo.threads = c.threads;
      const UniquenessResult u = uniqueness_experiment(s, c.single_eps(), uo);
      std::ofstream f(out / "starts.csv");
      write_starts_csv(f, u);
      if (u.counterexample)
        write_field_pair(out / "counterexample.field", *u.counterexample, s.grid.l1(), s.grid.l2());
      return finish({u.check}, out, log);
    }
    case Command::verify:
      return run_verify(c, out, log);
  }
  return 2;
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [name, value] : kCommands)
    if (value == c) return name;
  return "unknown";
}

std::vector<double> RunConfig::sweep_ladder() const {
  if (!ladder.empty()) return ladder;
  return {0.2, 0.1, 0.05};
}

RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig c;
  std::string command;
  CLI::App app{"Numerical laboratory for the skew-symmetric Chern-Simons vortex system", "vortexlab"};
  app.add_option("command", command, "solve-torus | solve-radial | verify | sweep | modes | uniqueness")
      ->required()
      ->check(CLI::IsMember([] {
        std::vector<std::string> names;
        for (const auto& kv : kCommands) names.push_back(kv.first);
        return names;
      }()));
  app.add_option("--eps", c.eps, "coupling parameter for single solves");
  app.add_option("--ladder", c.ladder, "strictly decreasing eps values, comma separated")->delimiter(',');
  app.add_option("--nu1", c.nu1, "radial multiplicity of component 1");
  app.add_option("--nu2", c.nu2, "radial multiplicity of component 2");
  app.add_option("--n", c.n, "torus grid size per side");
  app.add_option("--L", c.length, "torus side length");
  app.add_option("--R", c.radius, "radial truncation radius");
  app.add_option("--mesh", c.mesh, "radial mesh intervals");
  app.add_option("--tol", c.tol, "solver residual tolerance");
  app.add_option("--delta", c.delta, "excision radius");
  app.add_option("--starts", c.starts, "Newton starts in the uniqueness experiment");
  app.add_option("--seed", c.seed, "random seed");
  app.add_option("--modes", c.modes, "singular values per operator");
  app.add_option("--threads", c.threads, "worker threads (0: all cores)");
  app.add_flag("--dirichlet", c.dirichlet, "radial far field u(R) = 0 instead of the Robin closure");
  app.add_option("--vortices", c.vortices, "vortex file: component x y multiplicity per line");
  app.add_option("--out", c.out, "output directory");
  app.set_config("--config", "", "file of key = value lines using the flag names");
  app.allow_config_extras(CLI::config_extras_mode::error);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw Error(std::string("invalid arguments: ") + e.what());
  }
  c.command = kCommands.at(command);
  if (c.eps && !c.ladder.empty()) throw Error("conflicting options: give either eps or ladder, not both");
  validate(c);
  return c;
}

std::string describe(const RunConfig& c) {
  std::ostringstream s;
  s << "command = " << to_string(c.command) << '\n';
  s << "L = " << format_double(c.length) << '\n';
  s << "n = " << c.n << '\n';
  s << "delta = " << format_double(c.delta) << '\n';
  if (!c.vortices.empty()) s << "vortices = \"" << fs::absolute(c.vortices).string() << "\"\n";
  if (c.eps) s << "eps = " << format_double(*c.eps) << '\n';
  if (!c.ladder.empty()) {
    s << "ladder = ";
    for (std::size_t k = 0; k < c.ladder.size(); ++k) s << (k ? "," : "") << format_double(c.ladder[k]);
    s << '\n';
  }
  s << "nu1 = " << c.nu1 << '\n' << "nu2 = " << c.nu2 << '\n';
  s << "R = " << format_double(c.radius) << '\n' << "mesh = " << c.mesh << '\n';
  s << "tol = " << format_double(c.tol) << '\n';
  s << "starts = " << c.starts << '\n' << "seed = " << c.seed << '\n';
  s << "dirichlet = " << (c.dirichlet ? "true" : "false") << '\n';
  s << "modes = " << c.modes << '\n' << "threads = " << c.threads << '\n';
  s << "out = \"" << c.out << "\"\n";
  return s.str();
}

VortexSet read_vortex_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read vortex file " + path.string());
  std::vector<Vortex> list;
  std::string line;
  for (int number = 1; std::getline(f, line); ++number) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream in(line);
    std::vector<std::string> tokens;
    for (std::string t; in >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    auto bad = [&](const std::string& why) {
      return Error("malformed vortex file line " + std::to_string(number) + " (" + why + "): " + line);
    };
    if (tokens.size() != 4) throw bad("expected component x y multiplicity");
    Vortex v;
    std::size_t used_c = 0, used_m = 0;
    try {
      v.component = std::stoi(tokens[0], &used_c);
      v.p.x = parse_double(tokens[1]);
      v.p.y = parse_double(tokens[2]);
      v.multiplicity = std::stoi(tokens[3], &used_m);
    } catch (const std::exception&) {
      throw bad("not a number");
    }
    if (used_c != tokens[0].size() || used_m != tokens[3].size()) throw bad("component and multiplicity are integers");
    if (v.component != 1 && v.component != 2) throw bad("component must be 1 or 2");
    if (v.multiplicity < 1) throw bad("multiplicity must be at least 1");
    if (!std::isfinite(v.p.x) || !std::isfinite(v.p.y)) throw bad("coordinates must be finite");
    list.push_back(v);
  }
  return VortexSet(list);
}

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  const fs::path out = config.out;
  try {
    fs::create_directories(out);
    write_text(out / "config.txt", describe(config));
    return run_command(config, out, log);
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 2;
}

}  // namespace vortexlab
