#include <catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vortexlab/cli.hpp"
#include "vortexlab/field_io.hpp"

using namespace vortexlab;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vortexlab_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}
}  // namespace

TEST_CASE("defaults are filled in") {
  const fs::path dir = scratch("defaults");
  write(dir / "v.txt", "1 1.0 2.0 1\n");
  auto c = parse_config({"solve-torus", "--eps", "0.1", "--vortices", (dir / "v.txt").string()});
  CHECK(c.command == Command::solve_torus);
  CHECK(*c.eps == 0.1);
  CHECK(c.n == 256);
  CHECK(c.ladder.empty());
  CHECK(c.sweep_ladder() == std::vector<double>{0.2, 0.1, 0.05});
}

TEST_CASE("flags override the config file") {
  const fs::path dir = scratch("precedence");
  write(dir / "run.cfg", "command = solve-torus\nn = 128\nL = 3.0\nladder = 0.3,0.2,0.1\n");
  auto c = parse_config({"--config", (dir / "run.cfg").string(), "--n", "256"});
  CHECK(c.n == 256);
  CHECK(c.length == 3.0);
  CHECK(c.ladder == std::vector<double>{0.3, 0.2, 0.1});
}

TEST_CASE("parse errors") {
  CHECK_THROWS_WITH(parse_config({"verify", "--ladder", "0.2,0.1,0.05", "--eps", "0.1"}),
                    ContainsSubstring("conflicting"));
  CHECK_THROWS_WITH(parse_config({"verify", "--bogus", "1"}), ContainsSubstring("--bogus"));
  CHECK_THROWS_WITH(parse_config({"simulate"}), ContainsSubstring("simulate"));
  CHECK_THROWS_WITH(parse_config({"sweep", "--ladder", "0.1,0.2"}), ContainsSubstring("strictly decreasing"));
  CHECK_THROWS_WITH(parse_config({"solve-torus", "--n", "31"}), ContainsSubstring("even"));
  CHECK_THROWS_WITH(parse_config({"solve-radial", "--R", "10"}), ContainsSubstring("R must be at least 20"));
  CHECK_THROWS_AS(parse_config({"--help"}), HelpRequested);

  const fs::path dir = scratch("unknown_key");
  write(dir / "run.cfg", "command = verify\ngrid = 64\n");
  CHECK_THROWS_WITH(parse_config({"--config", (dir / "run.cfg").string()}), ContainsSubstring("grid"));
  CHECK_THROWS_AS(parse_config({"--config", (dir / "missing.cfg").string()}), Error);
}

TEST_CASE("vortex files") {
  const fs::path dir = scratch("vortex_files");
  write(dir / "ok.txt", "# shared vortex\n1 0.5 0.5 2\n\n2 0.5 0.5 1  # trailing comment\n");
  auto v = read_vortex_file(dir / "ok.txt");
  REQUIRE(v.vortices().size() == 2);
  CHECK(v.vortices()[0].multiplicity == 2);
  CHECK(v.vortices()[1].component == 2);

  write(dir / "short.txt", "1 0.5 0.5 1\n2 0.5 0.5\n");
  CHECK_THROWS_WITH(read_vortex_file(dir / "short.txt"), ContainsSubstring("malformed vortex file line 2"));
  write(dir / "word.txt", "1 0.5 abc 1\n");
  CHECK_THROWS_WITH(read_vortex_file(dir / "word.txt"), ContainsSubstring("line 1"));
  write(dir / "component.txt", "3 0.5 0.5 1\n");
  CHECK_THROWS_WITH(read_vortex_file(dir / "component.txt"), ContainsSubstring("component must be 1 or 2"));
  CHECK_THROWS_WITH(read_vortex_file(dir / "absent.txt"), ContainsSubstring("cannot read vortex file"));
}

TEST_CASE("unreadable vortex file exits with 2") {
  const fs::path dir = scratch("unreadable");
  auto c = parse_config({"solve-torus", "--vortices", (dir / "absent.txt").string(), "--out", (dir / "out").string()});
  std::ostringstream log, err;
  CHECK(run(c, log, err) == 2);
  CHECK_THAT(err.str(), ContainsSubstring("cannot read vortex file"));
}

TEST_CASE("solve-radial writes a profile with a monotone r column") {
  const fs::path dir = scratch("radial");
  auto c = parse_config({"solve-radial", "--nu1", "1", "--nu2", "1", "--mesh", "1000", "--out", (dir / "a").string()});
  std::ostringstream log, err;
  REQUIRE(run(c, log, err) == 0);
  std::ifstream in(dir / "a" / "profile.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "r,u1,u2,v1,v2");
  double last = -1.0;
  int rows = 0;
  while (std::getline(in, line)) {
    const double r = parse_double(line.substr(0, line.find(',')));
    CHECK(r > last);
    last = r;
    ++rows;
  }
  CHECK(rows == 1001);
  CHECK_THAT(slurp(dir / "a" / "radial_report.txt"), ContainsSubstring("i12 "));
}

TEST_CASE("rerunning the echoed config reproduces outputs exactly") {
  const fs::path dir = scratch("rerun");
  write(dir / "v.txt", "1 1.25 1.25 1\n2 1.25 1.25 1\n");
  auto c = parse_config({"solve-torus", "--L", "2.5", "--n", "32", "--delta", "0.5", "--eps", "0.2", "--vortices",
                         (dir / "v.txt").string(), "--out", (dir / "first").string()});
  std::ostringstream log, err;
  REQUIRE(run(c, log, err) == 0);
  for (const char* f : {"config.txt", "solution.field", "solution_full.field", "report.txt", "monotonicity.csv"})
    CHECK(fs::exists(dir / "first" / f));
  const std::string report = slurp(dir / "first" / "report.txt");
  for (const char* key : {"iterations ", "residual ", "classification topological", "flux1 ", "flux2 ", "energy "})
    CHECK_THAT(report, ContainsSubstring(key));

  auto again = parse_config({"--config", (dir / "first" / "config.txt").string(), "--out", (dir / "second").string()});
  CHECK(describe(again).substr(0, describe(again).find("out =")) == describe(c).substr(0, describe(c).find("out =")));
  REQUIRE(run(again, log, err) == 0);
  for (const char* f : {"solution.field", "report.txt", "monotonicity.csv"})
    CHECK(slurp(dir / "first" / f) == slurp(dir / "second" / f));
}

TEST_CASE("uniqueness command writes its report") {
  const fs::path dir = scratch("uniqueness");
  auto c = parse_config({"uniqueness", "--L", "2.5", "--n", "32", "--delta", "0.5", "--eps", "0.2", "--starts", "3",
                         "--out", dir.string()});
  std::ostringstream log, err;
  CHECK(run(c, log, err) == 0);
  CHECK_THAT(slurp(dir / "report.csv"), ContainsSubstring("uniqueness"));
  CHECK_THAT(slurp(dir / "summary.txt"), ContainsSubstring("1 of 1 checks passed"));
  CHECK(fs::exists(dir / "starts.csv"));
}
