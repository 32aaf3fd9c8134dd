#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vortexlab/error.hpp"
#include "vortexlab/geometry.hpp"

namespace vortexlab {

enum class Command { solve_torus, solve_radial, verify, sweep, modes, uniqueness };
std::string to_string(Command c);

struct RunConfig {
  Command command = Command::solve_torus;
  double length = 6.283185307179586;  // side of the square torus
  int n = 256;
  double delta = 0.25;
  std::string vortices;  // empty: one shared vortex (nu1, nu2) at the centre
  std::optional<double> eps;
  std::vector<double> ladder;
  int nu1 = 1;
  int nu2 = 1;
  double radius = 25.0;  // radial truncation R
  int mesh = 2000;
  bool dirichlet = false;  // radial far field
  double tol = 1e-8;
  int starts = 10;
  std::uint64_t seed = 1;
  int modes = 3;
  int threads = 0;
  std::string out = "out";

  double single_eps() const { return eps.value_or(0.1); }
  std::vector<double> sweep_ladder() const;
};

// Raised for --help; what() holds the usage text.
class HelpRequested : public Error {
 public:
  using Error::Error;
};

// Parses command-line arguments (without the program name). A --config file
// holds `key = value` lines with the flag names as keys; flags override it.
// Throws Error on unknown flags or keys, invalid values, or both --eps and
// --ladder ("conflicting").
RunConfig parse_config(const std::vector<std::string>& args);

// The resolved configuration in config-file form; parsing it back yields the
// same RunConfig.
std::string describe(const RunConfig& config);

// Whitespace-separated `component x y multiplicity` lines; `#` starts a
// comment.
VortexSet read_vortex_file(const std::filesystem::path& path);

// Runs the command, writing every artifact under config.out. Returns 0 on
// success, 1 when a verification check fails and 2 on solver failures or
// unreadable inputs. Progress goes to `log`, errors to `err`.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace vortexlab
