#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vortexlab {

// Contract violations and invalid inputs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative solver gave up. Carries the last residual so callers can report it.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double last_residual, int iterations = 0)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}
  SolverFailure(const std::string& what, std::vector<double> residual_trace)
      : Error(what),
        last_residual_(residual_trace.empty() ? 0.0 : residual_trace.back()),
        iterations_(int(residual_trace.size())),
        trace_(std::move(residual_trace)) {}
  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }
  // Residual per iteration when the solver records one.
  const std::vector<double>& residual_trace() const { return trace_; }

 private:
  double last_residual_;
  int iterations_;
  std::vector<double> trace_;
};

}  // namespace vortexlab
