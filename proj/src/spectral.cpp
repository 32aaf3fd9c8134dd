#include "vortexlab/spectral.hpp"

#include <fftw3.h>

#include <mutex>

namespace vortexlab {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

SpectralPlan::SpectralPlan(int n1, int n2) : n1_(n1), n2_(n2) {
  std::vector<double> real(std::size_t(n1) * n2);
  std::vector<Complex> spec(spectrum_size());
  auto* c = reinterpret_cast<fftw_complex*>(spec.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard<std::mutex> lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_r2c_2d(n1, n2, real.data(), c, flags);
  inverse_plan_ = fftw_plan_dft_c2r_2d(n1, n2, c, real.data(), flags);
}

SpectralPlan::~SpectralPlan() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void SpectralPlan::forward(const double* in, Complex* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void SpectralPlan::inverse(Complex* in, double* out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(in),
                       out);
}

}  // namespace vortexlab
