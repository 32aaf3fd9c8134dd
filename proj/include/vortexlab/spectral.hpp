#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace vortexlab {

using Complex = std::complex<double>;

// Real-to-complex 2-D transform pair for an n1 x n2 row-major array. The
// half spectrum has n1 x (n2/2 + 1) entries. Plans are created once and
// executed through FFTW's new-array interface, so one instance can be shared
// by concurrent solves.
class SpectralPlan {
 public:
  SpectralPlan(int n1, int n2);
  ~SpectralPlan();
  SpectralPlan(const SpectralPlan&) = delete;
  SpectralPlan& operator=(const SpectralPlan&) = delete;

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int n2_half() const { return n2_ / 2 + 1; }
  std::size_t spectrum_size() const { return std::size_t(n1_) * n2_half(); }

  // Unnormalized forward transform.
  void forward(const double* in, Complex* out) const;
  // Unnormalized inverse; `in` is overwritten.
  void inverse(Complex* in, double* out) const;

 private:
  int n1_, n2_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace vortexlab
