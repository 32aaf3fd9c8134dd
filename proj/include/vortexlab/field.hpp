#pragma once

#include <Eigen/Core>
#include <cassert>
#include <utility>

namespace vortexlab {

// Real samples on an n1 x n2 periodic lattice. Storage is row-major: row i is
// the x index, column j the y index.
class Field {
 public:
  Field() = default;
  Field(int n1, int n2, double value = 0.0)
      : n1_(n1), n2_(n2), v_(Eigen::ArrayXd::Constant(Eigen::Index(n1) * n2, value)) {}
  Field(int n1, int n2, Eigen::ArrayXd values) : n1_(n1), n2_(n2), v_(std::move(values)) {
    assert(v_.size() == Eigen::Index(n1) * n2);
  }

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  Eigen::Index size() const { return v_.size(); }
  bool same_shape(const Field& o) const { return n1_ == o.n1_ && n2_ == o.n2_; }

  double& operator()(int i, int j) { return v_[Eigen::Index(i) * n2_ + j]; }
  double operator()(int i, int j) const { return v_[Eigen::Index(i) * n2_ + j]; }
  double& operator[](Eigen::Index k) { return v_[k]; }
  double operator[](Eigen::Index k) const { return v_[k]; }

  Eigen::ArrayXd& values() { return v_; }
  const Eigen::ArrayXd& values() const { return v_; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  double mean() const { return v_.mean(); }
  double max_abs() const { return v_.size() ? v_.abs().maxCoeff() : 0.0; }

  Field& operator+=(const Field& o) { v_ += o.v_; return *this; }
  Field& operator-=(const Field& o) { v_ -= o.v_; return *this; }
  Field& operator*=(double s) { v_ *= s; return *this; }
  Field& operator+=(double s) { v_ += s; return *this; }

 private:
  int n1_ = 0;
  int n2_ = 0;
  Eigen::ArrayXd v_;
};

inline Field operator+(Field a, const Field& b) { return a += b; }
inline Field operator-(Field a, const Field& b) { return a -= b; }
inline Field operator*(double s, Field a) { return a *= s; }

inline double max_distance(const Field& a, const Field& b) {
  return (a.values() - b.values()).abs().maxCoeff();
}

}  // namespace vortexlab
