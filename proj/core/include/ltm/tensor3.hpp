#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "ltm/common.hpp"

namespace ltm {

/// Dense third-order tensor with mode products, the only tensor shape the
/// pipeline needs (d_a x d_b x d_c third moments and k x k x k whitened forms).
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int d0, int d1, int d2)
      : dims_{d0, d1, d2}, data_(static_cast<std::size_t>(d0) * d1 * d2, 0.0) {}

  int dim(int mode) const { return dims_[mode]; }

  double& operator()(int i, int j, int l) {
    return data_[(static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + l];
  }
  double operator()(int i, int j, int l) const {
    return data_[(static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + l];
  }

  void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

  /// this += w * (u ⊗ v ⊗ t)
  void add_outer(const Vector& u, const Vector& v, const Vector& t, double w = 1.0);

  /// Mode-n product with M (rows_out x dims_[mode]).
  Tensor3 mode_multiply(int mode, const Matrix& m) const;

  /// Contraction T(u, v, ·) -> vector of length dims_[2], etc.
  Vector contract12(const Vector& u, const Vector& v) const;
  /// T(I, v, v): the power-iteration map for symmetric tensors.
  Vector apply_sym(const Vector& v) const;
  /// T(u, u, u)
  double cubic_form(const Vector& u) const;

  double frobenius_norm() const {
    double s = 0.0;
    for (double x : data_) s += x * x;
    return std::sqrt(s);
  }

  double max_abs() const {
    double s = 0.0;
    for (double x : data_) s = std::max(s, std::abs(x));
    return s;
  }

  Tensor3& operator-=(const Tensor3& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }

  /// Average over the six index permutations (requires cubic shape).
  Tensor3 symmetrized() const;

  const std::vector<double>& raw() const { return data_; }

 private:
  std::array<int, 3> dims_{0, 0, 0};
  std::vector<double> data_;
};

}  // namespace ltm
