#include "ltm/moments.hpp"

#include <algorithm>

namespace ltm {

// ---- Tensor3 -------------------------------------------------------------

void Tensor3::add_outer(const Vector& u, const Vector& v, const Vector& t,
                        double w) {
  for (int i = 0; i < dims_[0]; ++i) {
    const double wu = w * u(i);
    if (wu == 0.0) continue;
    for (int j = 0; j < dims_[1]; ++j) {
      const double wuv = wu * v(j);
      if (wuv == 0.0) continue;
      for (int l = 0; l < dims_[2]; ++l) (*this)(i, j, l) += wuv * t(l);
    }
  }
}

Tensor3 Tensor3::mode_multiply(int mode, const Matrix& m) const {
  if (m.cols() != dims_[mode])
    throw invalid_argument_error("mode_multiply: shape mismatch");
  const int rows = static_cast<int>(m.rows());
  std::array<int, 3> nd = dims_;
  nd[mode] = rows;
  Tensor3 out(nd[0], nd[1], nd[2]);
  for (int i = 0; i < nd[0]; ++i)
    for (int j = 0; j < nd[1]; ++j)
      for (int l = 0; l < nd[2]; ++l) {
        double acc = 0.0;
        switch (mode) {
          case 0:
            for (int s = 0; s < dims_[0]; ++s) acc += m(i, s) * (*this)(s, j, l);
            break;
          case 1:
            for (int s = 0; s < dims_[1]; ++s) acc += m(j, s) * (*this)(i, s, l);
            break;
          default:
            for (int s = 0; s < dims_[2]; ++s) acc += m(l, s) * (*this)(i, j, s);
            break;
        }
        out(i, j, l) = acc;
      }
  return out;
}

Vector Tensor3::contract12(const Vector& u, const Vector& v) const {
  Vector out = Vector::Zero(dims_[2]);
  for (int i = 0; i < dims_[0]; ++i) {
    if (u(i) == 0.0) continue;
    for (int j = 0; j < dims_[1]; ++j) {
      const double w = u(i) * v(j);
      if (w == 0.0) continue;
      for (int l = 0; l < dims_[2]; ++l) out(l) += w * (*this)(i, j, l);
    }
  }
  return out;
}

Vector Tensor3::apply_sym(const Vector& v) const {
  Vector out = Vector::Zero(dims_[0]);
  for (int i = 0; i < dims_[0]; ++i) {
    double acc = 0.0;
    for (int j = 0; j < dims_[1]; ++j)
      for (int l = 0; l < dims_[2]; ++l) acc += (*this)(i, j, l) * v(j) * v(l);
    out(i) = acc;
  }
  return out;
}

double Tensor3::cubic_form(const Vector& u) const {
  double acc = 0.0;
  for (int i = 0; i < dims_[0]; ++i)
    for (int j = 0; j < dims_[1]; ++j)
      for (int l = 0; l < dims_[2]; ++l) acc += (*this)(i, j, l) * u(i) * u(j) * u(l);
  return acc;
}

Tensor3 Tensor3::symmetrized() const {
  if (dims_[0] != dims_[1] || dims_[1] != dims_[2])
    throw invalid_argument_error("symmetrized: tensor not cubic");
  Tensor3 out(dims_[0], dims_[0], dims_[0]);
  for (int i = 0; i < dims_[0]; ++i)
    for (int j = 0; j < dims_[0]; ++j)
      for (int l = 0; l < dims_[0]; ++l)
        out(i, j, l) = ((*this)(i, j, l) + (*this)(i, l, j) + (*this)(j, i, l) +
                        (*this)(j, l, i) + (*this)(l, i, j) + (*this)(l, j, i)) /
                       6.0;
  return out;
}

// ---- empirical moments ----------------------------------------------------

SecondMoment pairwise_moment(const SampleSet& samples, int a, int b) {
  const long n = samples.sample_count();
  if (n < 1) throw invalid_argument_error("pairwise_moment: no samples");
  SecondMoment out;
  out.a = a;
  out.b = b;
  out.n = n;
  if (samples.is_sparse()) {
    // O(nonzeros) sparse product
    SampleSet::Sparse prod =
        samples.sparse_var(a) * SampleSet::Sparse(samples.sparse_var(b).transpose());
    out.m = Matrix(prod) / static_cast<double>(n);
  } else {
    out.m = samples.dense_var(a) * samples.dense_var(b).transpose() /
            static_cast<double>(n);
  }
  return out;
}

Vector mean_moment(const SampleSet& samples, int a) {
  const long n = samples.sample_count();
  if (n < 1) throw invalid_argument_error("mean_moment: no samples");
  if (samples.is_sparse()) {
    Vector acc = Vector::Zero(samples.dim(a));
    const auto& s = samples.sparse_var(a);
    for (int c = 0; c < s.outerSize(); ++c)
      for (SampleSet::Sparse::InnerIterator it(s, c); it; ++it)
        acc(it.row()) += it.value();
    return acc / static_cast<double>(n);
  }
  return samples.dense_var(a).rowwise().mean();
}

ThirdMoment triplet_moment(const SampleSet& samples, int a, int b, int c) {
  const long n = samples.sample_count();
  if (n < 1) throw invalid_argument_error("triplet_moment: no samples");
  if (a == b || b == c || a == c)
    throw invalid_argument_error("triplet_moment: nodes must be distinct");
  ThirdMoment out;
  out.a = a;
  out.b = b;
  out.c = c;
  out.n = n;
  out.t = Tensor3(samples.dim(a), samples.dim(b), samples.dim(c));
  if (samples.is_sparse()) {
    // accumulate over nonzero coordinate triples per sample
    const auto& sa = samples.sparse_var(a);
    const auto& sb = samples.sparse_var(b);
    const auto& sc = samples.sparse_var(c);
    for (long s = 0; s < n; ++s) {
      for (SampleSet::Sparse::InnerIterator ia(sa, s); ia; ++ia)
        for (SampleSet::Sparse::InnerIterator ib(sb, s); ib; ++ib)
          for (SampleSet::Sparse::InnerIterator ic(sc, s); ic; ++ic)
            out.t(static_cast<int>(ia.row()), static_cast<int>(ib.row()),
                  static_cast<int>(ic.row())) += ia.value() * ib.value() * ic.value();
    }
  } else {
    const Matrix& ya = samples.dense_var(a);
    const Matrix& yb = samples.dense_var(b);
    const Matrix& yc = samples.dense_var(c);
    for (long s = 0; s < n; ++s)
      out.t.add_outer(ya.col(s), yb.col(s), yc.col(s), 1.0);
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (int i = 0; i < out.t.dim(0); ++i)
    for (int j = 0; j < out.t.dim(1); ++j)
      for (int l = 0; l < out.t.dim(2); ++l) out.t(i, j, l) *= inv;
  return out;
}

}  // namespace ltm
