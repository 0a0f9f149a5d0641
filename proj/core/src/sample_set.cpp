#include "ltm/sample_set.hpp"

namespace ltm {

SampleSet SampleSet::dense(const std::vector<int>& dims, long n) {
  SampleSet s;
  s.dims_ = dims;
  s.n_ = n;
  s.sparse_mode_ = false;
  s.dense_.reserve(dims.size());
  for (int d : dims) s.dense_.emplace_back(Matrix::Zero(d, n));
  return s;
}

SampleSet SampleSet::sparse(const std::vector<int>& dims, long n) {
  SampleSet s;
  s.dims_ = dims;
  s.n_ = n;
  s.sparse_mode_ = true;
  s.sparse_.reserve(dims.size());
  for (int d : dims) s.sparse_.emplace_back(d, n);
  return s;
}

Matrix SampleSet::to_dense(int v) const {
  if (!sparse_mode_) return dense_[v];
  return Matrix(sparse_[v]);
}

std::vector<std::string> SampleSet::validate() const {
  std::vector<std::string> issues;
  for (int v = 0; v < variable_count(); ++v) {
    long cols = sparse_mode_ ? sparse_[v].cols() : dense_[v].cols();
    long rows = sparse_mode_ ? sparse_[v].rows() : dense_[v].rows();
    if (cols != n_)
      issues.push_back("variable " + std::to_string(v) +
                       " has inconsistent sample count");
    if (rows != dims_[v])
      issues.push_back("variable " + std::to_string(v) + " has wrong dimension");
    if (n_ == 0) continue;
    // all-zero rows break the sparse-sketch SVD path
    Matrix d = to_dense(v);
    for (int r = 0; r < d.rows(); ++r) {
      if (d.row(r).cwiseAbs().maxCoeff() == 0.0) {
        issues.push_back("variable " + std::to_string(v) + " coordinate " +
                         std::to_string(r) + " is all zero");
        break;
      }
    }
  }
  return issues;
}

}  // namespace ltm
