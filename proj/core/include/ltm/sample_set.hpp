#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "ltm/common.hpp"

namespace ltm {

/// Per-variable observation matrices (d_i x N), dense or sparse. Immutable
/// once built; shared read-only across workers.
class SampleSet {
 public:
  using Sparse = Eigen::SparseMatrix<double>;

  SampleSet() = default;
  /// Dense storage with given dims, N columns of zeros.
  static SampleSet dense(const std::vector<int>& dims, long n);
  /// Sparse storage built from triplets per variable.
  static SampleSet sparse(const std::vector<int>& dims, long n);

  int variable_count() const { return static_cast<int>(dims_.size()); }
  int dim(int v) const { return dims_[v]; }
  long sample_count() const { return n_; }
  bool is_sparse() const { return sparse_mode_; }

  Matrix& dense_var(int v) { return dense_[v]; }
  const Matrix& dense_var(int v) const { return dense_[v]; }
  Sparse& sparse_var(int v) { return sparse_[v]; }
  const Sparse& sparse_var(int v) const { return sparse_[v]; }

  /// Materializes variable v as a dense matrix regardless of storage.
  Matrix to_dense(int v) const;

  /// Validation at ingestion: consistent N, and (for the randomized SVD
  /// path) reports variables owning an all-zero row. Returns human-readable
  /// issues, empty when clean.
  std::vector<std::string> validate() const;

 private:
  std::vector<int> dims_;
  long n_ = 0;
  bool sparse_mode_ = false;
  std::vector<Matrix> dense_;
  std::vector<Sparse> sparse_;
};

}  // namespace ltm
