#pragma once

#include <cstdint>

#include "ltm/common.hpp"

namespace ltm {

/// Truncated factorization M ~= U diag(sigma) V^T with orthonormal U, V and
/// non-increasing singular values. Sign convention: the first entry of each
/// U column with magnitude > 1e-12 is positive.
struct RankKFactors {
  Matrix u;      // rows(M) x k
  Vector sigma;  // k, descending
  Matrix v;      // cols(M) x k

  Matrix reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }
};

/// Exact best rank-k factors (Jacobi SVD; deterministic).
RankKFactors svd_rank_k(const Matrix& m, int k);

struct RandomizedSvdOptions {
  double oversample = 3.0;  // sketch width alpha*k, alpha in [2,3]
  int max_redraws = 10;     // sketch redraws when the sketch loses rank
};

/// Sketch-based rank-k SVD: S = D*Phi with a diagonal Rademacher D and a
/// sparse one-nonzero-per-row Phi of width alpha*k, followed by projection
/// recovery (orthonormalize M*S, factor the small projected matrix).
/// Requires M to have no all-zero row or column. Deterministic per seed.
RankKFactors randomized_svd_rank_k(const Matrix& m, int k, std::uint64_t seed,
                                   const RandomizedSvdOptions& opt = {});

/// Moore-Penrose pseudo-inverse with a relative singular value cutoff.
Matrix pseudo_inverse(const Matrix& m, double rel_tol = 1e-12);

}  // namespace ltm
