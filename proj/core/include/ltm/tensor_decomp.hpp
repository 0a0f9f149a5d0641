#pragma once

#include <cstdint>

#include "ltm/common.hpp"
#include "ltm/model.hpp"
#include "ltm/tensor3.hpp"

namespace ltm {

/// Everything one triplet decomposition consumes: cross second moments,
/// the third moment, and first moments (k = 1 path).
struct TripletMoments {
  Matrix m_ab, m_ac, m_bc;
  Tensor3 t_abc;
  Vector mean_a, mean_b, mean_c;
};

/// Views transformed so all three share the witness view's conditional-mean
/// factors: t = sum_r pi_r a_r (x) a_r (x) a_r with a_r the witness columns.
struct SymmetrizedTriplet {
  Tensor3 t;      // d_c x d_c x d_c
  Matrix pair;    // A_c diag(pi) A_c^T, the whitening target
  Matrix map_a;   // applied to mode 0
  Matrix map_b;   // applied to mode 1
  double asymmetry = 0.0;  // max-abs asymmetry before averaging
};

/// W^T pair W = I_k on the top-k subspace; b unwhitens (pseudo-inverse
/// transpose of w restricted to that subspace).
struct Whitener {
  Matrix w;  // d x k
  Matrix b;  // d x k
};

struct TensorOptions {
  int restarts = 50;
  int iterations = 100;
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
  double rank_floor = 1e-10;     // relative floor for whitening/pinv
  double eigen_gap_tol = 1e-8;   // low-confidence flag threshold
};

/// Output of one triplet decomposition: conditional-mean matrices with a
/// shared hidden-state order (canonical: descending prior, ties broken by
/// lexicographic comparison of witness columns) plus the hidden prior.
struct TripletParams {
  Matrix a_a, a_b, a_c;
  Vector pi;
  Vector lambda;           // whitened eigenvalues, diagnostic
  double residual = 0.0;   // relative reconstruction error vs input tensor
  bool low_confidence = false;
};

SymmetrizedTriplet symmetrize_views(const TripletMoments& m, int k,
                                    double rank_floor = 1e-10);

Whitener make_whitener(const Matrix& pair, int k, double rank_floor = 1e-10);

TripletParams decompose_triplet(const TripletMoments& m, int k,
                                const TensorOptions& opt = {});

/// Bayes posterior over hidden states given one observation.
Vector posterior_hidden(const Vector& x, const Matrix& a, const Vector& pi,
                        ObservationFamily family, double sigma = 0.0);

}  // namespace ltm
