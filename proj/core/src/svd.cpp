#include "ltm/svd.hpp"

#include <algorithm>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace ltm {
namespace {

void apply_sign_convention(Matrix& u, Matrix& v) {
  for (int c = 0; c < u.cols(); ++c) {
    int lead = -1;
    for (int r = 0; r < u.rows(); ++r) {
      if (std::abs(u(r, c)) > 1e-12) {
        lead = r;
        break;
      }
    }
    if (lead >= 0 && u(lead, c) < 0.0) {
      u.col(c) = -u.col(c);
      v.col(c) = -v.col(c);
    }
  }
}

}  // namespace

RankKFactors svd_rank_k(const Matrix& m, int k) {
  const int kmax = static_cast<int>(std::min(m.rows(), m.cols()));
  if (k < 1 || k > kmax)
    throw invalid_argument_error("svd_rank_k: k out of range");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  RankKFactors f;
  f.u = svd.matrixU().leftCols(k);
  f.sigma = svd.singularValues().head(k);
  f.v = svd.matrixV().leftCols(k);
  apply_sign_convention(f.u, f.v);
  return f;
}

RankKFactors randomized_svd_rank_k(const Matrix& m, int k, std::uint64_t seed,
                                   const RandomizedSvdOptions& opt) {
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  if (k < 1 || k > std::min(rows, cols))
    throw invalid_argument_error("randomized_svd_rank_k: k out of range");
  for (int r = 0; r < rows; ++r)
    if (m.row(r).cwiseAbs().maxCoeff() == 0.0)
      throw invalid_argument_error("randomized svd input has an all-zero row");
  for (int c = 0; c < cols; ++c)
    if (m.col(c).cwiseAbs().maxCoeff() == 0.0)
      throw invalid_argument_error("randomized svd input has an all-zero column");

  const int width = std::max(k, static_cast<int>(std::lround(opt.oversample * k)));
  if (width > cols)
    throw invalid_argument_error("sketch width alpha*k exceeds matrix width");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_col(0, width - 1);
  std::bernoulli_distribution coin(0.5);

  for (int redraw = 0; redraw <= opt.max_redraws; ++redraw) {
    // S = D * Phi: one Rademacher-signed nonzero per row, column uniform.
    Matrix sketch = Matrix::Zero(cols, width);
    for (int r = 0; r < cols; ++r) {
      sketch(r, pick_col(rng)) = coin(rng) ? 1.0 : -1.0;
    }
    Matrix y = m * sketch;  // rows x width
    Eigen::ColPivHouseholderQR<Matrix> qr(y);
    if (qr.rank() < k) continue;  // sketch lost rank, redraw
    Matrix q = Matrix(qr.householderQ()).leftCols(std::min<int>(width, rows));
    Matrix b = q.transpose() * m;
    Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    RankKFactors f;
    f.u = q * svd.matrixU().leftCols(k);
    f.sigma = svd.singularValues().head(k);
    f.v = svd.matrixV().leftCols(k);
    apply_sign_convention(f.u, f.v);
    return f;
  }
  throw rank_error("randomized svd: sketch rank deficient after max redraws");
}

Matrix pseudo_inverse(const Matrix& m, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cut = s.size() > 0 ? s(0) * rel_tol : 0.0;
  Vector inv = Vector::Zero(s.size());
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > cut && s(i) > 0.0) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace ltm
