#include "ltm/assignment.hpp"

#include <algorithm>
#include <numeric>

namespace ltm {

Assignment best_assignment(const Matrix& score) {
  const int n = static_cast<int>(score.rows());
  if (score.cols() != n) throw invalid_argument_error("assignment: square matrix required");
  Assignment out;
  if (n == 0) return out;

  if (n <= 8) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_score = -std::numeric_limits<double>::infinity();
    double second = best_score;
    do {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += score(i, perm[i]);
      if (s > best_score) {
        second = best_score;
        best_score = s;
        best = perm;
      } else if (s > second) {
        second = s;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.perm = best;
    out.score = best_score;
    out.margin = std::isfinite(second) ? best_score - second : best_score;
    return out;
  }

  // greedy fallback for large k
  std::vector<char> used(n, 0);
  out.perm.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    int arg = -1;
    for (int j = 0; j < n; ++j)
      if (!used[j] && (arg < 0 || score(i, j) > score(i, arg))) arg = j;
    out.perm[i] = arg;
    used[arg] = 1;
    out.score += score(i, arg);
  }
  out.margin = 0.0;
  return out;
}

Matrix permutation_matrix(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  Matrix p = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) p(perm[i], i) = 1.0;
  return p;
}

std::vector<int> invert_permutation(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);
  return inv;
}

}  // namespace ltm
