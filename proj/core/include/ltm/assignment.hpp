#pragma once

#include <vector>

#include "ltm/common.hpp"

namespace ltm {

struct Assignment {
  std::vector<int> perm;  // perm[i] = column of `score` assigned to row i
  double score = 0.0;
  double margin = 0.0;  // best minus runner-up total score
};

/// Maximum-total-score assignment on a square score matrix. Exhaustive for
/// n <= 8 (ties broken by lexicographically smallest permutation), greedy
/// beyond that.
Assignment best_assignment(const Matrix& score);

/// Permutation matrix P with P(perm[i], i) = 1: applying M * P reorders
/// columns so column i of the result is column perm[i] of M.
Matrix permutation_matrix(const std::vector<int>& perm);

std::vector<int> invert_permutation(const std::vector<int>& perm);

}  // namespace ltm
