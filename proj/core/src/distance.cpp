#include "ltm/distance.hpp"

#include <atomic>
#include <cmath>

#include <omp.h>
#include <Eigen/SVD>

#include "ltm/svd.hpp"

namespace ltm {

int DistanceMatrix::append_node() {
  const int m = n_ + 1;
  std::vector<double> grown(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      grown[static_cast<std::size_t>(i) * m + j] = d_[idx(i, j)];
  d_ = std::move(grown);
  n_ = m;
  return n_ - 1;
}

int DistanceMatrix::infinite_pairs() const {
  int count = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (!finite(i, j)) ++count;
  return count;
}

namespace {

/// Sum of logs of the top k singular values; -inf if sigma_k is at or below
/// the floor.
double log_topk_volume_exact(const Matrix& m, int k, double floor) {
  if (k > std::min(m.rows(), m.cols()))
    throw invalid_argument_error("info distance: k exceeds matrix dimensions");
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s(k - 1) <= floor) return -kInfDistance;
  double acc = 0.0;
  for (int i = 0; i < k; ++i) acc += std::log(s(i));
  return acc;
}

/// Same quantity through the sparse-sketch SVD. Zero rows/columns are dropped
/// first (they do not carry singular mass); if fewer than k nonzero rows or
/// columns remain the pair is degenerate.
double log_topk_volume_randomized(const Matrix& m, int k, double floor,
                                  double oversample, std::uint64_t seed) {
  std::vector<int> rows, cols;
  for (int r = 0; r < m.rows(); ++r)
    if (m.row(r).cwiseAbs().maxCoeff() > 0.0) rows.push_back(r);
  for (int c = 0; c < m.cols(); ++c)
    if (m.col(c).cwiseAbs().maxCoeff() > 0.0) cols.push_back(c);
  if (static_cast<int>(rows.size()) < k || static_cast<int>(cols.size()) < k)
    return -kInfDistance;
  Matrix compact(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      compact(i, j) = m(rows[i], cols[j]);
  const int width = static_cast<int>(std::lround(oversample * k));
  RankKFactors f;
  if (width >= static_cast<int>(cols.size())) {
    f = svd_rank_k(compact, k);  // sketch would be as wide as the matrix
  } else {
    f = randomized_svd_rank_k(compact, k, seed, {oversample});
  }
  if (f.sigma(k - 1) <= floor) return -kInfDistance;
  double acc = 0.0;
  for (int i = 0; i < k; ++i) acc += std::log(f.sigma(i));
  return acc;
}

std::uint64_t pair_seed(std::uint64_t seed, int a, int b) {
  std::uint64_t h = seed ^ 0x2545F4914F6CDD1DULL;
  h ^= (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
  h *= 0x9E3779B97F4A7C15ULL;
  h ^= h >> 29;
  return h;
}

}  // namespace

double info_distance(const Matrix& m_ab, const Matrix& m_aa, const Matrix& m_bb,
                     int k, const InfoDistanceOptions& opt) {
  if (!m_ab.allFinite() || !m_aa.allFinite() || !m_bb.allFinite())
    throw invalid_argument_error("info_distance: non-finite moments");
  // The denominator volume is the determinant when a self moment is k x k
  // full rank; the top-k singular value product extends it to larger or
  // rank-deficient self moments (they agree in the square full-rank case).
  const double num = log_topk_volume_exact(m_ab, k, opt.singularity_floor);
  if (num == -kInfDistance) return kInfDistance;
  const double den_a = log_topk_volume_exact(m_aa, k, opt.singularity_floor);
  const double den_b = log_topk_volume_exact(m_bb, k, opt.singularity_floor);
  if (den_a == -kInfDistance || den_b == -kInfDistance) return kInfDistance;
  return -num + 0.5 * (den_a + den_b);
}

AllPairsResult all_pairs_distances(const MomentSource& moments, int k,
                                   const AllPairsOptions& opt) {
  const int p = moments.observed_count();
  if (p < 3) throw invalid_argument_error("all_pairs_distances needs p >= 3");
  const double floor = opt.info.singularity_floor;
  const int threads = opt.threads > 0 ? opt.threads : omp_get_max_threads();

  std::vector<Matrix> self(p);
  std::vector<double> self_vol(p);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int a = 0; a < p; ++a) {
    self[a] = moments.pair(a, a);
    self_vol[a] = log_topk_volume_exact(self[a], k, floor);
  }

  struct PairTask {
    int a, b;
  };
  std::vector<PairTask> tasks;
  tasks.reserve(static_cast<std::size_t>(p) * (p - 1) / 2);
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b) tasks.push_back({a, b});

  AllPairsResult out;
  out.d = DistanceMatrix(p);
  std::atomic<int> inf_count{0};
  std::atomic<int> clamp_count{0};

#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(tasks.size()); ++t) {
    const auto [a, b] = tasks[t];
    const Matrix m_ab = moments.pair(a, b);
    double num;
    if (opt.svd_mode == SvdMode::exact) {
      num = log_topk_volume_exact(m_ab, k, floor);
    } else {
      num = log_topk_volume_randomized(m_ab, k, floor, opt.oversample,
                                       pair_seed(opt.seed, a, b));
    }
    double dist;
    if (num == -kInfDistance || self_vol[a] == -kInfDistance ||
        self_vol[b] == -kInfDistance) {
      dist = kInfDistance;
      ++inf_count;
    } else {
      dist = -num + 0.5 * (self_vol[a] + self_vol[b]);
      if (dist < 0.0) {
        if (dist < -1e-9) ++clamp_count;
        dist = 0.0;
      }
    }
    out.d.set(a, b, dist);
  }

  out.infinite_pairs = inf_count.load();
  out.negative_clamps = clamp_count.load();
  out.d.negative_clamps = out.negative_clamps;
  return out;
}

}  // namespace ltm
