#pragma once

#include <limits>
#include <vector>

#include "ltm/common.hpp"
#include "ltm/moments.hpp"

namespace ltm {

inline constexpr double kInfDistance = std::numeric_limits<double>::infinity();

/// Symmetric matrix of pairwise multivariate information distances. Grows by
/// appended rows/columns as hidden nodes are introduced during local
/// recursive grouping. Diagonal is 0; entries may be +inf.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(int n) : n_(n), d_(static_cast<std::size_t>(n) * n, 0.0) {}

  int size() const { return n_; }

  double operator()(int a, int b) const { return d_[idx(a, b)]; }
  void set(int a, int b, double v) {
    d_[idx(a, b)] = v;
    d_[idx(b, a)] = v;
  }

  /// Appends one node with all-zero distances; returns its index.
  int append_node();

  bool finite(int a, int b) const { return std::isfinite((*this)(a, b)); }

  /// Count of +inf entries above the diagonal.
  int infinite_pairs() const;
  /// Count of entries that were clamped up to 0 (set by producers).
  int negative_clamps = 0;

 private:
  std::size_t idx(int a, int b) const {
    return static_cast<std::size_t>(a) * n_ + b;
  }
  int n_ = 0;
  std::vector<double> d_;
};

struct InfoDistanceOptions {
  /// sigma_k(M_ab) at or below this floor makes the pair infinitely far.
  double singularity_floor = 1e-12;
};

/// Multivariate information distance between two variables from their second
/// moments: -log of the top-k singular value product of M_ab over the
/// geometric mean of the self-moment volumes, where a full-rank self moment
/// contributes its determinant and a rank-deficient one the product of its
/// top k singular values. Heterogeneous dimensions are supported.
double info_distance(const Matrix& m_ab, const Matrix& m_aa, const Matrix& m_bb,
                     int k, const InfoDistanceOptions& opt = {});

enum class SvdMode { exact, randomized };

struct AllPairsOptions {
  SvdMode svd_mode = SvdMode::exact;
  double oversample = 3.0;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = library default
  InfoDistanceOptions info;
};

struct AllPairsResult {
  DistanceMatrix d;
  int infinite_pairs = 0;
  int negative_clamps = 0;
};

/// All p(p-1)/2 distances from a moment source, computed independently per
/// unordered pair (parallel over pairs). Output does not depend on the worker
/// count or iteration order. Small negative values from sampling noise are
/// clamped to 0 and counted.
AllPairsResult all_pairs_distances(const MomentSource& moments, int k,
                                   const AllPairsOptions& opt = {});

}  // namespace ltm
