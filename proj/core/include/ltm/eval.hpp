#pragma once

#include <set>
#include <vector>

#include "ltm/tree.hpp"

namespace ltm {

/// Canonical leaf bipartitions of the non-trivial edges: each is the sorted
/// side containing leaf 0. Trivial splits (a side with fewer than two leaves)
/// are dropped; duplicates collapse.
std::set<std::vector<int>> leaf_bipartitions(const LatentTree& t);

/// Normalized Robinson-Foulds distance in [0,1]:
/// |symmetric difference| / (|B1| + |B2|), 0 when both sets are empty.
/// Requires identical observed-leaf sets.
double robinson_foulds(const LatentTree& a, const LatentTree& b);

struct ParameterError {
  double max_column_l2 = 0.0;  // worst column error over all edges
  double prior_linf = 0.0;     // worst prior entry error
  std::vector<int> global_perm;
};

/// Parameter distance between two identically structured trees, up to the
/// best single global hidden-label permutation (assignment over column
/// correlations summed across observed-child edges). Call only after
/// robinson_foulds == 0; throws on structure mismatch.
ParameterError parameter_error(const LatentTree& est, const LatentTree& truth);

}  // namespace ltm
