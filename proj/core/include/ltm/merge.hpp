#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "ltm/lrg.hpp"
#include "ltm/moments.hpp"
#include "ltm/mst.hpp"
#include "ltm/tree.hpp"

namespace ltm {

/// hidden node id -> permutation of its state labels (entry r holds the old
/// label that becomes label r).
using PermutationMap = std::map<int, std::vector<int>>;

using Adjacency = std::map<int, std::vector<int>>;

/// Union of the two conflicting leader-to-leader paths: the hidden interior
/// of path(v_i,v_j;adj_i) followed by the hidden interior of
/// path(v_i,v_j;adj_j), endpoints kept. Throws when a leader is missing from
/// the other adjacency.
std::vector<int> union_paths(const Adjacency& adj_i, const Adjacency& adj_j,
                             int v_i, int v_j);

/// Candidate conditional-mean estimate for one directed edge (child given
/// hidden parent), with the residual of the decomposition that produced it.
struct EdgeParamCandidate {
  Matrix a;          // E[y_child | y_parent]
  double residual = 0.0;
  int source_leader = -1;
};

struct GlobalTriplet {
  int hidden = -1;
  std::array<int, 3> nodes{};
  int group_leader = -1;
  TripletParams params;
};

/// Structure union of all local sub-trees along the MST leader edges, with
/// bookkeeping needed by alignment and parameter finalization. Hidden nodes
/// get global ids after the observed block, grouped by ascending leader.
struct MergedModel {
  LatentTree tree;  // structure, priors, and recorded transitions
  int observed = 0;
  std::vector<int> hidden_owner;  // leader per hidden (hidden id - p)
  std::vector<GlobalTriplet> triplets;
  /// Recorded child parameters per hidden, in recording order.
  std::map<int, std::vector<std::pair<int, Matrix>>> hidden_children;
  std::map<std::pair<int, int>, std::vector<EdgeParamCandidate>> edge_candidates;
  std::map<std::pair<int, int>, double> edge_length;
  std::vector<std::string> warnings;
};

/// Deterministic merge plan: BFS over the leader tree from the smallest
/// leader, neighbor leaders ascending. Each leader edge appears once.
struct MergePlan {
  std::vector<std::pair<int, int>> edges;  // (already-merged leader, new leader)
};

MergePlan make_merge_plan(const MstGraph& mst);

/// Pairwise merges of all local sub-trees along the merge plan. Validates
/// tree-ness after every step and the union-path hidden count.
MergedModel merge_all(const std::vector<LocalSubtree>& subtrees,
                      const MstGraph& mst, const MomentSource& moments, int k);

// -- alignment --------------------------------------------------------------

struct ColumnMatch {
  std::vector<int> perm;  // est column that matches each ref column
  double margin = 0.0;
  bool ambiguous = false;
};

/// Maximum-correlation assignment of est's columns onto ref's columns.
ColumnMatch match_columns(const Matrix& ref, const Matrix& est,
                          double tie_tol = 1e-9);

/// Aligns every later triplet record sharing a hidden node with that hidden's
/// defining record, matching their shared view (preferring the reference
/// node's view). Permutations are applied to the subtree parameters in place.
PermutationMap align_in_group(LocalSubtree& subtree, int reference_local);

struct OutGroupAlignment {
  std::vector<int> perm;
  double gap = 0.0;  // max-abs distance of the projected matrix to the perm
  bool low_confidence = false;
};

/// Cross-group label correction from the two cross-group triplet
/// decompositions against the groups' stored parameters: the product of the
/// four view matrices under pseudo-inverses, orthogonalized through the
/// principal square root (polar factor), then projected to the nearest
/// permutation by maximum-weight assignment.
OutGroupAlignment align_out_group(const Matrix& trip_other_x3,
                                  const Matrix& model_other_x3,
                                  const Matrix& trip_ref_x1,
                                  const Matrix& model_ref_x1,
                                  double low_confidence_gap = 0.3);

/// Relabels hidden node h of a parameterized tree by perm (in the
/// PermutationMap convention).
void apply_hidden_permutation(LatentTree& tree, int h,
                              const std::vector<int>& perm);

// -- parameters --------------------------------------------------------------

struct FinalizeOptions {
  double conflict_tolerance = 1e-6;
  int root = -1;  // default: first hidden node
};

/// Fills every edge of the merged structure with E[child|parent] away from
/// the root: recorded triplet estimates where available (lowest residual on
/// conflicts, warning when they disagree beyond tolerance), linear solves
/// from lifted moments for union-created and terminal edges.
LatentTree finalize_parameters(MergedModel& merged, const MomentSource& moments,
                               int k, const FinalizeOptions& opt = {});

}  // namespace ltm
