#pragma once

#include <string>
#include <vector>

#include "ltm/distance.hpp"

namespace ltm {

/// Spanning tree over observed nodes with edge weights from the distance
/// matrix.
struct MstGraph {
  int p = 0;
  std::vector<std::pair<int, int>> edges;  // (min,max), sorted
  std::vector<std::vector<int>> adj;
  std::vector<double> weight;  // parallel to edges

  double total_weight() const;
  int degree(int v) const { return static_cast<int>(adj[v].size()); }
  bool is_internal(int v) const { return degree(v) >= 2; }
};

struct MstOptions {
  /// Serial Prim by default; Boruvka produces the identical tree (the edge
  /// order (weight, min id, max id) is a strict total order, so the MST is
  /// unique) and exists for the parallel path.
  bool boruvka = false;
  int threads = 0;
};

/// Deterministic MST under the lexicographic (weight, min id, max id)
/// tie-break. Throws disconnected_error when +inf entries separate the graph.
MstGraph build_mst(const DistanceMatrix& d, const MstOptions& opt = {});

/// Closed one-hop MST neighborhood of an internal node; the internal node is
/// the group leader.
struct Group {
  int leader = -1;
  std::vector<int> members;  // leader included, ascending ids
};

/// One group per internal MST node, leaders ascending.
std::vector<Group> extract_groups(const MstGraph& mst);

struct GroupStats {
  int gamma = 0;  // max closed neighborhood size
  std::vector<int> degree_histogram;
};

GroupStats group_stats(const MstGraph& mst);

/// DOT rendering with weights at 6 significant digits.
std::string mst_to_dot(const MstGraph& mst);

}  // namespace ltm
