#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ltm/common.hpp"

namespace ltm {

enum class NodeKind { observed, hidden };

/// Nodes are addressed by a dense integer id: observed variables occupy
/// 0..p-1 and keep those ids through the whole pipeline; hidden nodes are
/// appended after them and never collide.
struct NodeId {
  int index = -1;
  NodeKind kind = NodeKind::observed;
  friend bool operator==(const NodeId&, const NodeId&) = default;
};

/// Undirected tree over observed + hidden nodes with optional parameters:
/// per-edge conditional-mean matrices E[y_child | y_parent] stored against a
/// directed (child, parent) key, and per-hidden-node priors of length k.
class LatentTree {
 public:
  LatentTree() = default;
  LatentTree(std::vector<int> observed_dims, int hidden_dim);

  int add_hidden();

  void add_edge(int a, int b);
  void remove_edge(int a, int b);
  bool has_edge(int a, int b) const;

  int node_count() const { return static_cast<int>(adj_.size()); }
  int observed_count() const { return observed_count_; }
  int hidden_count() const { return node_count() - observed_count_; }
  int hidden_dim() const { return hidden_dim_; }

  bool is_hidden(int v) const { return v >= observed_count_; }
  NodeId node(int v) const {
    return {v, is_hidden(v) ? NodeKind::hidden : NodeKind::observed};
  }
  int dim(int v) const { return is_hidden(v) ? hidden_dim_ : observed_dims_[v]; }
  const std::vector<int>& observed_dims() const { return observed_dims_; }

  const std::vector<int>& neighbors(int v) const { return adj_[v]; }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  std::vector<std::pair<int, int>> edges() const;  // (min,max), sorted
  int edge_count() const { return edge_count_; }

  // -- parameters ----------------------------------------------------------
  void set_transition(int child, int parent, Matrix m);
  const Matrix* transition(int child, int parent) const;
  void set_prior(int hidden, Vector pi);
  const Vector* prior(int hidden) const;
  bool fully_parameterized() const;

  /// E[y_child | y_parent] for an edge, deriving the reverse direction by
  /// Bayes inversion when only (parent, child) is stored. Both endpoints of a
  /// derived reversal must have priors available (hidden-hidden edges) or the
  /// stored direction must already match.
  Matrix directed_transition(int child, int parent) const;

  /// Marginal prior of any node: stored prior for hidden nodes, or the
  /// propagated categorical marginal for observed nodes is not defined here.
  // (observed marginals live with the observation family, see model.hpp)

  // -- structure queries ---------------------------------------------------
  bool is_connected_tree() const;
  std::vector<int> path(int a, int b) const;  // inclusive of endpoints
  /// Meeting (Steiner) node of three distinct nodes.
  int meeting_node(int a, int b, int c) const;
  /// Conditional-mean map E[y_target | y_source] as a product of per-edge
  /// transitions along the tree path. source must be hidden, or equal target.
  Matrix path_mean_map(int target, int source) const;

  /// Re-orients all stored transitions so that every edge is keyed
  /// (child, parent) away from `root`, deriving reversed matrices by Bayes
  /// inversion where needed; priors recomputed by propagation from root.
  void reroot(int root);

  /// Invariant violations (empty when the tree is valid): spanning/acyclic,
  /// hidden degree >= 3, full-column-rank transitions, positive normalized
  /// priors. Structural checks run always; parameter checks only when params
  /// are present.
  std::vector<std::string> validate(double tol = 1e-12) const;

 private:
  void check_node(int v) const;

  std::vector<int> observed_dims_;
  int observed_count_ = 0;
  int hidden_dim_ = 0;
  int edge_count_ = 0;
  std::vector<std::vector<int>> adj_;
  std::map<std::pair<int, int>, Matrix> transitions_;  // (child, parent)
  std::map<int, Vector> priors_;
};

/// Bayes reversal of a hidden-hidden conditional mean:
/// given T = E[y_b | y_a], prior_a, prior_b, returns E[y_a | y_b].
Matrix reverse_transition(const Matrix& t_b_given_a, const Vector& prior_a,
                          const Vector& prior_b);

}  // namespace ltm
