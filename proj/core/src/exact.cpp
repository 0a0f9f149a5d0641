#include "ltm/exact.hpp"

#include <algorithm>
#include <limits>

namespace ltm {
namespace {

/// Self moment E[y_v y_v^T] of any node.
Matrix self_moment(const GroundTruthModel& model, int v) {
  const LatentTree& tree = model.tree;
  if (tree.is_hidden(v)) {
    return Matrix(tree.prior(v)->asDiagonal());
  }
  const int parent = tree.neighbors(v).front();  // observed nodes are leaves
  const Matrix a = tree.directed_transition(v, parent);
  const Vector& pi = *tree.prior(parent);
  if (model.family == ObservationFamily::categorical) {
    Vector marg = a * pi;
    return Matrix(marg.asDiagonal());
  }
  Matrix m = a * pi.asDiagonal() * a.transpose();
  m.diagonal().array() += model.noise_sigma * model.noise_sigma;
  return m;
}

/// First hidden node on the path from a to b (inclusive of endpoints).
int hidden_on_path(const LatentTree& tree, const std::vector<int>& path) {
  for (int v : path)
    if (tree.is_hidden(v)) return v;
  return -1;
}

}  // namespace

Vector exact_mean(const GroundTruthModel& model, int v) {
  return observed_mean(model, v);
}

Matrix exact_pair_moment(const GroundTruthModel& model, int a, int b) {
  const LatentTree& tree = model.tree;
  if (a == b) return self_moment(model, a);
  auto p = tree.path(a, b);
  int m = hidden_on_path(tree, p);
  if (m < 0)
    throw invalid_argument_error("pair moment: no hidden node joins the pair");
  // E[y_a y_b^T] = L_a diag(pi_m) L_b^T with L_* = E[y_* | y_m]
  Matrix la = tree.path_mean_map(a, m);
  Matrix lb = tree.path_mean_map(b, m);
  return la * tree.prior(m)->asDiagonal() * lb.transpose();
}

Tensor3 exact_triple_moment(const GroundTruthModel& model, int a, int b, int c) {
  const LatentTree& tree = model.tree;
  if (a == b || b == c || a == c)
    throw invalid_argument_error("triple moment: nodes must be distinct");
  int m = tree.meeting_node(a, b, c);
  if (!tree.is_hidden(m))
    throw invalid_argument_error("triple moment: joining node is not hidden");
  Matrix la = tree.path_mean_map(a, m);
  Matrix lb = tree.path_mean_map(b, m);
  Matrix lc = tree.path_mean_map(c, m);
  const Vector& pi = *tree.prior(m);
  Tensor3 t(static_cast<int>(la.rows()), static_cast<int>(lb.rows()),
            static_cast<int>(lc.rows()));
  for (int r = 0; r < tree.hidden_dim(); ++r)
    t.add_outer(la.col(r), lb.col(r), lc.col(r), pi(r));
  return t;
}

DistanceMatrix exact_distances(const GroundTruthModel& model,
                               const InfoDistanceOptions& opt) {
  const LatentTree& tree = model.tree;
  const int n = tree.node_count();
  const int k = tree.hidden_dim();
  DistanceMatrix d(n);
  std::vector<Matrix> self(n);
  for (int v = 0; v < n; ++v) self[v] = self_moment(model, v);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      Matrix m_ab = exact_pair_moment(model, a, b);
      double dist = info_distance(m_ab, self[a], self[b], k, opt);
      if (std::isfinite(dist) && dist < 0.0 && dist > -1e-9) dist = 0.0;
      d.set(a, b, dist);
    }
  }
  return d;
}

std::vector<int> surrogate_map(const GroundTruthModel& model,
                               const DistanceMatrix& exact) {
  const LatentTree& tree = model.tree;
  const int p = tree.observed_count();
  std::vector<int> sg(tree.hidden_count(), -1);
  for (int h = p; h < tree.node_count(); ++h) {
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (int v = 0; v < p; ++v) {
      if (exact(h, v) < best) {
        best = exact(h, v);
        arg = v;
      }
    }
    sg[h - p] = arg;
  }
  return sg;
}

std::vector<std::pair<int, int>> surrogate_contraction(
    const GroundTruthModel& model, const DistanceMatrix& exact) {
  const LatentTree& tree = model.tree;
  const int p = tree.observed_count();
  auto sg = surrogate_map(model, exact);
  auto to_obs = [&](int v) { return tree.is_hidden(v) ? sg[v - p] : v; };
  std::vector<std::pair<int, int>> edges;
  for (auto [a, b] : tree.edges()) {
    int u = to_obs(a), v = to_obs(b);
    if (u == v) continue;
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace ltm
