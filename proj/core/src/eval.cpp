#include "ltm/eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "ltm/assignment.hpp"

namespace ltm {
namespace {

/// Observed leaves on the `a` side of edge (a,b).
std::vector<int> side_leaves(const LatentTree& t, int a, int b) {
  std::vector<int> out;
  std::vector<char> seen(t.node_count(), 0);
  seen[b] = 1;
  std::vector<int> stack{a};
  seen[a] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (!t.is_hidden(v)) out.push_back(v);
    for (int u : t.neighbors(v))
      if (!seen[u]) {
        seen[u] = 1;
        stack.push_back(u);
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::set<std::vector<int>> leaf_bipartitions(const LatentTree& t) {
  std::set<std::vector<int>> out;
  const int p = t.observed_count();
  for (auto [a, b] : t.edges()) {
    std::vector<int> side = side_leaves(t, a, b);
    const int other = p - static_cast<int>(side.size());
    if (static_cast<int>(side.size()) < 2 || other < 2) continue;
    if (side.empty() || side.front() != 0) {
      // canonical side: the one containing leaf 0
      std::vector<int> flip;
      std::vector<char> in_side(p, 0);
      for (int v : side) in_side[v] = 1;
      for (int v = 0; v < p; ++v)
        if (!in_side[v]) flip.push_back(v);
      side = std::move(flip);
    }
    out.insert(std::move(side));
  }
  return out;
}

double robinson_foulds(const LatentTree& a, const LatentTree& b) {
  if (a.observed_count() != b.observed_count())
    throw invalid_argument_error("robinson_foulds: leaf sets differ");
  auto ba = leaf_bipartitions(a);
  auto bb = leaf_bipartitions(b);
  if (ba.empty() && bb.empty()) return 0.0;
  int common = 0;
  for (const auto& s : ba) common += bb.count(s);
  const int symdiff =
      static_cast<int>(ba.size()) + static_cast<int>(bb.size()) - 2 * common;
  return static_cast<double>(symdiff) /
         static_cast<double>(ba.size() + bb.size());
}

namespace {

/// Signature of a hidden node: the multiset of leaf components around it.
std::vector<std::vector<int>> hidden_signature(const LatentTree& t, int h) {
  std::vector<std::vector<int>> parts;
  for (int nb : t.neighbors(h)) parts.push_back(side_leaves(t, nb, h));
  std::sort(parts.begin(), parts.end());
  return parts;
}

/// est hidden id -> truth hidden id, by matching leaf-component signatures.
std::map<int, int> match_hidden_nodes(const LatentTree& est,
                                      const LatentTree& truth) {
  std::map<std::vector<std::vector<int>>, int> truth_by_sig;
  for (int h = truth.observed_count(); h < truth.node_count(); ++h)
    truth_by_sig[hidden_signature(truth, h)] = h;
  std::map<int, int> out;
  for (int h = est.observed_count(); h < est.node_count(); ++h) {
    auto sig = hidden_signature(est, h);
    auto it = truth_by_sig.find(sig);
    if (it == truth_by_sig.end())
      throw invalid_argument_error("parameter_error: structures differ");
    out[h] = it->second;
  }
  if (out.size() != static_cast<std::size_t>(truth.hidden_count()))
    throw invalid_argument_error("parameter_error: hidden counts differ");
  return out;
}

}  // namespace

ParameterError parameter_error(const LatentTree& est, const LatentTree& truth) {
  if (est.observed_count() != truth.observed_count() ||
      est.hidden_count() != truth.hidden_count() ||
      est.hidden_dim() != truth.hidden_dim())
    throw invalid_argument_error("parameter_error: shape mismatch");
  const int k = truth.hidden_dim();
  auto node_map = match_hidden_nodes(est, truth);
  for (int v = 0; v < est.observed_count(); ++v) node_map[v] = v;

  // orientation of truth: (child, parent) as stored; fetch est's matrix for
  // the mapped edge in the same direction, deriving by Bayes when flipped.
  auto est_matrix = [&](int child_t, int parent_t) -> Matrix {
    int c = -1, q = -1;
    for (auto& [e, t] : node_map)
      if (t == child_t) c = e;
    for (auto& [e, t] : node_map)
      if (t == parent_t) q = e;
    return est.directed_transition(c, q);
  };

  // global permutation from column correlations over observed-child edges
  Matrix score = Matrix::Zero(k, k);
  std::vector<std::tuple<int, int, Matrix>> truth_edges;  // child,parent,truth A
  for (auto [a, b] : truth.edges()) {
    int child = truth.transition(a, b) ? a : b;
    int par = child == a ? b : a;
    if (!truth.transition(child, par))
      throw invalid_argument_error("parameter_error: truth edge missing params");
    truth_edges.emplace_back(child, par, *truth.transition(child, par));
  }
  for (auto& [child, par, ta] : truth_edges) {
    if (truth.is_hidden(child)) continue;  // score on observed-child edges
    Matrix ea = est_matrix(child, par);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        const double denom = std::max(ta.col(i).norm() * ea.col(j).norm(), 1e-300);
        score(i, j) += ta.col(i).dot(ea.col(j)) / denom;
      }
  }
  Assignment assign = best_assignment(score);
  const std::vector<int>& perm = assign.perm;  // est label for truth label i

  ParameterError out;
  out.global_perm = perm;
  for (auto& [child, par, ta] : truth_edges) {
    Matrix ea = est_matrix(child, par);
    Matrix aligned(ea.rows(), k);
    for (int i = 0; i < k; ++i) aligned.col(i) = ea.col(perm[i]);
    if (truth.is_hidden(child)) {
      Matrix rows(k, k);
      for (int i = 0; i < k; ++i) rows.row(i) = aligned.row(perm[i]);
      aligned = rows;
    }
    for (int i = 0; i < k; ++i)
      out.max_column_l2 =
          std::max(out.max_column_l2, (aligned.col(i) - ta.col(i)).norm());
  }
  for (int h = truth.observed_count(); h < truth.node_count(); ++h) {
    const Vector* tp = truth.prior(h);
    int he = -1;
    for (auto& [e, t] : node_map)
      if (t == h) he = e;
    const Vector* ep = est.prior(he);
    if (!tp || !ep)
      throw invalid_argument_error("parameter_error: missing prior");
    for (int i = 0; i < k; ++i)
      out.prior_linf = std::max(out.prior_linf, std::abs((*ep)(perm[i]) - (*tp)(i)));
  }
  return out;
}

}  // namespace ltm
