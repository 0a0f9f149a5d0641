#include "ltm/merge.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ltm/assignment.hpp"
#include "ltm/svd.hpp"

namespace ltm {
namespace {

std::vector<int> adjacency_path(const Adjacency& adj, int from, int to) {
  if (!adj.count(from) || !adj.count(to))
    throw invalid_argument_error("union_paths: leader missing from adjacency");
  std::map<int, int> parent;
  std::deque<int> q{from};
  parent[from] = from;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    if (v == to) break;
    for (int u : adj.at(v))
      if (!parent.count(u)) {
        parent[u] = v;
        q.push_back(u);
      }
  }
  if (!parent.count(to))
    throw invalid_argument_error("union_paths: leaders not connected");
  std::vector<int> path;
  for (int v = to;; v = parent[v]) {
    path.push_back(v);
    if (v == from) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

void adjacency_add_edge(Adjacency& adj, int a, int b) {
  auto& na = adj[a];
  if (std::find(na.begin(), na.end(), b) == na.end()) na.push_back(b);
  auto& nb = adj[b];
  if (std::find(nb.begin(), nb.end(), a) == nb.end()) nb.push_back(a);
}

void adjacency_remove_edge(Adjacency& adj, int a, int b) {
  auto drop = [&](int x, int y) {
    auto it = adj.find(x);
    if (it == adj.end()) return;
    auto& v = it->second;
    v.erase(std::remove(v.begin(), v.end(), y), v.end());
  };
  drop(a, b);
  drop(b, a);
}

bool adjacency_is_tree(const Adjacency& adj) {
  if (adj.empty()) return true;
  std::size_t edges = 0;
  for (const auto& [v, nb] : adj) edges += nb.size();
  edges /= 2;
  if (edges != adj.size() - 1) return false;
  std::map<int, char> seen;
  std::deque<int> q{adj.begin()->first};
  seen[adj.begin()->first] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int u : adj.at(v))
      if (!seen.count(u)) {
        seen[u] = 1;
        q.push_back(u);
      }
  }
  return seen.size() == adj.size();
}

Matrix principal_sqrt_spd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
  Vector vals = eig.eigenvalues().cwiseMax(1e-15);
  return eig.eigenvectors() * vals.cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

}  // namespace

std::vector<int> union_paths(const Adjacency& adj_i, const Adjacency& adj_j,
                             int v_i, int v_j) {
  auto pi = adjacency_path(adj_i, v_i, v_j);
  auto pj = adjacency_path(adj_j, v_i, v_j);
  std::vector<int> merged{v_i};
  merged.insert(merged.end(), pi.begin() + 1, pi.end() - 1);
  merged.insert(merged.end(), pj.begin() + 1, pj.end() - 1);
  merged.push_back(v_j);
  return merged;
}

MergePlan make_merge_plan(const MstGraph& mst) {
  MergePlan plan;
  std::vector<int> leaders;
  for (int v = 0; v < mst.p; ++v)
    if (mst.is_internal(v)) leaders.push_back(v);
  if (leaders.size() <= 1) return plan;
  std::vector<char> merged(mst.p, 0);
  std::deque<int> q{leaders.front()};
  merged[leaders.front()] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int u : mst.adj[v]) {
      if (!mst.is_internal(u) || merged[u]) continue;
      merged[u] = 1;
      plan.edges.emplace_back(v, u);
      q.push_back(u);
    }
  }
  return plan;
}

MergedModel merge_all(const std::vector<LocalSubtree>& subtrees,
                      const MstGraph& mst, const MomentSource& moments, int k) {
  const int p = mst.p;
  MergedModel out;
  out.observed = p;

  // subtree lookup by leader + global hidden id layout
  std::map<int, const LocalSubtree*> by_leader;
  for (const auto& s : subtrees) by_leader[s.leader_global()] = &s;
  std::map<int, int> hidden_base;  // leader -> first global hidden id
  int next_hidden = p;
  for (const auto& [leader, sub] : by_leader) {
    hidden_base[leader] = next_hidden;
    next_hidden += sub->tree.hidden_count();
  }
  const int total_hidden = next_hidden - p;

  auto to_global = [&](const LocalSubtree& s, int local) {
    const int g = static_cast<int>(s.globals.size());
    return local < g ? s.globals[local]
                     : hidden_base.at(s.leader_global()) + (local - g);
  };

  auto globalized_adjacency = [&](const LocalSubtree& s) {
    Adjacency adj;
    for (auto [a, b] : s.tree.edges())
      adjacency_add_edge(adj, to_global(s, a), to_global(s, b));
    return adj;
  };

  // fold the subtrees along the merge plan
  MergePlan plan = make_merge_plan(mst);
  const LocalSubtree* first = by_leader.begin()->second;
  Adjacency global = globalized_adjacency(*first);
  std::map<std::pair<int, int>, double> glen;
  auto import_lengths = [&](const LocalSubtree& s) {
    for (const auto& [e, len] : s.edge_length) {
      int a = to_global(s, e.first), b = to_global(s, e.second);
      glen[{std::min(a, b), std::max(a, b)}] = len;
    }
  };
  import_lengths(*first);

  for (auto [vi, vj] : plan.edges) {
    const LocalSubtree& sj = *by_leader.at(vj);
    Adjacency adj_j = globalized_adjacency(sj);
    import_lengths(sj);

    auto path_i = adjacency_path(global, vi, vj);
    auto path_j = adjacency_path(adj_j, vi, vj);
    auto merged_path = union_paths(global, adj_j, vi, vj);

    const std::size_t s_len = path_i.size() - 2;
    const std::size_t t_len = path_j.size() - 2;

    if (t_len > 0) {
      // break the old attachment of v_j in the global tree
      adjacency_remove_edge(global, path_i[path_i.size() - 2], vj);
      // import the new subtree except its v_i attachment
      for (const auto& [a, nbs] : adj_j)
        for (int b : nbs)
          if (a < b && !(a == std::min(vi, path_j[1]) && b == std::max(vi, path_j[1])))
            adjacency_add_edge(global, a, b);
      // concatenate the two hidden chains
      const int left_end = path_i[path_i.size() - 2];
      const int right_start = path_j[1];
      adjacency_add_edge(global, left_end, right_start);
      // union-edge length from the two leader-relative chains
      double len = 0.0;
      const DistanceMatrix& dj = sj.dist;
      // local ids inside sj for vi and right_start
      int vi_loc = static_cast<int>(
          std::find(sj.globals.begin(), sj.globals.end(), vi) - sj.globals.begin());
      int rs_loc = -1;
      for (int v = 0; v < sj.tree.node_count(); ++v)
        if (to_global(sj, v) == right_start) rs_loc = v;
      double d_vi_rs = dj(vi_loc, rs_loc);
      auto it_left = glen.find({std::min(vi, left_end), std::max(vi, left_end)});
      double d_vi_le = 0.0;
      if (left_end != vi) {
        // accumulated length of the global chain v_i .. left_end
        auto chain = adjacency_path(global, vi, left_end);
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
          auto key = std::make_pair(std::min(chain[i], chain[i + 1]),
                                    std::max(chain[i], chain[i + 1]));
          if (glen.count(key)) d_vi_le += glen[key];
        }
      }
      (void)it_left;
      glen[{std::min(left_end, right_start), std::max(left_end, right_start)}] =
          std::max(d_vi_rs - d_vi_le, 0.0);
    } else {
      for (const auto& [a, nbs] : adj_j)
        for (int b : nbs)
          if (a < b && !(a == std::min(vi, vj) && b == std::max(vi, vj)))
            adjacency_add_edge(global, a, b);
      if (s_len == 0) adjacency_add_edge(global, vi, vj);
    }

    if (!adjacency_is_tree(global)) {
      std::ostringstream os;
      os << "merge of groups " << vi << " and " << vj << " created a cycle";
      throw invalid_argument_error(os.str());
    }
    auto check = adjacency_path(global, vi, vj);
    if (check != merged_path)
      throw invalid_argument_error("merge: union path not realized");
    if (check.size() - 2 != s_len + t_len)
      throw invalid_argument_error("merge: hidden nodes lost or duplicated");
  }

  // assemble the dense global tree
  std::vector<int> dims(p);
  for (int v = 0; v < p; ++v) dims[v] = moments.dim(v);
  out.tree = LatentTree(dims, k);
  out.hidden_owner.assign(total_hidden, -1);
  for (const auto& [leader, sub] : by_leader) {
    for (int j = 0; j < sub->tree.hidden_count(); ++j) {
      int id = out.tree.add_hidden();
      if (id != hidden_base[leader] + j)
        throw invalid_argument_error("merge: hidden id layout mismatch");
      out.hidden_owner[id - p] = leader;
    }
  }
  for (const auto& [a, nbs] : global)
    for (int b : nbs)
      if (a < b) out.tree.add_edge(a, b);
  out.edge_length = std::move(glen);

  // collect parameters, triplets, and view records
  for (const auto& [leader, subp] : by_leader) {
    const LocalSubtree& s = *subp;
    const int g = static_cast<int>(s.globals.size());
    for (int h_loc = g; h_loc < s.tree.node_count(); ++h_loc) {
      const int h = to_global(s, h_loc);
      if (const Vector* pi = s.tree.prior(h_loc)) out.tree.set_prior(h, *pi);
      for (int nb : s.tree.neighbors(h_loc)) {
        if (const Matrix* a = s.tree.transition(nb, h_loc)) {
          const int child = to_global(s, nb);
          out.hidden_children[h].emplace_back(child, *a);
          // residual of the decomposition that produced this hidden
          double res = 0.0;
          for (const auto& rec : s.triplets)
            if (rec.hidden == h_loc) res = rec.params.residual;
          out.edge_candidates[{child, h}].push_back({*a, res, leader});
        }
      }
    }
    for (const auto& rec : s.triplets) {
      GlobalTriplet gt;
      gt.hidden = to_global(s, rec.hidden);
      gt.nodes = {to_global(s, rec.nodes[0]), to_global(s, rec.nodes[1]),
                  to_global(s, rec.nodes[2])};
      gt.group_leader = leader;
      gt.params = rec.params;
      out.triplets.push_back(gt);
    }
  }
  return out;
}

// -- alignment ---------------------------------------------------------------

ColumnMatch match_columns(const Matrix& ref, const Matrix& est, double tie_tol) {
  const int k = static_cast<int>(ref.cols());
  if (est.cols() != k || est.rows() != ref.rows())
    throw invalid_argument_error("match_columns: shape mismatch");
  Matrix score(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double denom =
          std::max(ref.col(i).norm() * est.col(j).norm(), 1e-300);
      score(i, j) = ref.col(i).dot(est.col(j)) / denom;
    }
  Assignment a = best_assignment(score);
  ColumnMatch out;
  out.perm = a.perm;
  out.margin = a.margin;
  out.ambiguous = a.margin <= tie_tol;
  return out;
}

void apply_hidden_permutation(LatentTree& tree, int h,
                              const std::vector<int>& perm) {
  const int k = tree.hidden_dim();
  bool identity = true;
  for (int i = 0; i < k; ++i) identity &= perm[i] == i;
  if (identity) return;
  if (const Vector* pi = tree.prior(h)) {
    Vector np(k);
    for (int i = 0; i < k; ++i) np(i) = (*pi)(perm[i]);
    tree.set_prior(h, np);
  }
  for (int nb : tree.neighbors(h)) {
    if (const Matrix* t = tree.transition(nb, h)) {
      Matrix nt(t->rows(), k);
      for (int i = 0; i < k; ++i) nt.col(i) = t->col(perm[i]);
      tree.set_transition(nb, h, nt);
    }
    if (const Matrix* t = tree.transition(h, nb)) {
      Matrix nt(k, t->cols());
      for (int i = 0; i < k; ++i) nt.row(i) = t->row(perm[i]);
      tree.set_transition(h, nb, nt);
    }
  }
}

namespace {

void permute_params(TripletParams& p, const std::vector<int>& perm) {
  const int k = static_cast<int>(p.pi.size());
  TripletParams o = p;
  for (int i = 0; i < k; ++i) {
    p.pi(i) = o.pi(perm[i]);
    p.lambda(i) = o.lambda(perm[i]);
    p.a_a.col(i) = o.a_a.col(perm[i]);
    p.a_b.col(i) = o.a_b.col(perm[i]);
    p.a_c.col(i) = o.a_c.col(perm[i]);
  }
}

}  // namespace

PermutationMap align_in_group(LocalSubtree& subtree, int reference_local) {
  PermutationMap out;
  const int k = subtree.tree.hidden_dim();
  std::vector<int> identity(k);
  std::iota(identity.begin(), identity.end(), 0);

  std::map<int, const TripletRecord*> defining;
  for (auto& rec : subtree.triplets)
    if (!defining.count(rec.hidden)) defining[rec.hidden] = &rec;

  for (auto& rec : subtree.triplets) {
    const TripletRecord* base = defining.at(rec.hidden);
    if (&rec == base) {
      if (!out.count(rec.hidden)) out[rec.hidden] = identity;
      continue;
    }
    // shared view between the two records of the same hidden: prefer the
    // reference node, else any common node
    auto view_of = [&](const TripletRecord& r, int node) -> const Matrix* {
      if (r.nodes[0] == node) return &r.params.a_a;
      if (r.nodes[1] == node) return &r.params.a_b;
      if (r.nodes[2] == node) return &r.params.a_c;
      return nullptr;
    };
    int shared = -1;
    if (view_of(*base, reference_local) && view_of(rec, reference_local)) {
      shared = reference_local;
    } else {
      for (int n : rec.nodes)
        if (view_of(*base, n)) {
          shared = n;
          break;
        }
    }
    if (shared < 0)
      throw invalid_argument_error(
          "align_in_group: records share no view node");
    ColumnMatch m =
        match_columns(*view_of(*base, shared), *view_of(rec, shared));
    permute_params(rec.params, m.perm);
    out[rec.hidden] = m.perm;
  }
  return out;
}

OutGroupAlignment align_out_group(const Matrix& trip_other_x3,
                                  const Matrix& model_other_x3,
                                  const Matrix& trip_ref_x1,
                                  const Matrix& model_ref_x1,
                                  double low_confidence_gap) {
  // Relative label permutation of the other group against the reference,
  // measured through the shared observed views of the two cross triplets.
  Matrix rel_other = pseudo_inverse(trip_other_x3) * model_other_x3;
  Matrix rel_ref = pseudo_inverse(trip_ref_x1) * model_ref_x1;
  Matrix m = rel_other * rel_ref.transpose();
  // polar factor: M (M^T M)^{-1/2} through the principal square root
  Matrix root = principal_sqrt_spd(m.transpose() * m);
  Matrix ortho = m * pseudo_inverse(root);
  Assignment a = best_assignment(ortho);
  OutGroupAlignment out;
  out.perm = a.perm;
  Matrix pm = permutation_matrix(a.perm);
  out.gap = (ortho - pm).cwiseAbs().maxCoeff();
  out.low_confidence = out.gap > low_confidence_gap;
  return out;
}

// -- parameter finalization ---------------------------------------------------

namespace {

struct RepResult {
  int observed = -1;
  Matrix lift;  // E[x_observed | y_node]
};

/// Observed representative of `node` on its own side of the (node, avoid)
/// edge, lifted through recorded child parameters.
RepResult observed_rep(const MergedModel& merged, int node, int avoid) {
  const LatentTree& tree = merged.tree;
  if (!tree.is_hidden(node)) {
    RepResult r;
    r.observed = node;
    r.lift = Matrix::Identity(tree.dim(node), tree.dim(node));
    return r;
  }
  auto it = merged.hidden_children.find(node);
  if (it != merged.hidden_children.end()) {
    for (const auto& [child, a] : it->second) {
      // child must sit on node's side of the (node, avoid) edge
      auto path = tree.path(child, avoid);
      if (std::find(path.begin(), path.end(), node) == path.end()) continue;
      RepResult sub = observed_rep(merged, child, node);
      if (sub.observed < 0) continue;
      RepResult r;
      r.observed = sub.observed;
      r.lift = sub.lift * a;
      return r;
    }
  }
  return {};
}

}  // namespace

LatentTree finalize_parameters(MergedModel& merged, const MomentSource& moments,
                               int k, const FinalizeOptions& opt) {
  LatentTree& tree = merged.tree;
  const int p = merged.observed;
  int root = opt.root;
  if (root < 0) root = tree.hidden_count() > 0 ? p : 0;

  // orientation away from the root
  std::vector<int> order{root};
  std::vector<int> parent(tree.node_count(), -1);
  {
    std::vector<char> seen(tree.node_count(), 0);
    seen[root] = 1;
    for (std::size_t i = 0; i < order.size(); ++i)
      for (int nb : tree.neighbors(order[i]))
        if (!seen[nb]) {
          seen[nb] = 1;
          parent[nb] = order[i];
          order.push_back(nb);
        }
  }

  for (int child : order) {
    if (child == root) continue;
    const int par = parent[child];
    // recorded candidates for (child | par)
    auto it = merged.edge_candidates.find({child, par});
    if (it != merged.edge_candidates.end() && !it->second.empty()) {
      auto& cands = it->second;
      const EdgeParamCandidate* best = &cands.front();
      for (const auto& c : cands)
        if (c.residual < best->residual) best = &c;
      for (const auto& c : cands) {
        if (&c == best) continue;
        const double diff = (c.a - best->a).cwiseAbs().maxCoeff();
        if (diff > opt.conflict_tolerance) {
          std::ostringstream os;
          os << "edge " << child << "|" << par
             << ": duplicate estimates disagree by " << diff
             << "; keeping the lower-residual one";
          merged.warnings.push_back(os.str());
        }
      }
      tree.set_transition(child, par, best->a);
      continue;
    }
    // reversed recording (local orientation opposite the global root)
    auto rit = merged.edge_candidates.find({par, child});
    if (rit != merged.edge_candidates.end() && !rit->second.empty() &&
        tree.is_hidden(child) && tree.is_hidden(par) && tree.prior(child) &&
        tree.prior(par)) {
      const EdgeParamCandidate* best = &rit->second.front();
      for (const auto& c : rit->second)
        if (c.residual < best->residual) best = &c;
      tree.set_transition(
          child, par,
          reverse_transition(best->a, *tree.prior(child), *tree.prior(par)));
      continue;
    }
    // linear solve from lifted moments
    RepResult rc = observed_rep(merged, child, par);
    RepResult rp = observed_rep(merged, par, child);
    if (rc.observed < 0 || rp.observed < 0 || rc.observed == rp.observed) {
      std::ostringstream os;
      os << "edge " << child << "|" << par
         << ": no usable observed views for the linear solve";
      merged.warnings.push_back(os.str());
      continue;
    }
    Matrix cross = moments.pair(rc.observed, rp.observed);
    Matrix m_cp =
        pseudo_inverse(rc.lift) * cross * pseudo_inverse(rp.lift).transpose();
    Matrix a;
    if (tree.is_hidden(par)) {
      const Vector& pi = *tree.prior(par);
      a = m_cp;
      for (int r = 0; r < k; ++r) a.col(r) /= std::max(pi(r), 1e-12);
    } else {
      a = m_cp * pseudo_inverse(moments.pair(rp.observed, rp.observed));
    }
    tree.set_transition(child, par, a);
  }
  return tree;
}

}  // namespace ltm
