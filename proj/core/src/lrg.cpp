#include "ltm/lrg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "ltm/svd.hpp"

namespace ltm {

double phi(int a, int b, int c, const DistanceMatrix& d) {
  if (a == b || b == c || a == c)
    throw invalid_argument_error("phi: nodes must be distinct");
  if (!d.finite(a, c) || !d.finite(b, c) || !d.finite(a, b))
    throw invalid_argument_error("phi: infinite distance involved");
  return d(a, c) - d(b, c);
}

PairRelation classify_pair(int a, int b, const std::vector<int>& active,
                           const DistanceMatrix& d, double eps) {
  std::vector<int> witnesses;
  for (int c : active)
    if (c != a && c != b) witnesses.push_back(c);
  if (witnesses.empty())
    throw invalid_argument_error("classify_pair: needs at least one witness");

  const double dab = d(a, b);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double max_dev_pos = 0.0, max_dev_neg = 0.0;
  for (int c : witnesses) {
    const double v = phi(a, b, c, d);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    max_dev_pos = std::max(max_dev_pos, std::abs(v - dab));
    max_dev_neg = std::max(max_dev_neg, std::abs(v + dab));
  }
  const bool a_leaf = max_dev_pos <= eps;
  const bool b_leaf = max_dev_neg <= eps;
  if (a_leaf && b_leaf) return PairRelation::unrelated;  // degenerate pair
  if (a_leaf) return PairRelation::a_leaf_of_b;
  if (b_leaf) return PairRelation::b_leaf_of_a;
  if (hi - lo <= eps && lo > -dab + eps && hi < dab - eps)
    return PairRelation::siblings;
  return PairRelation::unrelated;
}

int introduce_hidden(const std::vector<int>& siblings,
                     const std::vector<int>& witnesses, DistanceMatrix& d,
                     double eps) {
  if (siblings.size() < 2)
    throw invalid_argument_error("introduce_hidden: needs >= 2 siblings");
  const int h = d.append_node();

  auto phi_avg = [&](int i, int j) {
    double acc = 0.0;
    int count = 0;
    for (int w : siblings)
      if (w != i && w != j) {
        acc += phi(i, j, w, d);
        ++count;
      }
    for (int w : witnesses)
      if (w != i && w != j) {
        acc += phi(i, j, w, d);
        ++count;
      }
    if (count == 0)
      throw invalid_argument_error("introduce_hidden: no witness for a pair");
    return acc / count;
  };

  // distance from each sibling to the new parent
  for (int i : siblings) {
    double acc = 0.0;
    int count = 0;
    for (int j : siblings) {
      if (j == i) continue;
      acc += 0.5 * (d(i, j) + phi_avg(i, j));
      ++count;
    }
    double dist = acc / count;
    if (dist < -eps)
      throw invalid_argument_error(
          "introduce_hidden: negative edge length (model violation)");
    d.set(i, h, std::max(dist, 0.0));
  }

  // distance from the new parent to every other existing node
  for (int v = 0; v + 1 < d.size(); ++v) {
    if (std::find(siblings.begin(), siblings.end(), v) != siblings.end())
      continue;
    double acc = 0.0;
    int count = 0;
    bool inf_seen = false;
    for (int i : siblings) {
      if (!d.finite(i, v)) {
        inf_seen = true;
        break;
      }
      acc += d(i, v) - d(i, h);
      ++count;
    }
    d.set(v, h, inf_seen ? kInfDistance : std::max(acc / count, 0.0));
  }
  return h;
}

namespace {

/// Per-node moment access through the observed representatives.
struct ViewContext {
  const MomentSource& src;
  const std::vector<int>& rep;          // global observed rep per local node
  const std::vector<Matrix>& lift;      // E[x_rep | y_node]
  std::vector<Matrix> lift_pinv;        // cached pseudo-inverses
  // posterior-mode pseudo samples per local node (k x N), empty otherwise
  const std::vector<Matrix>* pseudo = nullptr;

  const Matrix& pinv(int v) {
    if (lift_pinv.size() < lift.size()) lift_pinv.resize(lift.size());
    if (lift_pinv[v].size() == 0) lift_pinv[v] = pseudo_inverse(lift[v]);
    return lift_pinv[v];
  }

  bool is_identity(int v) const {
    const Matrix& l = lift[v];
    return l.rows() == l.cols() && l.isIdentity(1e-14);
  }

  Matrix pair(int u, int v) {
    Matrix m = src.pair(rep[u], rep[v]);
    if (!is_identity(u)) m = pinv(u) * m;
    if (!is_identity(v)) m = m * pinv(v).transpose();
    return m;
  }

  Vector mean(int u) {
    Vector m = src.mean(rep[u]);
    if (!is_identity(u)) return pinv(u) * m;
    return m;
  }

  Tensor3 triple(int u, int v, int w) {
    Tensor3 t = src.triple(rep[u], rep[v], rep[w]);
    if (!is_identity(u)) t = t.mode_multiply(0, pinv(u));
    if (!is_identity(v)) t = t.mode_multiply(1, pinv(v));
    if (!is_identity(w)) t = t.mode_multiply(2, pinv(w));
    return t;
  }
};

std::uint64_t mix_seed(std::uint64_t seed, int leader, int hidden_index) {
  std::uint64_t h = seed ^ 0xA0761D6478BD642FULL;
  h ^= static_cast<std::uint64_t>(leader) << 32;
  h ^= static_cast<std::uint64_t>(hidden_index);
  h *= 0xE7037ED1A0B428DBULL;
  h ^= h >> 32;
  return h;
}

}  // namespace

LocalSubtree local_recursive_grouping(const Group& group,
                                      const DistanceMatrix& global_d,
                                      const MomentSource& moments, int k,
                                      const LrgOptions& opt) {
  LocalSubtree out;
  out.globals = group.members;
  std::sort(out.globals.begin(), out.globals.end());
  const int g = static_cast<int>(out.globals.size());
  out.leader_local = static_cast<int>(
      std::find(out.globals.begin(), out.globals.end(), group.leader) -
      out.globals.begin());
  if (out.leader_local >= g)
    throw invalid_argument_error("lrg: leader not among group members");

  std::vector<int> dims(g);
  for (int i = 0; i < g; ++i) dims[i] = moments.dim(out.globals[i]);
  out.tree = LatentTree(dims, k);

  // local distance matrix over members, extended as hiddens appear
  out.dist = DistanceMatrix(g);
  for (int i = 0; i < g; ++i)
    for (int j = i + 1; j < g; ++j)
      out.dist.set(i, j, global_d(out.globals[i], out.globals[j]));

  double eps;
  if (opt.epsilon) {
    eps = *opt.epsilon;
  } else {
    double min_pos = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g; ++i)
      for (int j = i + 1; j < g; ++j)
        if (out.dist(i, j) > 0.0) min_pos = std::min(min_pos, out.dist(i, j));
    eps = std::isfinite(min_pos) ? 0.2 * min_pos : 1e-6;
  }
  out.epsilon_used = eps;

  out.view_rep.resize(g);
  out.view_lift.resize(g);
  for (int i = 0; i < g; ++i) {
    out.view_rep[i] = out.globals[i];
    out.view_lift[i] = Matrix::Identity(dims[i], dims[i]);
  }

  std::vector<Matrix> pseudo;  // posterior mode pseudo-samples per node
  const bool posterior_mode = opt.hidden_dist == HiddenDistanceMode::posterior;
  if (posterior_mode) {
    if (!opt.samples || opt.family != ObservationFamily::categorical)
      throw invalid_argument_error(
          "posterior hidden-distance mode needs categorical samples");
    pseudo.resize(g);
  }

  ViewContext views{moments, out.view_rep, out.view_lift, {}, nullptr};

  std::vector<int> active(g);
  std::iota(active.begin(), active.end(), 0);

  auto lifted_self = [&](int v) -> Matrix {
    if (out.tree.is_hidden(v)) {
      return Matrix(out.tree.prior(v)->asDiagonal());
    }
    return moments.pair(out.view_rep[v], out.view_rep[v]);
  };

  int rounds = 0;
  std::vector<int> fresh_hiddens;
  while (static_cast<int>(active.size()) > 2) {
    if (++rounds > g + 2)
      throw convergence_error("lrg: active set stopped shrinking", active);
    const std::size_t active_before = active.size();

    // classify all unordered pairs on the current active set
    std::map<std::pair<int, int>, PairRelation> rel;
    for (std::size_t x = 0; x < active.size(); ++x)
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        int a = active[x], b = active[y];
        rel[{a, b}] = classify_pair(a, b, active, out.dist, eps);
      }
    auto relation = [&](int a, int b) {
      if (a < b) return rel.at({a, b});
      PairRelation r = rel.at({b, a});
      if (r == PairRelation::a_leaf_of_b) return PairRelation::b_leaf_of_a;
      if (r == PairRelation::b_leaf_of_a) return PairRelation::a_leaf_of_b;
      return r;
    };

    // 1. peel leaves: attach to the closest parent candidate
    std::vector<int> remaining;
    std::vector<char> removed(out.tree.node_count(), 0);
    for (int a : active) {
      int parent = -1;
      for (int b : active) {
        if (b == a) continue;
        if (relation(a, b) == PairRelation::a_leaf_of_b) {
          if (parent < 0 || out.dist(a, b) < out.dist(a, parent)) parent = b;
        }
      }
      if (parent >= 0) {
        out.tree.add_edge(a, parent);
        out.edge_length[{std::min(a, parent), std::max(a, parent)}] =
            out.dist(a, parent);
        removed[a] = 1;
      }
    }
    for (int a : active)
      if (!removed[a]) remaining.push_back(a);

    // a parent that lost every other active node keeps the algorithm moving
    active = remaining;
    if (static_cast<int>(active.size()) <= 2) break;

    // 2. sibling components among the remaining active nodes
    std::map<int, int> comp;
    for (int a : active) comp[a] = a;
    std::function<int(int)> find = [&](int v) {
      while (comp[v] != v) v = comp[v] = comp[comp[v]];
      return v;
    };
    for (std::size_t x = 0; x < active.size(); ++x)
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        int a = active[x], b = active[y];
        if (relation(a, b) == PairRelation::siblings)
          comp[find(a)] = find(b);
      }
    std::map<int, std::vector<int>> clusters;
    for (int a : active) clusters[find(a)].push_back(a);

    bool introduced = false;
    std::vector<int> next_active;
    for (auto& [root, members] : clusters) {
      if (members.size() < 2) {
        next_active.push_back(members.front());
        continue;
      }
      std::sort(members.begin(), members.end());
      std::vector<int> witnesses;
      for (int v : active)
        if (std::find(members.begin(), members.end(), v) == members.end())
          witnesses.push_back(v);

      const int h = out.tree.add_hidden();
      const int h_dist = introduce_hidden(members, witnesses, out.dist, eps);
      if (h != h_dist)
        throw invalid_argument_error("lrg: hidden id mismatch");

      for (int s : members) {
        out.tree.add_edge(s, h);
        out.edge_length[{std::min(s, h), std::max(s, h)}] = out.dist(s, h);
      }

      // triplet selection per the sibling count
      int ta = members[0], tb = members[1], tc;
      bool witness_internal = false;
      if (members.size() >= 3) {
        tc = members[2];
        witness_internal = true;
      } else {
        tc = -1;
        for (int w : witnesses)
          if (tc < 0 || out.dist(ta, w) < out.dist(ta, tc) ||
              (out.dist(ta, w) == out.dist(ta, tc) && w < tc))
            tc = w;
        if (tc < 0)
          throw convergence_error("lrg: no witness for a 2-sibling set", active);
      }

      TripletMoments tm;
      tm.m_ab = views.pair(ta, tb);
      tm.m_ac = views.pair(ta, tc);
      tm.m_bc = views.pair(tb, tc);
      tm.t_abc = views.triple(ta, tb, tc);
      tm.mean_a = views.mean(ta);
      tm.mean_b = views.mean(tb);
      tm.mean_c = views.mean(tc);

      TensorOptions topt = opt.tensor;
      topt.seed = mix_seed(opt.seed, group.leader, out.tree.hidden_count() - 1);
      TripletParams params = decompose_triplet(tm, k, topt);

      out.tree.set_prior(h, params.pi);
      out.tree.set_transition(ta, h, params.a_a);
      out.tree.set_transition(tb, h, params.a_b);
      if (witness_internal) out.tree.set_transition(tc, h, params.a_c);

      // remaining siblings: solve A_s from the cross moment with ta
      for (int s : members) {
        if (s == ta || s == tb || (witness_internal && s == tc)) continue;
        Matrix m_sa = views.pair(s, ta);
        Matrix a_s = m_sa * pseudo_inverse(params.a_a).transpose();
        for (int r = 0; r < k; ++r) a_s.col(r) /= std::max(params.pi(r), 1e-12);
        out.tree.set_transition(s, h, a_s);
      }

      // view of the new hidden through its first child
      out.view_rep.push_back(out.view_rep[ta]);
      out.view_lift.push_back(out.view_lift[ta] * params.a_a);
      views.lift_pinv.clear();

      {
        std::ostringstream os;
        os << "sibling test {";
        for (std::size_t i = 0; i < members.size(); ++i)
          os << (i ? "," : "") << members[i];
        os << "} witness " << tc
           << (witness_internal ? " (in-set)" : " (external)");
        out.hidden_provenance.push_back(os.str());
      }

      TripletRecord rec;
      rec.hidden = h;
      rec.nodes = {ta, tb, tc};
      rec.witness_in_siblings = witness_internal;
      rec.params = std::move(params);
      out.triplets.push_back(std::move(rec));

      if (posterior_mode) {
        // posterior pseudo-samples from the two defining children
        const long n = opt.samples->sample_count();
        Matrix hp(k, n);
        std::vector<Matrix> child_data;
        for (int child : {ta, tb})
          if (!out.tree.is_hidden(child))
            child_data.push_back(opt.samples->to_dense(out.globals[child]));
          else
            child_data.push_back(pseudo[child]);
        const Matrix& a_ta = *out.tree.transition(ta, h);
        const Matrix& a_tb = *out.tree.transition(tb, h);
        const Vector& pi = *out.tree.prior(h);
        auto lik = [&](const Matrix& a, const Vector& col, int r) {
          double acc = 1.0;
          for (int rr = 0; rr < col.size(); ++rr)
            if (col(rr) != 0.0)
              acc *= std::pow(std::max(a(rr, r), 1e-12), col(rr));
          return acc;
        };
        for (long s = 0; s < n; ++s) {
          Vector post(k);
          for (int r = 0; r < k; ++r)
            post(r) = pi(r) * lik(a_ta, child_data[0].col(s), r) *
                      lik(a_tb, child_data[1].col(s), r);
          post /= post.sum();
          hp.col(s) = post;
        }
        while (pseudo.size() < static_cast<std::size_t>(h)) pseudo.emplace_back();
        pseudo.push_back(std::move(hp));
      }

      next_active.push_back(h);
      fresh_hiddens.push_back(h);
      introduced = true;
    }

    active = next_active;
    std::sort(active.begin(), active.end());

    // hidden-distance refresh for the non-metric modes, over the whole
    // surviving active set
    if (opt.hidden_dist != HiddenDistanceMode::metric) {
      const long n = posterior_mode ? opt.samples->sample_count() : 0;
      for (int h : fresh_hiddens) {
        Matrix self_h;
        if (posterior_mode)
          self_h = pseudo[h] * pseudo[h].transpose() / double(n);
        else
          self_h = Matrix(out.tree.prior(h)->asDiagonal());
        for (int v : active) {
          if (v == h) continue;
          Matrix m_hv;
          if (posterior_mode) {
            const Matrix vd = out.tree.is_hidden(v)
                                  ? pseudo[v]
                                  : opt.samples->to_dense(out.globals[v]);
            m_hv = pseudo[h] * vd.transpose() / double(n);
          } else {
            m_hv = views.pair(h, v);
          }
          Matrix self_v = posterior_mode && out.tree.is_hidden(v)
                              ? Matrix(pseudo[v] * pseudo[v].transpose() / double(n))
                              : lifted_self(v);
          out.dist.set(h, v,
                       std::max(info_distance(m_hv, self_h, self_v, k), 0.0));
        }
      }
    }
    fresh_hiddens.clear();

    if (!introduced && active.size() == active_before)
      throw convergence_error("lrg: no pair classified in a full pass", active);
  }

  if (active.size() == 2) {
    out.tree.add_edge(active[0], active[1]);
    out.edge_length[{active[0], active[1]}] = out.dist(active[0], active[1]);
  }

  if (!out.tree.is_connected_tree())
    throw convergence_error("lrg: local structure is not a tree", active);
  return out;
}

std::string LocalSubtree::to_json() const {
  std::ostringstream os;
  os << "{\"leader\":" << globals[leader_local] << ",\"members\":[";
  for (int i = 0; i < static_cast<int>(globals.size()); ++i)
    os << (i ? "," : "") << globals[i];
  os << "],\"hidden_count\":" << tree.hidden_count() << ",\"edges\":[";
  bool first = true;
  for (auto [a, b] : tree.edges()) {
    os << (first ? "" : ",") << "[" << a << "," << b << "]";
    first = false;
  }
  os << "],\"hidden_provenance\":[";
  for (std::size_t i = 0; i < hidden_provenance.size(); ++i) {
    os << (i ? "," : "") << "\"" << hidden_provenance[i] << "\"";
  }
  os << "],\"epsilon\":" << epsilon_used << "}";
  return os.str();
}

}  // namespace ltm
