#include "ltm/mst.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ltm {
namespace {

struct EdgeKey {
  double w;
  int lo, hi;
  bool operator<(const EdgeKey& o) const {
    if (w != o.w) return w < o.w;
    if (lo != o.lo) return lo < o.lo;
    return hi < o.hi;
  }
};

EdgeKey key_of(const DistanceMatrix& d, int a, int b) {
  return {d(a, b), std::min(a, b), std::max(a, b)};
}

std::vector<std::vector<int>> finite_components(const DistanceMatrix& d) {
  const int p = d.size();
  std::vector<int> comp(p, -1);
  int nc = 0;
  for (int s = 0; s < p; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = nc;
    std::vector<int> stack{s};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int u = 0; u < p; ++u)
        if (u != v && comp[u] < 0 && d.finite(v, u)) {
          comp[u] = nc;
          stack.push_back(u);
        }
    }
    ++nc;
  }
  std::vector<std::vector<int>> out(nc);
  for (int v = 0; v < p; ++v) out[comp[v]].push_back(v);
  return out;
}

void throw_disconnected(const DistanceMatrix& d) {
  auto comps = finite_components(d);
  std::ostringstream os;
  os << "distance graph is disconnected into " << comps.size() << " components:";
  for (const auto& c : comps) {
    os << " {";
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
    os << "}";
  }
  throw disconnected_error(os.str(), std::move(comps));
}

MstGraph finalize(int p, std::vector<std::pair<int, int>> edges,
                  const DistanceMatrix& d) {
  MstGraph g;
  g.p = p;
  for (auto& [a, b] : edges)
    if (a > b) std::swap(a, b);
  std::sort(edges.begin(), edges.end());
  g.edges = std::move(edges);
  g.adj.assign(p, {});
  g.weight.reserve(g.edges.size());
  for (auto [a, b] : g.edges) {
    g.adj[a].push_back(b);
    g.adj[b].push_back(a);
    g.weight.push_back(d(a, b));
  }
  for (auto& nb : g.adj) std::sort(nb.begin(), nb.end());
  return g;
}

MstGraph prim(const DistanceMatrix& d) {
  const int p = d.size();
  std::vector<char> in_tree(p, 0);
  std::vector<EdgeKey> best(p, {kInfDistance, -1, -1});
  std::vector<int> best_from(p, -1);
  std::vector<std::pair<int, int>> edges;
  in_tree[0] = 1;
  for (int v = 1; v < p; ++v) {
    if (d.finite(0, v)) {
      best[v] = key_of(d, 0, v);
      best_from[v] = 0;
    }
  }
  for (int step = 1; step < p; ++step) {
    int pick = -1;
    for (int v = 0; v < p; ++v) {
      if (in_tree[v] || best_from[v] < 0) continue;
      if (pick < 0 || best[v] < best[pick]) pick = v;
    }
    if (pick < 0) throw_disconnected(d);
    in_tree[pick] = 1;
    edges.emplace_back(best_from[pick], pick);
    for (int v = 0; v < p; ++v) {
      if (in_tree[v] || !d.finite(pick, v)) continue;
      EdgeKey cand = key_of(d, pick, v);
      if (best_from[v] < 0 || cand < best[v]) {
        best[v] = cand;
        best_from[v] = pick;
      }
    }
  }
  return finalize(p, std::move(edges), d);
}

MstGraph boruvka(const DistanceMatrix& d) {
  const int p = d.size();
  std::vector<int> comp(p);
  std::iota(comp.begin(), comp.end(), 0);
  std::vector<std::pair<int, int>> edges;
  int comps = p;
  while (comps > 1) {
    std::vector<int> cheapest(p, -1);  // indexed by component root: edge index
    std::vector<std::pair<int, int>> cand(p, {-1, -1});
    std::vector<EdgeKey> cand_key(p, {kInfDistance, -1, -1});
    bool found = false;
    for (int a = 0; a < p; ++a) {
      for (int b = a + 1; b < p; ++b) {
        if (comp[a] == comp[b] || !d.finite(a, b)) continue;
        EdgeKey key = key_of(d, a, b);
        for (int side : {comp[a], comp[b]}) {
          if (cand[side].first < 0 || key < cand_key[side]) {
            cand[side] = {a, b};
            cand_key[side] = key;
            found = true;
          }
        }
      }
    }
    if (!found) throw_disconnected(d);
    for (int c = 0; c < p; ++c) {
      auto [a, b] = cand[c];
      if (a < 0) continue;
      if (comp[a] == comp[b]) continue;  // merged earlier this round
      edges.emplace_back(a, b);
      int from = comp[b], to = comp[a];
      for (int v = 0; v < p; ++v)
        if (comp[v] == from) comp[v] = to;
      --comps;
    }
    (void)cheapest;
  }
  return finalize(p, std::move(edges), d);
}

}  // namespace

double MstGraph::total_weight() const {
  double s = 0.0;
  for (double w : weight) s += w;
  return s;
}

MstGraph build_mst(const DistanceMatrix& d, const MstOptions& opt) {
  if (d.size() < 2) throw invalid_argument_error("build_mst needs >= 2 nodes");
  return opt.boruvka ? boruvka(d) : prim(d);
}

std::vector<Group> extract_groups(const MstGraph& mst) {
  if (mst.p < 3) throw invalid_argument_error("extract_groups needs p >= 3");
  std::vector<Group> groups;
  for (int v = 0; v < mst.p; ++v) {
    if (!mst.is_internal(v)) continue;
    Group g;
    g.leader = v;
    g.members = mst.adj[v];
    g.members.push_back(v);
    std::sort(g.members.begin(), g.members.end());
    groups.push_back(std::move(g));
  }
  return groups;
}

GroupStats group_stats(const MstGraph& mst) {
  GroupStats s;
  int max_deg = 0;
  for (int v = 0; v < mst.p; ++v) max_deg = std::max(max_deg, mst.degree(v));
  s.degree_histogram.assign(max_deg + 1, 0);
  for (int v = 0; v < mst.p; ++v) {
    ++s.degree_histogram[mst.degree(v)];
    s.gamma = std::max(s.gamma, mst.degree(v) + 1);
  }
  return s;
}

std::string mst_to_dot(const MstGraph& mst) {
  std::ostringstream os;
  os.precision(6);
  os << "graph mst {\n";
  for (int v = 0; v < mst.p; ++v) os << "  v" << v << ";\n";
  for (std::size_t e = 0; e < mst.edges.size(); ++e) {
    os << "  v" << mst.edges[e].first << " -- v" << mst.edges[e].second
       << " [label=\"" << mst.weight[e] << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace ltm
