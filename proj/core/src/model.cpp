#include "ltm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/SVD>

#include "ltm/distance.hpp"
#include "ltm/exact.hpp"

namespace ltm {
namespace {

using Rng = std::mt19937_64;

Vector draw_prior(int k, double floor, double gap, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  for (int attempt = 0; attempt < 4096; ++attempt) {
    Vector pi(k);
    for (int i = 0; i < k; ++i) pi(i) = unif(rng);
    pi /= pi.sum();
    if (pi.minCoeff() < floor) continue;
    Vector sorted = pi;
    std::sort(sorted.data(), sorted.data() + k, std::greater<>());
    bool ok = true;
    for (int i = 0; i + 1 < k; ++i)
      if (sorted(i) - sorted(i + 1) < gap) ok = false;
    if (ok) return pi;
  }
  throw invalid_argument_error("could not draw a prior satisfying floor/gap");
}

double min_singular(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(std::min(m.rows(), m.cols()) - 1);
}

/// Self moment of an observed node given its conditional means and the
/// parent prior, per observation family.
Matrix observed_self_moment(const Matrix& a, const Vector& pi,
                            ObservationFamily family, double sigma) {
  if (family == ObservationFamily::categorical) {
    Vector marg = a * pi;
    return Matrix(marg.asDiagonal());
  }
  Matrix m = a * pi.asDiagonal() * a.transpose();
  m.diagonal().array() += sigma * sigma;
  return m;
}

struct EdgeDraw {
  Matrix a;        // E[child | parent]
  double distance; // information distance of the edge
};

/// Distance of an edge child<-parent given the draw, the parent prior and the
/// child's self-moment volume.
double edge_distance(const Matrix& a, const Vector& pi_parent,
                     const Matrix& self_child, int k) {
  Matrix m_cp = a * pi_parent.asDiagonal();  // E[y_child y_parent^T]
  Matrix m_pp = Matrix(pi_parent.asDiagonal());
  return info_distance(m_cp, self_child, m_pp, k);
}

/// Sharpest admissible column-stochastic matrix towards which random draws
/// are mixed to shorten an edge. For d >= k this spreads the k basis
/// directions over distinct coordinates.
Matrix sharp_stochastic(int d, int k) {
  Matrix s = Matrix::Constant(d, k, 1e-3);
  for (int r = 0; r < k; ++r) s(r, r) = 1.0;
  for (int c = 0; c < k; ++c) s.col(c) /= s.col(c).sum();
  return s;
}

Matrix random_stochastic(int d, int k, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  Matrix m(d, k);
  for (int c = 0; c < k; ++c) {
    double sum = 0.0;
    for (int r = 0; r < d; ++r) {
      m(r, c) = expo(rng) + 1e-6;
      sum += m(r, c);
    }
    m.col(c) /= sum;
  }
  return m;
}

/// Draws E[child|parent] for a hidden-hidden edge: mixes a random stochastic
/// matrix toward identity until the conditioning floor, the distance band and
/// the child prior constraints are all met.
bool draw_hidden_edge(const GeneratorOptions& opt, int k, const Vector& pi_par,
                      Rng& rng, Matrix& out, Vector& pi_child) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    Matrix base = random_stochastic(k, k, rng);
    Matrix sharp = Matrix::Identity(k, k);
    // bisection on the mixing weight for the distance band
    double lo = 0.0, hi = 1.0;
    auto candidate = [&](double w) { return ((1.0 - w) * base + w * sharp).eval(); };
    auto dist_of = [&](const Matrix& t) {
      Vector pc = t * pi_par;
      Matrix self = Matrix(pc.asDiagonal());
      return edge_distance(t, pi_par, self, k);
    };
    // dist decreases as w -> 1 (t -> identity has distance 0 for sorted equal priors)
    double dlo = dist_of(candidate(0.0));
    double dhi = dist_of(candidate(1.0));
    if (!(dhi <= opt.edge_dist_max)) continue;  // even sharpest too far: resample
    double target_lo = opt.edge_dist_min, target_hi = opt.edge_dist_max;
    double w = 0.0;
    if (dlo > target_hi) {
      // bisect for a distance inside the band
      for (int it = 0; it < 60; ++it) {
        w = 0.5 * (lo + hi);
        double d = dist_of(candidate(w));
        if (d > target_hi)
          lo = w;
        else if (d < target_lo)
          hi = w;
        else
          break;
      }
    }
    Matrix t = candidate(w);
    double d = dist_of(t);
    if (d < target_lo || d > target_hi) continue;
    if (min_singular(t) < opt.conditioning_floor) continue;
    Vector pc = t * pi_par;
    if (pc.minCoeff() < opt.prior_floor) continue;
    Vector sorted = pc;
    std::sort(sorted.data(), sorted.data() + k, std::greater<>());
    bool gap_ok = true;
    for (int i = 0; i + 1 < k; ++i)
      if (sorted(i) - sorted(i + 1) < opt.prior_gap) gap_ok = false;
    if (!gap_ok) continue;
    out = std::move(t);
    pi_child = std::move(pc);
    return true;
  }
  return false;
}

/// Draws E[x|parent] for an observed leaf.
bool draw_observed_edge(const GeneratorOptions& opt, int d, int k,
                        const Vector& pi_par, Rng& rng, Matrix& out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 256; ++attempt) {
    Matrix base, sharp;
    if (opt.family == ObservationFamily::categorical) {
      base = random_stochastic(d, k, rng);
      sharp = sharp_stochastic(d, k);
    } else {
      base = Matrix(d, k);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < k; ++c) base(r, c) = normal(rng);
      sharp = 2.0 * Matrix::Identity(d, k);
    }
    auto candidate = [&](double w) { return ((1.0 - w) * base + w * sharp).eval(); };
    auto dist_of = [&](const Matrix& a) {
      Matrix self = observed_self_moment(a, pi_par, opt.family, opt.noise_sigma);
      return edge_distance(a, pi_par, self, k);
    };
    double lo = 0.0, hi = 1.0, w = 0.0;
    double dhi = dist_of(candidate(1.0));
    if (!(dhi <= opt.edge_dist_max)) continue;
    if (dist_of(candidate(0.0)) > opt.edge_dist_max) {
      for (int it = 0; it < 60; ++it) {
        w = 0.5 * (lo + hi);
        double dd = dist_of(candidate(w));
        if (dd > opt.edge_dist_max)
          lo = w;
        else if (dd < opt.edge_dist_min)
          hi = w;
        else
          break;
      }
    }
    Matrix a = candidate(w);
    double dd = dist_of(a);
    if (dd < opt.edge_dist_min || dd > opt.edge_dist_max) continue;
    if (min_singular(a) < opt.conditioning_floor) continue;
    out = std::move(a);
    return true;
  }
  return false;
}

/// Hidden skeleton + leaf assignment for each topology. Returns, for m hidden
/// nodes, the skeleton edges (hidden-local indices) and the hidden owner of
/// every observed leaf.
struct Skeleton {
  int m = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> leaf_owner;  // size p
};

Skeleton balanced_skeleton(int p) {
  Skeleton s;
  s.leaf_owner.assign(p, -1);
  std::vector<int> leaves(p);
  std::iota(leaves.begin(), leaves.end(), 0);
  // Recursive three-way split; nodes of size <= 3 become one hidden star.
  struct Builder {
    Skeleton& s;
    int build(const std::vector<int>& group) {
      int h = s.m++;
      if (group.size() <= 3) {
        for (int leaf : group) s.leaf_owner[leaf] = h;
        return h;
      }
      std::size_t third = group.size() / 3;
      std::vector<std::vector<int>> parts(3);
      for (std::size_t i = 0; i < group.size(); ++i)
        parts[std::min<std::size_t>(i / std::max<std::size_t>(third, 1), 2)].push_back(group[i]);
      for (auto& part : parts) {
        if (part.empty()) continue;
        if (part.size() == 1) {
          s.leaf_owner[part[0]] = h;
        } else {
          int child = build(part);
          s.edges.emplace_back(h, child);
        }
      }
      return h;
    }
  } builder{s};
  builder.build(leaves);
  return s;
}

Skeleton caterpillar_skeleton(int p) {
  Skeleton s;
  s.m = std::max(1, (p + 2) / 3);
  for (int i = 0; i + 1 < s.m; ++i) s.edges.emplace_back(i, i + 1);
  s.leaf_owner.assign(p, -1);
  // round-robin so spine ends collect at least two leaves
  for (int leaf = 0; leaf < p; ++leaf) s.leaf_owner[leaf] = leaf % s.m;
  return s;
}

Skeleton random_skeleton(int p, int max_degree, Rng& rng) {
  if (max_degree < 3) throw invalid_argument_error("max_degree must be >= 3");
  Skeleton s;
  int m_lo = std::max(1, (p - 2 + (max_degree - 3)) / (max_degree - 2));
  int m_hi = std::max(m_lo, p - 2);
  std::uniform_int_distribution<int> pick_m(m_lo, m_hi);
  for (int outer = 0; outer < 64; ++outer) {
    s = Skeleton{};
    s.m = pick_m(rng);
    s.edges.clear();
    s.leaf_owner.assign(p, -1);
    std::vector<int> deg(s.m, 0);
    bool ok = true;
    // random attachment skeleton, spine degree capped to reserve leaf slots
    for (int h = 1; h < s.m && ok; ++h) {
      std::vector<int> candidates;
      for (int t = 0; t < h; ++t)
        if (deg[t] < max_degree - 1) candidates.push_back(t);
      if (candidates.empty()) {
        ok = false;
        break;
      }
      std::uniform_int_distribution<int> pick(0, (int)candidates.size() - 1);
      int t = candidates[pick(rng)];
      s.edges.emplace_back(t, h);
      ++deg[t];
      ++deg[h];
    }
    if (!ok) continue;
    // top up every hidden to degree >= 3, then scatter remaining leaves
    std::vector<int> owners;
    for (int h = 0; h < s.m; ++h)
      for (int c = deg[h]; c < 3; ++c) owners.push_back(h);
    if ((int)owners.size() > p) continue;
    for (int h = 0; h < s.m; ++h) deg[h] += std::max(0, 3 - deg[h]);
    int rest = p - (int)owners.size();
    for (int i = 0; i < rest; ++i) {
      std::vector<int> candidates;
      for (int h = 0; h < s.m; ++h)
        if (deg[h] < max_degree) candidates.push_back(h);
      if (candidates.empty()) {
        ok = false;
        break;
      }
      std::uniform_int_distribution<int> pick(0, (int)candidates.size() - 1);
      int h = candidates[pick(rng)];
      owners.push_back(h);
      ++deg[h];
    }
    if (!ok) continue;
    std::shuffle(owners.begin(), owners.end(), rng);
    for (int leaf = 0; leaf < p; ++leaf) s.leaf_owner[leaf] = owners[leaf];
    return s;
  }
  throw invalid_argument_error("random skeleton generation failed");
}

}  // namespace

void canonicalize_hidden_labels(LatentTree& tree) {
  const int k = tree.hidden_dim();
  for (int h = tree.observed_count(); h < tree.node_count(); ++h) {
    const Vector* pi = tree.prior(h);
    if (!pi) continue;
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return (*pi)(a) > (*pi)(b); });
    bool identity = true;
    for (int i = 0; i < k; ++i) identity &= (order[i] == i);
    if (identity) continue;

    Vector new_pi(k);
    for (int i = 0; i < k; ++i) new_pi(i) = (*pi)(order[i]);
    tree.set_prior(h, new_pi);
    for (int nb : tree.neighbors(h)) {
      if (const Matrix* t = tree.transition(nb, h)) {
        Matrix perm(t->rows(), k);
        for (int i = 0; i < k; ++i) perm.col(i) = t->col(order[i]);
        tree.set_transition(nb, h, perm);
      }
      if (const Matrix* t = tree.transition(h, nb)) {
        Matrix perm(k, t->cols());
        for (int i = 0; i < k; ++i) perm.row(i) = t->row(order[i]);
        tree.set_transition(h, nb, perm);
      }
    }
  }
}

GroundTruthModel random_latent_tree(int p, int k, const std::vector<int>& dims,
                                    const GeneratorOptions& opt,
                                    std::uint64_t seed) {
  if (p < 3) throw invalid_argument_error("p must be >= 3");
  if ((int)dims.size() != p) throw invalid_argument_error("dims size != p");
  for (int d : dims)
    if (k > d) throw invalid_argument_error("k exceeds an observed dimension");

  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    Rng rng(seed * 0x9E3779B97F4A7C15ULL + attempt + 1);
    Skeleton skel;
    switch (opt.topology) {
      case Topology::balanced:
        skel = balanced_skeleton(p);
        break;
      case Topology::caterpillar:
        skel = caterpillar_skeleton(p);
        break;
      case Topology::random_degree:
        skel = random_skeleton(p, opt.max_degree, rng);
        break;
    }

    LatentTree tree(dims, k);
    std::vector<int> hid(skel.m);
    for (int i = 0; i < skel.m; ++i) hid[i] = tree.add_hidden();
    for (auto [a, b] : skel.edges) tree.add_edge(hid[a], hid[b]);
    for (int leaf = 0; leaf < p; ++leaf) tree.add_edge(leaf, hid[skel.leaf_owner[leaf]]);

    // parameterize root-down
    int root = hid[0];
    bool ok = true;
    tree.set_prior(root, draw_prior(k, opt.prior_floor, opt.prior_gap, rng));
    std::vector<int> order = [&] {
      std::vector<int> out{root};
      std::vector<char> seen(tree.node_count(), 0);
      seen[root] = 1;
      for (std::size_t i = 0; i < out.size(); ++i)
        for (int nb : tree.neighbors(out[i]))
          if (!seen[nb]) {
            seen[nb] = 1;
            out.push_back(nb);
          }
      return out;
    }();
    std::vector<int> parent(tree.node_count(), -1);
    for (int v : order)
      for (int nb : tree.neighbors(v))
        if (parent[v] != nb && parent[nb] == -1 && nb != root) parent[nb] = v;

    for (int v : order) {
      if (v == root) continue;
      int par = parent[v];
      const Vector& pi_par = *tree.prior(par);
      if (tree.is_hidden(v)) {
        Matrix t;
        Vector pi_child;
        if (!draw_hidden_edge(opt, k, pi_par, rng, t, pi_child)) {
          ok = false;
          break;
        }
        tree.set_transition(v, par, std::move(t));
        tree.set_prior(v, std::move(pi_child));
      } else {
        Matrix a;
        if (!draw_observed_edge(opt, tree.dim(v), k, pi_par, rng, a)) {
          ok = false;
          break;
        }
        tree.set_transition(v, par, std::move(a));
      }
    }
    if (!ok) continue;

    canonicalize_hidden_labels(tree);
    tree.reroot(root);  // refresh propagated priors after relabeling

    GroundTruthModel model{std::move(tree), root, opt.family,
                           opt.family == ObservationFamily::gaussian
                               ? opt.noise_sigma
                               : 0.0,
                           seed};
    if (!model.tree.validate().empty()) continue;
    return model;
  }
  throw invalid_argument_error("model generation failed for this configuration");
}

GroundTruthModel random_latent_tree(int p, int k, int dim,
                                    const GeneratorOptions& opt,
                                    std::uint64_t seed) {
  return random_latent_tree(p, k, std::vector<int>(p, dim), opt, seed);
}

Vector observed_mean(const GroundTruthModel& model, int v) {
  if (model.tree.is_hidden(v)) return *model.tree.prior(v);
  // leaf: E[x] = A * pi_parent
  int parent = model.tree.neighbors(v).front();
  return model.tree.directed_transition(v, parent) * (*model.tree.prior(parent));
}

}  // namespace ltm
