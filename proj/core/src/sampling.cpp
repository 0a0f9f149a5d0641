#include "ltm/sampling.hpp"

#include <random>
#include <vector>

#include <Eigen/SparseCore>

namespace ltm {

SampleSet sample_model(const GroundTruthModel& model, long n, std::uint64_t seed) {
  const LatentTree& tree = model.tree;
  if (!tree.fully_parameterized())
    throw invalid_argument_error("sample_model: model not fully parameterized");
  const int p = tree.observed_count();
  const int k = tree.hidden_dim();

  std::vector<int> dims(p);
  for (int v = 0; v < p; ++v) dims[v] = tree.dim(v);
  const bool sparse = model.family == ObservationFamily::categorical;
  SampleSet out = sparse ? SampleSet::sparse(dims, n) : SampleSet::dense(dims, n);

  // traversal order root -> leaves with parent pointers
  std::vector<int> order{model.root};
  std::vector<int> parent(tree.node_count(), -1);
  {
    std::vector<char> seen(tree.node_count(), 0);
    seen[model.root] = 1;
    for (std::size_t i = 0; i < order.size(); ++i)
      for (int nb : tree.neighbors(order[i]))
        if (!seen[nb]) {
          seen[nb] = 1;
          parent[nb] = order[i];
          order.push_back(nb);
        }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto draw_state = [&](const double* probs, int m) {
    double u = unif(rng);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      acc += probs[i];
      if (u <= acc) return i;
    }
    return m - 1;
  };

  std::vector<Eigen::Triplet<double>> trip;
  std::vector<std::vector<Eigen::Triplet<double>>> trips(sparse ? p : 0);

  std::vector<int> hidden_state(tree.node_count(), -1);
  for (long s = 0; s < n; ++s) {
    for (int v : order) {
      if (tree.is_hidden(v)) {
        if (v == model.root) {
          hidden_state[v] = draw_state(tree.prior(v)->data(), k);
        } else {
          const Matrix& t = *tree.transition(v, parent[v]);
          Vector col = t.col(hidden_state[parent[v]]);
          hidden_state[v] = draw_state(col.data(), k);
        }
      } else {
        const Matrix& a = *tree.transition(v, parent[v]);
        Vector mean = a.col(hidden_state[parent[v]]);
        if (model.family == ObservationFamily::categorical) {
          int coord = draw_state(mean.data(), tree.dim(v));
          trips[v].emplace_back(coord, s, 1.0);
        } else {
          Matrix& dst = out.dense_var(v);
          for (int r = 0; r < tree.dim(v); ++r)
            dst(r, s) = mean(r) + model.noise_sigma * normal(rng);
        }
      }
    }
  }

  if (sparse) {
    for (int v = 0; v < p; ++v) {
      out.sparse_var(v).setFromTriplets(trips[v].begin(), trips[v].end());
      out.sparse_var(v).makeCompressed();
    }
  }
  return out;
}

}  // namespace ltm
