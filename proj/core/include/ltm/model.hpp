#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ltm/tree.hpp"

namespace ltm {

/// Concrete observation families. Both keep E[x|h] = A h exactly:
/// categorical draws a one-hot coordinate from the column A(:,r);
/// gaussian adds spherical noise around the column.
enum class ObservationFamily { categorical, gaussian };

enum class Topology { balanced, caterpillar, random_degree };

struct GeneratorOptions {
  Topology topology = Topology::random_degree;
  int max_degree = 4;  // random_degree cap, >= 3
  ObservationFamily family = ObservationFamily::categorical;
  double noise_sigma = 0.2;  // gaussian family only
  /// Smallest singular value allowed for any conditional-mean matrix.
  double conditioning_floor = 0.1;
  /// Floors keeping every hidden prior entry usable and the per-node
  /// descending-prior labeling unambiguous.
  double prior_floor = 0.05;
  double prior_gap = 0.02;
  /// Information-distance band for every tree edge (homogeneity knob).
  double edge_dist_min = 0.1;
  double edge_dist_max = 0.8;
};

/// Synthetic generator state: a fully parameterized identifiable tree, the
/// source of exact moments and exact distances used as the test oracle.
struct GroundTruthModel {
  LatentTree tree;
  int root = -1;  // hidden root used for ancestral sampling / orientation
  ObservationFamily family = ObservationFamily::categorical;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  int observed_count() const { return tree.observed_count(); }
  int hidden_dim() const { return tree.hidden_dim(); }
};

/// Draws an identifiable linear latent tree model: observed nodes are leaves,
/// every hidden node has degree >= 3, all conditional-mean matrices meet the
/// conditioning floor, per-edge distances stay inside the configured band,
/// and each hidden node's states are labeled in descending prior order.
/// Deterministic per seed.
GroundTruthModel random_latent_tree(int p, int k, const std::vector<int>& dims,
                                    const GeneratorOptions& opt,
                                    std::uint64_t seed);

/// Convenience overload with uniform observed dimension.
GroundTruthModel random_latent_tree(int p, int k, int dim,
                                    const GeneratorOptions& opt,
                                    std::uint64_t seed);

/// Marginal distribution/mean data for an observed node (E[x] = A pi_parent).
Vector observed_mean(const GroundTruthModel& model, int v);

/// Relabels the states of every hidden node so priors are strictly
/// descending; transitions touching the node are permuted consistently.
void canonicalize_hidden_labels(LatentTree& tree);

}  // namespace ltm
