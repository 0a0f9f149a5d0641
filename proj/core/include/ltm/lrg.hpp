#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ltm/distance.hpp"
#include "ltm/moments.hpp"
#include "ltm/mst.hpp"
#include "ltm/sample_set.hpp"
#include "ltm/tensor_decomp.hpp"
#include "ltm/tree.hpp"

namespace ltm {

/// Phi(a,b;c) = dist(a,c) - dist(b,c). Antisymmetric in (a,b); constant over
/// witnesses c exactly when a and b are siblings.
double phi(int a, int b, int c, const DistanceMatrix& d);

enum class PairRelation { a_leaf_of_b, b_leaf_of_a, siblings, unrelated };

/// Leaf/parent when Phi stays within eps of +/-dist(a,b) over all witnesses;
/// siblings when the Phi spread is within eps and every value is strictly
/// inside (-dist+eps, dist-eps); unrelated otherwise.
PairRelation classify_pair(int a, int b, const std::vector<int>& active,
                           const DistanceMatrix& d, double eps);

/// Appends a hidden parent for the sibling set to d and fills its distances:
/// to sibling v_i via 0.5*(dist(v_i,v_j) + witness-averaged Phi), to any other
/// node via the sibling-averaged difference. Small negative edge lengths are
/// clamped to 0; below -eps is a model violation.
int introduce_hidden(const std::vector<int>& siblings,
                     const std::vector<int>& witnesses, DistanceMatrix& d,
                     double eps);

enum class HiddenDistanceMode {
  metric,     // keep the recursive-grouping distance extension
  moments,    // refresh hidden rows from estimated parameters via the
              // information-distance formula
  posterior,  // categorical only: posterior pseudo-samples (needs SampleSet)
};

struct LrgOptions {
  std::optional<double> epsilon;  // auto: 0.2 * min in-group distance
  TensorOptions tensor;
  HiddenDistanceMode hidden_dist = HiddenDistanceMode::metric;
  std::uint64_t seed = 0;
  ObservationFamily family = ObservationFamily::categorical;
  double noise_sigma = 0.0;
  const SampleSet* samples = nullptr;  // posterior mode only
};

struct TripletRecord {
  int hidden = -1;             // local node id of the joint hidden
  std::array<int, 3> nodes{};  // local ids (a, b, witness c)
  bool witness_in_siblings = false;
  TripletParams params;
};

/// One group's latent sub-tree: local ids 0..g-1 are the sorted group members
/// (globals maps them back), hidden nodes appended in creation order. Edge
/// parameters live on the local tree; views give each node an observed
/// representative and the conditional-mean lift onto it.
struct LocalSubtree {
  int leader_local = -1;
  std::vector<int> globals;
  LatentTree tree;
  DistanceMatrix dist;
  std::map<std::pair<int, int>, double> edge_length;
  std::vector<TripletRecord> triplets;
  std::vector<std::string> hidden_provenance;  // per hidden, creation order
  std::vector<int> view_rep;                   // global observed id per node
  std::vector<Matrix> view_lift;               // E[x_rep | y_node]
  double epsilon_used = 0.0;

  int leader_global() const { return globals[leader_local]; }
  /// Debug dump (JSON) with introduced-hidden provenance.
  std::string to_json() const;
};

/// Local recursive grouping with parameter estimation over one MST group.
LocalSubtree local_recursive_grouping(const Group& group,
                                      const DistanceMatrix& global_d,
                                      const MomentSource& moments, int k,
                                      const LrgOptions& opt = {});

}  // namespace ltm
