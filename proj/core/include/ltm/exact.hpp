#pragma once

#include <utility>
#include <vector>

#include "ltm/distance.hpp"
#include "ltm/model.hpp"
#include "ltm/moments.hpp"
#include "ltm/tensor3.hpp"

namespace ltm {

/// Analytic population moments of a fully parameterized model, computed by
/// pushing priors and transitions along tree paths (no sampling). Queries may
/// name observed or hidden nodes.
Matrix exact_pair_moment(const GroundTruthModel& model, int a, int b);
Tensor3 exact_triple_moment(const GroundTruthModel& model, int a, int b, int c);
Vector exact_mean(const GroundTruthModel& model, int v);

/// Information distances between every pair of nodes (observed and hidden)
/// from exact moments.
DistanceMatrix exact_distances(const GroundTruthModel& model,
                               const InfoDistanceOptions& opt = {});

/// MomentSource view over the observed variables of an exact model.
class ModelMoments final : public MomentSource {
 public:
  explicit ModelMoments(const GroundTruthModel& model) : model_(model) {}
  int observed_count() const override { return model_.observed_count(); }
  int dim(int v) const override { return model_.tree.dim(v); }
  Vector mean(int a) const override { return exact_mean(model_, a); }
  Matrix pair(int a, int b) const override {
    return exact_pair_moment(model_, a, b);
  }
  Tensor3 triple(int a, int b, int c) const override {
    return exact_triple_moment(model_, a, b, c);
  }

 private:
  const GroundTruthModel& model_;
};

/// Surrogate of each hidden node: the observed node at minimum information
/// distance. Indexed by hidden offset (node p+i -> entry i).
std::vector<int> surrogate_map(const GroundTruthModel& model,
                               const DistanceMatrix& exact);

/// Edges of the tree after contracting every hidden node onto its surrogate:
/// the graph the MST over observed nodes must equal under exact moments.
std::vector<std::pair<int, int>> surrogate_contraction(
    const GroundTruthModel& model, const DistanceMatrix& exact);

}  // namespace ltm
