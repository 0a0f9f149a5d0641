#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "ltm/distance.hpp"
#include "ltm/lrg.hpp"
#include "ltm/merge.hpp"
#include "ltm/moments.hpp"
#include "ltm/mst.hpp"

namespace ltm {

/// Everything a learning run depends on; serialized into every output's
/// metadata block.
struct RunConfig {
  int k = 2;
  SvdMode svd_mode = SvdMode::exact;
  double alpha = 3.0;                // randomized sketch width factor
  std::optional<double> epsilon;     // grouping tolerance; auto when empty
  int tensor_restarts = 50;
  int tensor_iterations = 100;
  double tensor_tolerance = 1e-8;
  int threads = 0;                   // 0 = all available
  std::uint64_t seed = 0;
  ObservationFamily family = ObservationFamily::categorical;
  double noise_sigma = 0.2;
  HiddenDistanceMode hidden_dist = HiddenDistanceMode::metric;
  bool boruvka_mst = false;
  bool cross_group_align = true;
  double finalize_conflict_tol = 1e-6;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

struct StageTiming {
  double distances_s = 0.0;
  double mst_s = 0.0;
  double lrg_s = 0.0;
  double merge_s = 0.0;
  double finalize_s = 0.0;
};

struct LearnOutput {
  LatentTree tree;
  AllPairsResult distances;
  MstGraph mst;
  GroupStats stats;
  std::vector<LocalSubtree> subtrees;
  std::map<std::pair<int, int>, double> edge_length;
  StageTiming timing;
  std::vector<std::string> warnings;
  int cross_alignments_applied = 0;

  nlohmann::json report(const RunConfig& cfg) const;
};

/// Full pipeline: distances -> MST -> per-group LRG (parallel) -> merge and
/// alignment -> parameter finalization. Deterministic given the config,
/// independent of the worker count.
LearnOutput learn(const MomentSource& moments, const RunConfig& cfg,
                  const SampleSet* samples = nullptr);

}  // namespace ltm
