#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>

#include "ltm/distance.hpp"
#include "ltm/model.hpp"
#include "ltm/mst.hpp"
#include "ltm/sample_set.hpp"
#include "ltm/tree.hpp"

namespace ltm {

/// Model JSON schema:
/// {"k":int, "nodes":[{"id":int,"kind":"obs|hid","dim":int}],
///  "edges":[[a,b]], "params":{"child-parent": row-major matrix},
///  "priors":{"hidden": [..]}, "meta":{...}}
/// Doubles are written with shortest round-trip precision, so write/read is
/// bit stable.
nlohmann::json model_to_json(const LatentTree& tree,
                             const nlohmann::json& meta);
LatentTree model_from_json(const nlohmann::json& j);

nlohmann::json ground_truth_meta(const GroundTruthModel& model);
GroundTruthModel ground_truth_from_json(const nlohmann::json& j);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

/// Samples file: first line is a JSON header
/// {"format":"sparse"|"dense","p":..,"dims":[..],"n":..,"meta":{...}},
/// followed by CSV rows. Sparse rows are `sample_id,var_id,coord,value`
/// (or `sample_id,raw_feature_id,value` when a group map applies); dense rows
/// are `sample_id` followed by every coordinate of every variable in order.
void write_samples(const std::string& path, const SampleSet& samples,
                   const nlohmann::json& meta);

/// Optional feature grouping: maps raw feature ids onto (variable, coord).
struct GroupMap {
  std::vector<int> variable;  // indexed by raw feature id
  std::vector<int> coord;
  int p = 0;
  std::vector<int> dims;
};
GroupMap read_group_map(const std::string& path);

SampleSet read_samples(const std::string& path,
                       const GroupMap* group_map = nullptr);

std::string tree_to_dot(const LatentTree& tree,
                        const std::map<std::pair<int, int>, double>* lengths,
                        const std::string& comment);
std::string tree_to_newick(const LatentTree& tree, const std::string& comment);

std::string distances_to_csv(const DistanceMatrix& d);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace ltm
