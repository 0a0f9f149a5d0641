#include "ltm/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include <omp.h>
#include <nlohmann/json.hpp>

#include "ltm/io.hpp"

namespace ltm {

using nlohmann::json;

json RunConfig::to_json() const {
  json j;
  j["k"] = k;
  j["svd"] = svd_mode == SvdMode::exact ? "exact" : "randomized";
  j["alpha"] = alpha;
  if (epsilon)
    j["epsilon"] = *epsilon;
  else
    j["epsilon"] = "auto";
  j["restarts"] = tensor_restarts;
  j["iters"] = tensor_iterations;
  j["tol"] = tensor_tolerance;
  j["threads"] = threads;
  j["seed"] = seed;
  j["family"] = family == ObservationFamily::categorical ? "discrete" : "gaussian";
  j["noise_sigma"] = noise_sigma;
  switch (hidden_dist) {
    case HiddenDistanceMode::metric: j["hidden_dist"] = "metric"; break;
    case HiddenDistanceMode::moments: j["hidden_dist"] = "moments"; break;
    case HiddenDistanceMode::posterior: j["hidden_dist"] = "posterior"; break;
  }
  j["boruvka"] = boruvka_mst;
  j["cross_group_align"] = cross_group_align;
  j["version"] = version_string();
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  c.k = j.value("k", 2);
  c.svd_mode = j.value("svd", std::string("exact")) == "randomized"
                   ? SvdMode::randomized
                   : SvdMode::exact;
  c.alpha = j.value("alpha", 3.0);
  if (j.contains("epsilon") && j["epsilon"].is_number())
    c.epsilon = j["epsilon"].get<double>();
  c.tensor_restarts = j.value("restarts", 50);
  c.tensor_iterations = j.value("iters", 100);
  c.tensor_tolerance = j.value("tol", 1e-8);
  c.threads = j.value("threads", 0);
  c.seed = j.value("seed", std::uint64_t{0});
  c.family = j.value("family", std::string("discrete")) == "gaussian"
                 ? ObservationFamily::gaussian
                 : ObservationFamily::categorical;
  c.noise_sigma = j.value("noise_sigma", 0.2);
  const std::string hd = j.value("hidden_dist", std::string("metric"));
  c.hidden_dist = hd == "moments" ? HiddenDistanceMode::moments
                 : hd == "posterior" ? HiddenDistanceMode::posterior
                                     : HiddenDistanceMode::metric;
  c.boruvka_mst = j.value("boruvka", false);
  c.cross_group_align = j.value("cross_group_align", true);
  return c;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

LearnOutput learn(const MomentSource& moments, const RunConfig& cfg,
                  const SampleSet* samples) {
  LearnOutput out;
  const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();

  auto t0 = std::chrono::steady_clock::now();
  AllPairsOptions dopt;
  dopt.svd_mode = cfg.svd_mode;
  dopt.oversample = cfg.alpha;
  dopt.seed = cfg.seed;
  dopt.threads = threads;
  out.distances = all_pairs_distances(moments, cfg.k, dopt);
  out.timing.distances_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  MstOptions mopt;
  mopt.boruvka = cfg.boruvka_mst;
  mopt.threads = threads;
  out.mst = build_mst(out.distances.d, mopt);
  out.stats = group_stats(out.mst);
  auto groups = extract_groups(out.mst);
  out.timing.mst_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  LrgOptions lopt;
  lopt.epsilon = cfg.epsilon;
  lopt.tensor.restarts = cfg.tensor_restarts;
  lopt.tensor.iterations = cfg.tensor_iterations;
  lopt.tensor.tolerance = cfg.tensor_tolerance;
  lopt.hidden_dist = cfg.hidden_dist;
  lopt.seed = cfg.seed;
  lopt.family = cfg.family;
  lopt.noise_sigma = cfg.noise_sigma;
  lopt.samples = samples;

  out.subtrees.resize(groups.size());
  std::vector<std::string> lrg_errors(groups.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(groups.size()); ++i) {
    try {
      out.subtrees[i] =
          local_recursive_grouping(groups[i], out.distances.d, moments, cfg.k, lopt);
    } catch (const std::exception& e) {
      lrg_errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!lrg_errors[i].empty())
      throw convergence_error("group " + std::to_string(groups[i].leader) +
                                  ": " + lrg_errors[i],
                              {});
  }
  // in-group alignment (no-op when each hidden has a single decomposition)
  for (auto& sub : out.subtrees) align_in_group(sub, sub.leader_local);
  out.timing.lrg_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  MergedModel merged = merge_all(out.subtrees, out.mst, moments, cfg.k);
  out.timing.merge_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  FinalizeOptions fopt;
  fopt.conflict_tolerance = cfg.finalize_conflict_tol;
  out.tree = finalize_parameters(merged, moments, cfg.k, fopt);
  out.edge_length = merged.edge_length;

  // cross-group alignment correction against the reference group
  if (cfg.cross_group_align && out.subtrees.size() > 1 &&
      out.tree.hidden_count() > 0) {
    // reference group: leader with maximum MST degree, ties by min id
    int ref = -1;
    for (const auto& g : groups) {
      if (ref < 0 || out.mst.degree(g.leader) > out.mst.degree(ref)) ref = g.leader;
    }
    const LocalSubtree* ref_sub = nullptr;
    for (const auto& s : out.subtrees)
      if (s.leader_global() == ref) ref_sub = &s;

    auto pick_two = [&](const LocalSubtree& s, std::vector<int> avoid) {
      std::vector<int> picks;
      for (int gid : s.globals) {
        if (std::find(avoid.begin(), avoid.end(), gid) != avoid.end()) continue;
        picks.push_back(gid);
        if (picks.size() == 2) break;
      }
      return picks;
    };

    TensorOptions topt;
    topt.restarts = cfg.tensor_restarts;
    topt.iterations = cfg.tensor_iterations;
    topt.tolerance = cfg.tensor_tolerance;

    for (const auto& sub : out.subtrees) {
      if (&sub == ref_sub) continue;
      const int x3 = sub.leader_global();
      auto ref_picks = pick_two(*ref_sub, {ref, x3});
      auto oth_picks = pick_two(sub, {ref, x3});
      if (ref_picks.empty() || oth_picks.empty()) {
        out.warnings.push_back("cross-group alignment skipped for group " +
                               std::to_string(x3) + ": too few members");
        continue;
      }
      const int x1 = ref;
      const int x2 = ref_picks.front();
      const int x4 = oth_picks.front();
      int h1 = out.tree.meeting_node(x1, x2, x3);
      int h2 = out.tree.meeting_node(x3, x4, x1);
      if (!out.tree.is_hidden(h1) || !out.tree.is_hidden(h2)) continue;

      auto make_moments = [&](int a, int b, int c) {
        TripletMoments tm;
        tm.m_ab = moments.pair(a, b);
        tm.m_ac = moments.pair(a, c);
        tm.m_bc = moments.pair(b, c);
        tm.t_abc = moments.triple(a, b, c);
        tm.mean_a = moments.mean(a);
        tm.mean_b = moments.mean(b);
        tm.mean_c = moments.mean(c);
        return tm;
      };
      try {
        topt.seed = cfg.seed ^ (0x51ED270B3ULL * (x3 + 1));
        TripletParams trip_a = decompose_triplet(make_moments(x1, x2, x3), cfg.k, topt);
        topt.seed = cfg.seed ^ (0x9E3779B97ULL * (x3 + 1));
        TripletParams trip_b = decompose_triplet(make_moments(x3, x4, x1), cfg.k, topt);
        OutGroupAlignment res = align_out_group(
            trip_b.a_a, out.tree.path_mean_map(x3, h2), trip_a.a_a,
            out.tree.path_mean_map(x1, h1));
        bool identity = true;
        for (int i = 0; i < cfg.k; ++i) identity &= res.perm[i] == i;
        if (res.low_confidence) {
          out.warnings.push_back("cross-group alignment low confidence for group " +
                                 std::to_string(x3));
        } else if (!identity) {
          const int base = out.tree.observed_count();
          for (int h = base; h < out.tree.node_count(); ++h) {
            if (merged.hidden_owner[h - base] == x3)
              apply_hidden_permutation(out.tree, h, res.perm);
          }
          ++out.cross_alignments_applied;
        }
      } catch (const std::exception& e) {
        out.warnings.push_back("cross-group alignment failed for group " +
                               std::to_string(x3) + ": " + e.what());
      }
    }
  }
  out.timing.finalize_s = seconds_since(t0);

  for (const auto& w : merged.warnings) out.warnings.push_back(w);
  // hidden degree check on the learned structure (reported, not fatal)
  for (auto issue : out.tree.validate()) out.warnings.push_back("learned tree: " + issue);
  return out;
}

json LearnOutput::report(const RunConfig& cfg) const {
  json j;
  j["config"] = cfg.to_json();
  j["p"] = tree.observed_count();
  j["hidden_count"] = tree.hidden_count();
  j["gamma"] = stats.gamma;
  json hist = json::array();
  for (int c : stats.degree_histogram) hist.push_back(c);
  j["degree_histogram"] = std::move(hist);
  j["groups"] = subtrees.size();
  j["infinite_pairs"] = distances.infinite_pairs;
  j["negative_clamps"] = distances.negative_clamps;
  j["cross_alignments_applied"] = cross_alignments_applied;
  j["timing"] = {{"distances_s", timing.distances_s},
                 {"mst_s", timing.mst_s},
                 {"lrg_s", timing.lrg_s},
                 {"merge_s", timing.merge_s},
                 {"finalize_s", timing.finalize_s}};
  j["warnings"] = warnings;
  return j;
}

}  // namespace ltm
