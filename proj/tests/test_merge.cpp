#include <doctest.h>

#include <random>
#include <set>

#include "ltm/assignment.hpp"
#include "ltm/eval.hpp"
#include "ltm/exact.hpp"
#include "ltm/merge.hpp"
#include "ltm/model.hpp"
#include "ltm/pipeline.hpp"

using namespace ltm;

namespace {

Adjacency adjacency_of(std::initializer_list<std::pair<int, int>> edges) {
  Adjacency adj;
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

}  // namespace

TEST_CASE("union_paths: conflicting leader paths concatenate") {
  // Adj_3: v3 - h1 - v5 (plus extra leaves), Adj_5: v3 - h3 - h2 - v5
  auto adj_i = adjacency_of({{3, 101}, {101, 5}, {101, 1}, {101, 2}});
  auto adj_j = adjacency_of({{3, 103}, {103, 102}, {102, 5}, {103, 4}});
  auto merged = union_paths(adj_i, adj_j, 3, 5);
  CHECK(merged == std::vector<int>{3, 101, 103, 102, 5});
}

TEST_CASE("union_paths: direct edges collapse") {
  auto adj_i = adjacency_of({{3, 5}, {3, 1}});
  auto adj_j = adjacency_of({{3, 5}, {5, 4}});
  CHECK(union_paths(adj_i, adj_j, 3, 5) == std::vector<int>{3, 5});

  auto adj_k = adjacency_of({{3, 107}, {107, 5}, {107, 2}});
  CHECK(union_paths(adj_i, adj_k, 3, 5) == std::vector<int>{3, 107, 5});
}

TEST_CASE("union_paths: missing leader is a contract violation") {
  auto adj_i = adjacency_of({{3, 1}, {1, 2}});
  auto adj_j = adjacency_of({{3, 5}});
  CHECK_THROWS_AS(union_paths(adj_i, adj_j, 3, 5), invalid_argument_error);
}

TEST_CASE("merge_all: single group is the identity merge") {
  GeneratorOptions o;
  o.topology = Topology::balanced;
  auto m = random_latent_tree(4, 2, 3, o, 2);
  ModelMoments src(m);
  auto res = all_pairs_distances(src, 2);
  auto mst = build_mst(res.d);
  auto groups = extract_groups(mst);
  REQUIRE(groups.size() == 1);
  LrgOptions lopt;
  lopt.epsilon = 1e-7;
  std::vector<LocalSubtree> subs{
      local_recursive_grouping(groups[0], res.d, src, 2, lopt)};
  auto merged = merge_all(subs, mst, src, 2);
  CHECK(merged.tree.hidden_count() == subs[0].tree.hidden_count());
  CHECK(merged.tree.is_connected_tree());
}

TEST_CASE("merge_all: exact pipeline recovers structure over random models") {
  GeneratorOptions o;
  RunConfig cfg;
  cfg.epsilon = 1e-7;
  for (int seed = 0; seed < 30; ++seed) {
    auto m = random_latent_tree(8 + seed % 6, 2, 3, o, 500 + seed);
    ModelMoments src(m);
    auto out = learn(src, cfg);
    CAPTURE(seed);
    CHECK(robinson_foulds(out.tree, m.tree) == 0.0);
    CHECK(out.tree.hidden_count() == m.tree.hidden_count());
  }
}

TEST_CASE("merge plan: leader edges processed exactly once, deterministic") {
  GeneratorOptions o;
  auto m = random_latent_tree(12, 2, 3, o, 31);
  ModelMoments src(m);
  auto res = all_pairs_distances(src, 2);
  auto mst = build_mst(res.d);
  auto plan = make_merge_plan(mst);
  std::set<std::pair<int, int>> seen;
  int internal = 0;
  for (int v = 0; v < mst.p; ++v)
    if (mst.is_internal(v)) ++internal;
  for (auto [a, b] : plan.edges) {
    CHECK(mst.is_internal(a));
    CHECK(mst.is_internal(b));
    CHECK(seen.insert({std::min(a, b), std::max(a, b)}).second);
  }
  CHECK(static_cast<int>(plan.edges.size()) == internal - 1);
  auto plan2 = make_merge_plan(mst);
  CHECK(plan.edges == plan2.edges);
}

TEST_CASE("match_columns: recovers injected permutations") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix ref(5, 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) ref(i, j) = normal(rng);
  std::vector<int> inject{2, 0, 1};
  Matrix est(5, 3);
  for (int j = 0; j < 3; ++j) est.col(j) = ref.col(inject[j]);
  // est.col(j) = ref.col(inject[j]): matching must find est column for each ref
  ColumnMatch m = match_columns(ref, est);
  for (int i = 0; i < 3; ++i) CHECK(inject[m.perm[i]] == i);
  CHECK(!m.ambiguous);
}

TEST_CASE("match_columns: flags ambiguity on duplicate columns") {
  Matrix ref(3, 2);
  ref << 1, 1, 0, 0, 0, 0;
  ColumnMatch m = match_columns(ref, ref);
  CHECK(m.ambiguous);
  CHECK(m.perm == std::vector<int>{0, 1});  // lexicographic tie-break
}

TEST_CASE("align_in_group: inverts an injected permutation on a second record") {
  GeneratorOptions o;
  o.topology = Topology::balanced;
  auto m = random_latent_tree(4, 2, 3, o, 41);
  ModelMoments src(m);
  auto res = all_pairs_distances(src, 2);
  auto mst = build_mst(res.d);
  auto groups = extract_groups(mst);
  LrgOptions lopt;
  lopt.epsilon = 1e-7;
  auto sub = local_recursive_grouping(groups[0], res.d, src, 2, lopt);
  REQUIRE(sub.triplets.size() == 1);

  // duplicate the defining record with permuted labels
  TripletRecord extra = sub.triplets[0];
  const std::vector<int> inject{1, 0};
  TripletParams& p = extra.params;
  TripletParams orig = sub.triplets[0].params;
  for (int i = 0; i < 2; ++i) {
    p.pi(i) = orig.pi(inject[i]);
    p.lambda(i) = orig.lambda(inject[i]);
    p.a_a.col(i) = orig.a_a.col(inject[i]);
    p.a_b.col(i) = orig.a_b.col(inject[i]);
    p.a_c.col(i) = orig.a_c.col(inject[i]);
  }
  sub.triplets.push_back(extra);
  auto perms = align_in_group(sub, sub.leader_local);
  // after alignment the two records agree again: the injection was inverted
  CHECK((sub.triplets[1].params.a_a - orig.a_a).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sub.triplets[1].params.pi - orig.pi).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(perms.at(sub.triplets[0].hidden) ==
        invert_permutation(inject));
}

TEST_CASE("align_in_group: identity when records are already consistent") {
  GeneratorOptions o;
  auto m = random_latent_tree(6, 2, 3, o, 43);
  ModelMoments src(m);
  auto res = all_pairs_distances(src, 2);
  auto mst = build_mst(res.d);
  LrgOptions lopt;
  lopt.epsilon = 1e-7;
  for (const auto& g : extract_groups(mst)) {
    auto sub = local_recursive_grouping(g, res.d, src, 2, lopt);
    auto perms = align_in_group(sub, sub.leader_local);
    for (const auto& [h, perm] : perms)
      for (std::size_t i = 0; i < perm.size(); ++i)
        CHECK(perm[i] == static_cast<int>(i));
  }
}

TEST_CASE("align_out_group: identity for aligned groups") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix d_mat(4, 2), a1(4, 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) {
      d_mat(i, j) = normal(rng);
      a1(i, j) = normal(rng);
    }
  auto res = align_out_group(d_mat, d_mat, a1, a1);
  CHECK(res.perm == std::vector<int>{0, 1});
  CHECK(res.gap < 1e-9);
  CHECK(!res.low_confidence);
}

TEST_CASE("align_out_group: recovers injected swaps and cycles") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k : {2, 3}) {
    Matrix d_mat(5, k), a1(5, k);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < k; ++j) {
        d_mat(i, j) = normal(rng);
        a1(i, j) = normal(rng);
      }
    std::vector<int> inject(k);
    for (int i = 0; i < k; ++i) inject[i] = (i + 1) % k;  // cycle
    Matrix d_perm(5, k);
    for (int j = 0; j < k; ++j) d_perm.col(j) = d_mat.col(inject[j]);
    // the fresh triplet sees the canonical D; the group stores D permuted
    auto res = align_out_group(d_mat, d_perm, a1, a1);
    CHECK(res.gap < 1e-9);
    // applying the result undoes the injection exactly
    Matrix restored(5, k);
    for (int j = 0; j < k; ++j) restored.col(j) = d_perm.col(res.perm[j]);
    CHECK((restored - d_mat).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(res.perm == invert_permutation(inject));
  }
}

TEST_CASE("apply_hidden_permutation: consistent relabeling") {
  GeneratorOptions o;
  o.topology = Topology::balanced;
  auto m = random_latent_tree(4, 2, 3, o, 51);
  Matrix before = exact_pair_moment(m, 0, 1);
  GroundTruthModel relabeled = m;
  apply_hidden_permutation(relabeled.tree, 4, {1, 0});
  // distribution unchanged
  Matrix after = exact_pair_moment(relabeled, 0, 1);
  CHECK((before - after).cwiseAbs().maxCoeff() < 1e-12);
  // prior actually permuted
  CHECK((*relabeled.tree.prior(4))(0) == (*m.tree.prior(4))(1));
}

TEST_CASE("finalize: exact parameters up to one global permutation") {
  GeneratorOptions o;
  RunConfig cfg;
  cfg.epsilon = 1e-7;
  for (int seed = 0; seed < 10; ++seed) {
    auto m = random_latent_tree(9, 2, 3, o, 600 + seed);
    ModelMoments src(m);
    auto out = learn(src, cfg);
    REQUIRE(robinson_foulds(out.tree, m.tree) == 0.0);
    auto err = parameter_error(out.tree, m.tree);
    CAPTURE(seed);
    CHECK(err.max_column_l2 < 1e-6);
    CHECK(err.prior_linf < 1e-6);
  }
}

TEST_CASE("finalize: duplicate estimates resolved by residual with a warning") {
  GeneratorOptions o;
  o.topology = Topology::balanced;
  auto m = random_latent_tree(4, 2, 3, o, 61);
  ModelMoments src(m);
  auto res = all_pairs_distances(src, 2);
  auto mst = build_mst(res.d);
  auto groups = extract_groups(mst);
  LrgOptions lopt;
  lopt.epsilon = 1e-7;
  std::vector<LocalSubtree> subs{
      local_recursive_grouping(groups[0], res.d, src, 2, lopt)};
  auto merged = merge_all(subs, mst, src, 2);

  // second, conflicting estimate for one observed-child edge
  auto key = std::make_pair(0, 4);
  REQUIRE(merged.edge_candidates.count(key));
  EdgeParamCandidate bad;
  bad.a = merged.edge_candidates[key].front().a;
  bad.a(0, 0) += 0.5;
  bad.residual = 1.0;  // worse than the defining estimate
  merged.edge_candidates[key].push_back(bad);

  auto tree = finalize_parameters(merged, src, 2);
  CHECK((*tree.transition(0, 4) - merged.edge_candidates[key].front().a)
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  bool warned = false;
  for (const auto& w : merged.warnings)
    warned |= w.find("duplicate estimates disagree") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("finalize: consistent duplicates accepted silently") {
  GeneratorOptions o;
  o.topology = Topology::balanced;
  auto m = random_latent_tree(4, 2, 3, o, 62);
  ModelMoments src(m);
  auto res = all_pairs_distances(src, 2);
  auto mst = build_mst(res.d);
  auto groups = extract_groups(mst);
  LrgOptions lopt;
  lopt.epsilon = 1e-7;
  std::vector<LocalSubtree> subs{
      local_recursive_grouping(groups[0], res.d, src, 2, lopt)};
  auto merged = merge_all(subs, mst, src, 2);
  auto key = std::make_pair(0, 4);
  REQUIRE(merged.edge_candidates.count(key));
  EdgeParamCandidate dup = merged.edge_candidates[key].front();
  dup.residual += 0.1;
  merged.edge_candidates[key].push_back(dup);
  finalize_parameters(merged, src, 2);
  CHECK(merged.warnings.empty());
}
