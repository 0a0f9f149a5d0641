#include <doctest.h>

#include <random>

#include "ltm/exact.hpp"
#include "ltm/model.hpp"
#include "ltm/mst.hpp"
#include "oracles.hpp"

using namespace ltm;

namespace {

DistanceMatrix from_values(int n, const std::vector<double>& upper) {
  DistanceMatrix d(n);
  std::size_t idx = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) d.set(a, b, upper[idx++]);
  return d;
}

DistanceMatrix random_distances(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  DistanceMatrix d(n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) d.set(a, b, unif(rng));
  return d;
}

}  // namespace

TEST_CASE("build_mst: three nodes pick the two cheapest edges") {
  auto d = from_values(3, {1.0, 2.0, 3.0});  // (0,1)=1 (0,2)=2 (1,2)=3
  auto mst = build_mst(d);
  REQUIRE(mst.edges.size() == 2);
  CHECK(mst.edges[0] == std::pair{0, 1});
  CHECK(mst.edges[1] == std::pair{0, 2});
}

TEST_CASE("build_mst: all-equal weights resolve to the star on node 0") {
  auto d = from_values(4, {1, 1, 1, 1, 1, 1});
  auto mst = build_mst(d);
  REQUIRE(mst.edges.size() == 3);
  for (int v = 1; v < 4; ++v) CHECK(mst.adj[0][v - 1] == v);
}

TEST_CASE("build_mst: weight equals the exhaustive minimum (p <= 7)") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 4 + static_cast<int>(rng() % 4);
    auto d = random_distances(p, rng);
    auto mst = build_mst(d);
    const double brute = oracle::mst_weight_exhaustive(d);
    CHECK(mst.total_weight() == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("build_mst: boruvka output is bitwise identical to prim") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int p = 4 + static_cast<int>(rng() % 8);
    auto d = random_distances(p, rng);
    if (trial % 3 == 0) d.set(0, 1, d(1, 2));  // inject ties
    MstOptions bopt;
    bopt.boruvka = true;
    auto a = build_mst(d);
    auto b = build_mst(d, bopt);
    CHECK(a.edges == b.edges);
  }
}

TEST_CASE("build_mst: disconnected graph raises with components") {
  DistanceMatrix d(4);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) d.set(a, b, kInfDistance);
  d.set(0, 1, 1.0);
  d.set(2, 3, 1.0);
  try {
    build_mst(d);
    FAIL("expected disconnected_error");
  } catch (const disconnected_error& e) {
    REQUIRE(e.components.size() == 2);
    CHECK(e.components[0] == std::vector<int>{0, 1});
    CHECK(e.components[1] == std::vector<int>{2, 3});
  }
}

TEST_CASE("build_mst: equals the surrogate contraction under exact moments") {
  GeneratorOptions o;
  for (int seed = 0; seed < 20; ++seed) {
    auto m = random_latent_tree(6 + seed % 5, 2, 3, o, 100 + seed);
    auto ex = exact_distances(m);
    DistanceMatrix obs(m.observed_count());
    for (int a = 0; a < m.observed_count(); ++a)
      for (int b = a + 1; b < m.observed_count(); ++b) obs.set(a, b, ex(a, b));
    auto mst = build_mst(obs);
    auto contraction = surrogate_contraction(m, ex);
    CAPTURE(seed);
    CHECK(mst.edges == contraction);
  }
}

TEST_CASE("extract_groups: path graph has one leader") {
  auto d = from_values(3, {1.0, 2.5, 1.0});  // path 0-1-2
  auto mst = build_mst(d);
  auto groups = extract_groups(mst);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].leader == 1);
  CHECK(groups[0].members == std::vector<int>{0, 1, 2});
}

TEST_CASE("extract_groups: star yields a single all-node group") {
  auto d = from_values(4, {1, 1, 1, 5, 5, 5});
  auto mst = build_mst(d);
  auto groups = extract_groups(mst);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].leader == 0);
  CHECK(groups[0].members.size() == 4);
}

TEST_CASE("extract_groups: adjacent leaders overlap in exactly the leaders") {
  std::mt19937_64 rng(3);
  GeneratorOptions o;
  for (int seed = 0; seed < 10; ++seed) {
    auto m = random_latent_tree(10, 2, 3, o, 200 + seed);
    auto ex = exact_distances(m);
    DistanceMatrix obs(10);
    for (int a = 0; a < 10; ++a)
      for (int b = a + 1; b < 10; ++b) obs.set(a, b, ex(a, b));
    auto mst = build_mst(obs);
    auto groups = extract_groups(mst);
    for (std::size_t i = 0; i < groups.size(); ++i)
      for (std::size_t j = i + 1; j < groups.size(); ++j) {
        const auto& gi = groups[i];
        const auto& gj = groups[j];
        std::vector<int> inter;
        std::set_intersection(gi.members.begin(), gi.members.end(),
                              gj.members.begin(), gj.members.end(),
                              std::back_inserter(inter));
        const bool adjacent =
            std::binary_search(mst.adj[gi.leader].begin(),
                               mst.adj[gi.leader].end(), gj.leader);
        if (adjacent) {
          CHECK(inter == std::vector<int>{std::min(gi.leader, gj.leader),
                                          std::max(gi.leader, gj.leader)});
        }
      }
  }
}

TEST_CASE("extract_groups: every MST edge lies in at least one group") {
  std::mt19937_64 rng(4);
  auto d = random_distances(9, rng);
  auto mst = build_mst(d);
  auto groups = extract_groups(mst);
  for (auto [a, b] : mst.edges) {
    bool covered = false;
    for (const auto& g : groups) {
      const bool has_a = std::binary_search(g.members.begin(), g.members.end(), a);
      const bool has_b = std::binary_search(g.members.begin(), g.members.end(), b);
      covered |= has_a && has_b;
    }
    CHECK(covered);
  }
}

TEST_CASE("group_stats: path and star extremes") {
  auto path = build_mst(from_values(3, {1.0, 2.5, 1.0}));
  CHECK(group_stats(path).gamma == 3);
  auto star = build_mst(from_values(5, {1, 1, 1, 1, 9, 9, 9, 9, 9, 9}));
  CHECK(group_stats(star).gamma == 5);
}

TEST_CASE("mst_to_dot: renders every edge with weights") {
  auto mst = build_mst(from_values(3, {1.0, 2.0, 3.0}));
  std::string dot = mst_to_dot(mst);
  CHECK(dot.find("v0 -- v1") != std::string::npos);
  CHECK(dot.find("v0 -- v2") != std::string::npos);
  CHECK(dot.find("label") != std::string::npos);
}
