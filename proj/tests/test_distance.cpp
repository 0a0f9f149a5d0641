#include <doctest.h>

#include <cmath>

#include "ltm/distance.hpp"
#include "ltm/exact.hpp"
#include "ltm/model.hpp"
#include "ltm/sampling.hpp"

using namespace ltm;

TEST_CASE("info_distance: scalar correlation 0.5 gives ln 2") {
  Matrix ab(1, 1), aa(1, 1), bb(1, 1);
  ab << 0.5;
  aa << 1.0;
  bb << 1.0;
  CHECK(info_distance(ab, aa, bb, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("info_distance: self distance is zero for full-rank k=d") {
  GeneratorOptions o;
  auto m = random_latent_tree(4, 2, 2, o, 3);
  Matrix self = exact_pair_moment(m, 1, 1);
  CHECK(std::abs(info_distance(self, self, self, 2)) < 1e-12);
}

TEST_CASE("info_distance: +inf below the singularity floor") {
  Matrix ab = Matrix::Zero(2, 2);
  ab(0, 0) = 1.0;  // rank 1
  Matrix self = Matrix::Identity(2, 2);
  CHECK(info_distance(ab, self, self, 2) == kInfDistance);
}

TEST_CASE("info_distance: rejects non-finite input") {
  Matrix bad = Matrix::Constant(2, 2, std::nan(""));
  Matrix self = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(info_distance(bad, self, self, 2), invalid_argument_error);
}

TEST_CASE("info_distance: chain additivity through a hidden node") {
  GeneratorOptions o;
  auto m = random_latent_tree(6, 2, 4, o, 7);
  auto d = exact_distances(m);
  // leaf - parent-hidden - leaf triples
  int a = 0;
  int h = m.tree.neighbors(a).front();
  for (int b = 1; b < 6; ++b) {
    auto path = m.tree.path(a, b);
    if (path.size() < 3) continue;
    CHECK(std::abs(d(a, b) - d(a, h) - d(h, b)) < 1e-9);
  }
}

TEST_CASE("all_pairs_distances: matches exact distances on analytic moments") {
  GeneratorOptions o;
  auto m = random_latent_tree(7, 2, 3, o, 11);
  ModelMoments src(m);
  auto res = all_pairs_distances(src, 2);
  auto ex = exact_distances(m);
  for (int a = 0; a < 7; ++a)
    for (int b = a + 1; b < 7; ++b)
      CHECK(std::abs(res.d(a, b) - ex(a, b)) < 1e-9);
  CHECK(res.infinite_pairs == 0);
}

TEST_CASE("all_pairs_distances: p=3 shape and symmetry") {
  GeneratorOptions o;
  o.topology = Topology::balanced;
  auto m = random_latent_tree(3, 2, 2, o, 13);
  ModelMoments src(m);
  auto res = all_pairs_distances(src, 2);
  CHECK(res.d.size() == 3);
  for (int a = 0; a < 3; ++a) {
    CHECK(res.d(a, a) == 0.0);
    for (int b = 0; b < 3; ++b) CHECK(res.d(a, b) == res.d(b, a));
  }
}

TEST_CASE("all_pairs_distances: identical across worker counts") {
  GeneratorOptions o;
  auto m = random_latent_tree(10, 2, 3, o, 17);
  auto samples = sample_model(m, 5000, 3);
  SampleMoments src(samples);
  AllPairsOptions opt1, opt8;
  opt1.threads = 1;
  opt8.threads = 8;
  auto r1 = all_pairs_distances(src, 2, opt1);
  auto r8 = all_pairs_distances(src, 2, opt8);
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b)
      CHECK(r1.d(a, b) == r8.d(a, b));  // bitwise
}

TEST_CASE("all_pairs_distances: randomized mode agrees with exact mode") {
  GeneratorOptions o;
  auto m = random_latent_tree(8, 2, 4, o, 19);
  ModelMoments src(m);
  AllPairsOptions ropt;
  ropt.svd_mode = SvdMode::randomized;
  ropt.seed = 5;
  auto exact = all_pairs_distances(src, 2);
  auto rnd = all_pairs_distances(src, 2, ropt);
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b < 8; ++b)
      CHECK(std::abs(exact.d(a, b) - rnd.d(a, b)) < 1e-6);
}

namespace {

/// Moment source with one decorrelated pair (rank-deficient cross moment).
class DegeneratePair final : public MomentSource {
 public:
  int observed_count() const override { return 3; }
  int dim(int) const override { return 2; }
  Vector mean(int) const override { return Vector::Constant(2, 0.5); }
  Matrix pair(int a, int b) const override {
    if (a == b) return Matrix::Identity(2, 2);
    if ((a == 0 && b == 1) || (a == 1 && b == 0)) {
      Matrix m = Matrix::Zero(2, 2);
      m(0, 0) = 0.5;  // rank 1: pair (0,1) is degenerate
      return m;
    }
    Matrix m = Matrix::Identity(2, 2);
    return 0.5 * m;
  }
  Tensor3 triple(int, int, int) const override { return Tensor3(2, 2, 2); }
};

}  // namespace

TEST_CASE("all_pairs_distances: +inf entries are propagated and counted") {
  DegeneratePair src;
  auto res = all_pairs_distances(src, 2);
  CHECK(res.infinite_pairs == 1);
  CHECK(res.d(0, 1) == kInfDistance);
  CHECK(res.d.infinite_pairs() == 1);
}

TEST_CASE("distance matrix: append grows symmetrically") {
  DistanceMatrix d(2);
  d.set(0, 1, 1.5);
  int h = d.append_node();
  CHECK(h == 2);
  CHECK(d.size() == 3);
  CHECK(d(0, 1) == 1.5);
  d.set(h, 0, 2.5);
  CHECK(d(0, h) == 2.5);
}
