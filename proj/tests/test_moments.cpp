#include <doctest.h>

#include "ltm/exact.hpp"
#include "ltm/model.hpp"
#include "ltm/moments.hpp"
#include "ltm/sampling.hpp"

using namespace ltm;

TEST_CASE("pairwise_moment: single-sample outer product") {
  auto s = SampleSet::dense({2, 2}, 1);
  s.dense_var(0)(0, 0) = 1.0;  // y_a = [1,0]
  s.dense_var(1)(1, 0) = 1.0;  // y_b = [0,1]
  Matrix m = pairwise_moment(s, 0, 1).m;
  CHECK(m(0, 1) == 1.0);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(1, 0) == 0.0);
  CHECK(m(1, 1) == 0.0);
}

TEST_CASE("pairwise_moment: transpose symmetry and N=0 error") {
  GeneratorOptions o;
  auto model = random_latent_tree(4, 2, 3, o, 2);
  auto s = sample_model(model, 2000, 5);
  Matrix ab = pairwise_moment(s, 0, 1).m;
  Matrix ba = pairwise_moment(s, 1, 0).m;
  CHECK((ab - ba.transpose()).cwiseAbs().maxCoeff() == 0.0);

  auto empty = sample_model(model, 0, 5);
  CHECK_THROWS_AS(pairwise_moment(empty, 0, 1), invalid_argument_error);
}

TEST_CASE("pairwise_moment: self moment symmetric PSD") {
  GeneratorOptions o;
  auto model = random_latent_tree(4, 2, 2, o, 3);
  auto s = sample_model(model, 3000, 6);
  Matrix m = pairwise_moment(s, 2, 2).m;
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  CHECK(eig.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("pairwise_moment: matches oracle at N=1e5") {
  GeneratorOptions o;
  o.topology = Topology::balanced;
  auto model = random_latent_tree(3, 2, 3, o, 11);
  auto s = sample_model(model, 100000, 1);
  Matrix emp = pairwise_moment(s, 0, 2).m;
  Matrix ex = exact_pair_moment(model, 0, 2);
  CHECK((emp - ex).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("pairwise_moment: sparse and dense storage agree") {
  GeneratorOptions o;
  auto model = random_latent_tree(4, 2, 3, o, 8);
  auto sp = sample_model(model, 5000, 9);  // categorical -> sparse
  CHECK(sp.is_sparse());
  auto dense = SampleSet::dense({3, 3, 3, 3}, 5000);
  for (int v = 0; v < 4; ++v) dense.dense_var(v) = sp.to_dense(v);
  for (auto [a, b] : {std::pair{0, 1}, {2, 3}}) {
    Matrix m1 = pairwise_moment(sp, a, b).m;
    Matrix m2 = pairwise_moment(dense, a, b).m;
    CHECK((m1 - m2).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("triplet_moment: one-hot co-occurrence frequencies sum to 1") {
  GeneratorOptions o;
  auto model = random_latent_tree(3, 2, 2, o, 4);
  auto s = sample_model(model, 4000, 2);
  Tensor3 t = triplet_moment(s, 0, 1, 2).t;
  double sum = 0.0;
  double min_entry = 1.0;
  for (int i = 0; i < t.dim(0); ++i)
    for (int j = 0; j < t.dim(1); ++j)
      for (int l = 0; l < t.dim(2); ++l) {
        sum += t(i, j, l);
        min_entry = std::min(min_entry, t(i, j, l));
      }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(min_entry >= 0.0);
}

TEST_CASE("triplet_moment: permuting nodes permutes the tensor") {
  GeneratorOptions o;
  auto model = random_latent_tree(3, 2, 3, o, 6);
  auto s = sample_model(model, 2000, 3);
  Tensor3 abc = triplet_moment(s, 0, 1, 2).t;
  Tensor3 cab = triplet_moment(s, 2, 0, 1).t;
  double max_diff = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l)
        max_diff = std::max(max_diff, std::abs(abc(i, j, l) - cab(l, i, j)));
  CHECK(max_diff == 0.0);
}

TEST_CASE("triplet_moment: oracle agreement at N=1e5") {
  GeneratorOptions o;
  o.topology = Topology::balanced;
  auto model = random_latent_tree(3, 2, 2, o, 13);
  auto s = sample_model(model, 100000, 4);
  Tensor3 emp = triplet_moment(s, 0, 1, 2).t;
  Tensor3 ex = exact_triple_moment(model, 0, 1, 2);
  emp -= ex;
  CHECK(emp.max_abs() < 1e-2);
}

TEST_CASE("triplet_moment: rejects duplicates and empty sets") {
  GeneratorOptions o;
  auto model = random_latent_tree(3, 2, 2, o, 14);
  auto s = sample_model(model, 100, 5);
  CHECK_THROWS_AS(triplet_moment(s, 0, 0, 1), invalid_argument_error);
  auto empty = sample_model(model, 0, 5);
  CHECK_THROWS_AS(triplet_moment(empty, 0, 1, 2), invalid_argument_error);
}

TEST_CASE("sample validation flags all-zero coordinates") {
  auto s = SampleSet::dense({2, 2}, 10);
  s.dense_var(0).setOnes();
  s.dense_var(1).row(0).setOnes();  // row 1 of var 1 stays zero
  auto issues = s.validate();
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].find("variable 1") != std::string::npos);
}
