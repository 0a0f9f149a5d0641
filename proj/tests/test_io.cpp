#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "ltm/exact.hpp"
#include "ltm/io.hpp"
#include "ltm/model.hpp"
#include "ltm/moments.hpp"
#include "ltm/sampling.hpp"

using namespace ltm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ltm_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int counter;
};
int TempDir::counter = 0;

}  // namespace

TEST_CASE("model json: write/read/write is bit stable") {
  TempDir tmp;
  GeneratorOptions o;
  auto m = random_latent_tree(6, 2, 3, o, 5);
  auto j1 = model_to_json(m.tree, ground_truth_meta(m));
  write_json_file(tmp.file("m.json"), j1);
  auto j2 = read_json_file(tmp.file("m.json"));
  CHECK(j1.dump() == j2.dump());
  write_json_file(tmp.file("m2.json"), model_to_json(model_from_json(j2), j2["meta"]));
  auto j3 = read_json_file(tmp.file("m2.json"));
  CHECK(j1.dump() == j3.dump());
}

TEST_CASE("samples: sparse round trip preserves the data") {
  TempDir tmp;
  GeneratorOptions o;
  auto m = random_latent_tree(4, 2, 3, o, 6);
  auto s = sample_model(m, 300, 9);
  REQUIRE(s.is_sparse());
  write_samples(tmp.file("s.csv"), s, {});
  auto r = read_samples(tmp.file("s.csv"));
  REQUIRE(r.is_sparse());
  REQUIRE(r.sample_count() == 300);
  for (int v = 0; v < 4; ++v)
    CHECK((r.to_dense(v) - s.to_dense(v)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("samples: dense round trip preserves the data") {
  TempDir tmp;
  GeneratorOptions o;
  o.family = ObservationFamily::gaussian;
  auto m = random_latent_tree(3, 2, 2, o, 7);
  auto s = sample_model(m, 200, 4);
  REQUIRE(!s.is_sparse());
  write_samples(tmp.file("s.csv"), s, {});
  auto r = read_samples(tmp.file("s.csv"));
  REQUIRE(!r.is_sparse());
  for (int v = 0; v < 3; ++v)
    CHECK((r.dense_var(v) - s.dense_var(v)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("samples: malformed rows carry line numbers") {
  TempDir tmp;
  {
    std::ofstream out(tmp.file("bad.csv"));
    out << R"({"format":"sparse","p":2,"dims":[2,2],"n":5})" << "\n";
    out << "0,0,0,1\n";
    out << "oops\n";
  }
  try {
    read_samples(tmp.file("bad.csv"));
    FAIL("expected io_error");
  } catch (const io_error& e) {
    CHECK(e.line == 3);
  }
}

TEST_CASE("samples: out-of-range coordinates are rejected") {
  TempDir tmp;
  {
    std::ofstream out(tmp.file("bad.csv"));
    out << R"({"format":"sparse","p":2,"dims":[2,2],"n":5})" << "\n";
    out << "0,1,7,1\n";
  }
  CHECK_THROWS_AS(read_samples(tmp.file("bad.csv")), io_error);
}

TEST_CASE("group map: raw features fold into grouped variables") {
  TempDir tmp;
  {
    std::ofstream out(tmp.file("map.csv"));
    out << "0,0,0\n1,0,1\n2,1,0\n3,1,1\n4,1,2\n";
  }
  auto gm = read_group_map(tmp.file("map.csv"));
  CHECK(gm.p == 2);
  CHECK(gm.dims == std::vector<int>{2, 3});
  {
    std::ofstream out(tmp.file("s.csv"));
    out << R"({"format":"sparse","n":2})" << "\n";
    out << "0,0,1\n";   // sample 0: raw 0 -> var 0 coord 0
    out << "0,4,1\n";   // sample 0: raw 4 -> var 1 coord 2
    out << "1,1,1\n";   // sample 1: raw 1 -> var 0 coord 1
  }
  auto s = read_samples(tmp.file("s.csv"), &gm);
  CHECK(s.variable_count() == 2);
  CHECK(s.to_dense(0)(0, 0) == 1.0);
  CHECK(s.to_dense(1)(2, 0) == 1.0);
  CHECK(s.to_dense(0)(1, 1) == 1.0);
}

TEST_CASE("newick: one line, balanced parentheses, all leaves named") {
  GeneratorOptions o;
  auto m = random_latent_tree(6, 2, 2, o, 8);
  std::string nw = tree_to_newick(m.tree, "");
  int depth = 0;
  for (char c : nw) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    CHECK(depth >= 0);
  }
  CHECK(depth == 0);
  for (int v = 0; v < 6; ++v)
    CHECK(nw.find("v" + std::to_string(v)) != std::string::npos);
  CHECK(nw.find(';') != std::string::npos);
}

TEST_CASE("dot: hidden and observed nodes are rendered") {
  GeneratorOptions o;
  auto m = random_latent_tree(4, 2, 2, o, 9);
  std::string dot = tree_to_dot(m.tree, nullptr, "test");
  CHECK(dot.find("v0 [shape=box]") != std::string::npos);
  CHECK(dot.find("h4 [shape=ellipse") != std::string::npos);
  CHECK(dot.find("// test") != std::string::npos);
}

TEST_CASE("distance csv: inf literal for degenerate pairs") {
  DistanceMatrix d(3);
  d.set(0, 1, 1.25);
  d.set(0, 2, kInfDistance);
  d.set(1, 2, 0.5);
  std::string csv = distances_to_csv(d);
  CHECK(csv.find("inf") != std::string::npos);
  CHECK(csv.find("1.25") != std::string::npos);
}
