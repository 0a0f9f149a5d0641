#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include <Eigen/Cholesky>
#include <nlohmann/json.hpp>

#include "ltm/common.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Cli {
  fs::path dir;
  Cli() {
    dir = fs::temp_directory_path() /
          ("ltm_cli_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~Cli() { fs::remove_all(dir); }

  int run(const std::string& args, std::string* stdout_text = nullptr) const {
    const std::string out_file = (dir / "stdout.txt").string();
    const std::string cmd = std::string(LTM_CLI_PATH) + " " + args + " > " +
                            out_file + " 2> " + (dir / "stderr.txt").string();
    int status = std::system(cmd.c_str());
    if (stdout_text) {
      std::ifstream in(out_file);
      std::stringstream ss;
      ss << in.rdbuf();
      *stdout_text = ss.str();
    }
    return WEXITSTATUS(status);
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }
  static int counter;
};
int Cli::counter = 0;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli gen: writes model and samples, deterministic per seed") {
  Cli cli;
  std::string out;
  int rc = cli.run("gen --p 8 --k 2 --dims 3 --seed 4 --n 500 --out " +
                       cli.path("a"),
                   &out);
  REQUIRE(rc == 0);
  auto summary = json::parse(out);
  CHECK(fs::exists(cli.path("a/model.json")));
  CHECK(fs::exists(cli.path("a/samples.csv")));
  CHECK(summary["p"] == 8);

  rc = cli.run("gen --p 8 --k 2 --dims 3 --seed 4 --n 500 --out " + cli.path("b"));
  REQUIRE(rc == 0);
  CHECK(slurp(cli.path("a/model.json")) == slurp(cli.path("b/model.json")));
  CHECK(slurp(cli.path("a/samples.csv")) == slurp(cli.path("b/samples.csv")));
}

TEST_CASE("cli gen: model only when --n is omitted") {
  Cli cli;
  REQUIRE(cli.run("gen --p 5 --k 2 --dims 2 --seed 1 --out " + cli.path("m")) == 0);
  CHECK(fs::exists(cli.path("m/model.json")));
  CHECK(!fs::exists(cli.path("m/samples.csv")));
  // metadata block embeds the config and version
  auto j = json::parse(slurp(cli.path("m/model.json")));
  CHECK(j["meta"]["config"].contains("seed"));
  CHECK(j["meta"].contains("version"));
}

TEST_CASE("cli learn: exact-moment run recovers the generator tree") {
  Cli cli;
  REQUIRE(cli.run("gen --p 10 --k 2 --dims 3 --seed 6 --out " + cli.path("g")) == 0);
  REQUIRE(cli.run("learn --exact-from-model " + cli.path("g/model.json") +
                  " --k 2 --out " + cli.path("r")) == 0);
  std::string out;
  REQUIRE(cli.run("eval " + cli.path("r/tree.json") + " " +
                      cli.path("g/model.json"),
                  &out) == 0);
  auto metrics = json::parse(out);
  CHECK(metrics["rf"] == 0.0);
  CHECK(metrics["param_max_err"].get<double>() < 1e-6);
  for (const char* f : {"r/tree.json", "r/tree.dot", "r/tree.newick", "r/report.json"})
    CHECK(fs::exists(cli.path(f)));
}

TEST_CASE("cli learn: output independent of the thread cap") {
  Cli cli;
  REQUIRE(cli.run("gen --p 9 --k 2 --dims 2 --seed 7 --n 4000 --out " +
                  cli.path("g")) == 0);
  REQUIRE(cli.run("learn " + cli.path("g/samples.csv") + " --k 2 --seed 3 " +
                  "--threads 1 --out " + cli.path("t1")) == 0);
  REQUIRE(cli.run("learn " + cli.path("g/samples.csv") + " --k 2 --seed 3 " +
                  "--threads 8 --out " + cli.path("t8")) == 0);
  CHECK(slurp(cli.path("t1/tree.json")) == slurp(cli.path("t8/tree.json")));
}

TEST_CASE("cli learn: malformed csv fails with exit 1 and a line number") {
  Cli cli;
  {
    std::ofstream f(cli.path("bad.csv"));
    f << R"({"format":"sparse","p":3,"dims":[2,2,2],"n":10})" << "\n";
    f << "0,0,0,1\n";
    f << "1,banana\n";
  }
  std::string err;
  int rc = cli.run("learn " + cli.path("bad.csv") + " --k 2 --out " +
                   cli.path("x"));
  CHECK(rc == 1);
  std::string stderr_text = slurp(cli.path("stderr.txt"));
  CHECK(stderr_text.find("line 3") != std::string::npos);
}

TEST_CASE("cli learn: disconnected distances exit with code 2") {
  Cli cli;
  // vars 2 and 3 are constant one-hots: every cross moment touching them is
  // exactly rank 1, so their pairs sit at +inf distance for k=2
  {
    std::ofstream f(cli.path("disc.csv"));
    f << R"({"format":"sparse","p":4,"dims":[2,2,2,2],"n":400})" << "\n";
    for (int s = 0; s < 400; ++s) {
      const int bit = s % 2;
      f << s << ",0," << bit << ",1\n";
      f << s << ",1," << bit << ",1\n";
      f << s << ",2,0,1\n";
      f << s << ",3,0,1\n";
    }
  }
  int rc = cli.run("learn " + cli.path("disc.csv") + " --k 2 --out " +
                   cli.path("x"));
  CHECK(rc == 2);
}

TEST_CASE("cli learn: non-additive geometry exits with code 3") {
  Cli cli;
  // gaussian scalars whose correlations give a star MST with contradictory
  // side distances: every pair in the single group classifies as unrelated
  Eigen::MatrixXd corr(4, 4);
  corr << 1.0, 0.368, 0.368, 0.368,
      0.368, 1.0, 0.111, 0.0743,
      0.368, 0.111, 1.0, 0.0498,
      0.368, 0.0743, 0.0498, 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  REQUIRE(llt.info() == Eigen::Success);
  Eigen::MatrixXd l = llt.matrixL();
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  {
    std::ofstream f(cli.path("sq.csv"));
    const int n = 200000;
    f << R"({"format":"dense","p":4,"dims":[1,1,1,1],"n":200000})" << "\n";
    f.precision(10);
    for (int s = 0; s < n; ++s) {
      Eigen::VectorXd z(4);
      for (int i = 0; i < 4; ++i) z(i) = normal(rng);
      Eigen::VectorXd x = l * z;
      f << s << "," << x(0) << "," << x(1) << "," << x(2) << "," << x(3) << "\n";
    }
  }
  int rc = cli.run("learn " + cli.path("sq.csv") + " --k 1 --epsilon 0.05 " +
                   "--family gaussian --out " + cli.path("x"));
  CHECK(rc == 3);
}

TEST_CASE("cli eval: trivial equality and quartet mismatch") {
  Cli cli;
  REQUIRE(cli.run("gen --p 6 --k 2 --dims 2 --seed 9 --out " + cli.path("g")) == 0);
  std::string out;
  REQUIRE(cli.run("eval " + cli.path("g/model.json") + " " +
                      cli.path("g/model.json"),
                  &out) == 0);
  CHECK(json::parse(out)["rf"] == 0.0);
}

TEST_CASE("cli eval: leaf mismatch exits with code 1") {
  Cli cli;
  REQUIRE(cli.run("gen --p 5 --k 2 --dims 2 --seed 1 --out " + cli.path("a")) == 0);
  REQUIRE(cli.run("gen --p 6 --k 2 --dims 2 --seed 1 --out " + cli.path("b")) == 0);
  int rc = cli.run("eval " + cli.path("a/model.json") + " " +
                   cli.path("b/model.json"));
  CHECK(rc == 1);
}

TEST_CASE("cli learn: dumps distances and group debug files on request") {
  Cli cli;
  REQUIRE(cli.run("gen --p 7 --k 2 --dims 2 --seed 12 --out " + cli.path("g")) == 0);
  REQUIRE(cli.run("learn --exact-from-model " + cli.path("g/model.json") +
                  " --k 2 --dump-distances --dump-groups --out " +
                  cli.path("r")) == 0);
  CHECK(fs::exists(cli.path("r/distances.csv")));
  CHECK(fs::exists(cli.path("r/groups.json")));
  auto groups = json::parse(slurp(cli.path("r/groups.json")));
  REQUIRE(groups.is_array());
  CHECK(groups[0].contains("hidden_provenance"));
}
