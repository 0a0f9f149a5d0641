#include <benchmark/benchmark.h>

#include <random>

#include "ltm/svd.hpp"

using namespace ltm;

namespace {

Matrix rank_k_matrix(int d, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix u(d, k), v(d, k);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < k; ++j) {
      u(i, j) = normal(rng);
      v(i, j) = normal(rng);
    }
  return u * v.transpose();
}

}  // namespace

static void BM_ExactSvd(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Matrix m = rank_k_matrix(d, 3, 1);
  for (auto _ : state) {
    auto f = svd_rank_k(m, 3);
    benchmark::DoNotOptimize(f.sigma(0));
  }
}
BENCHMARK(BM_ExactSvd)->Arg(32)->Arg(128)->Arg(256);

static void BM_RandomizedSvd(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Matrix m = rank_k_matrix(d, 3, 1);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto f = randomized_svd_rank_k(m, 3, seed++);
    benchmark::DoNotOptimize(f.sigma(0));
  }
}
BENCHMARK(BM_RandomizedSvd)->Arg(32)->Arg(128)->Arg(256);
