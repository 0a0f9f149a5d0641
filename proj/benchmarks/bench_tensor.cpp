#include <benchmark/benchmark.h>

#include "ltm/exact.hpp"
#include "ltm/model.hpp"
#include "ltm/tensor_decomp.hpp"

using namespace ltm;

namespace {

TripletMoments triplet_fixture(int k, int d) {
  GeneratorOptions o;
  o.topology = Topology::balanced;
  auto m = random_latent_tree(4, k, d, o, 5);
  TripletMoments tm;
  tm.m_ab = exact_pair_moment(m, 0, 1);
  tm.m_ac = exact_pair_moment(m, 0, 2);
  tm.m_bc = exact_pair_moment(m, 1, 2);
  tm.t_abc = exact_triple_moment(m, 0, 1, 2);
  tm.mean_a = exact_mean(m, 0);
  tm.mean_b = exact_mean(m, 1);
  tm.mean_c = exact_mean(m, 2);
  return tm;
}

}  // namespace

static void BM_DecomposeTriplet(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  TripletMoments tm = triplet_fixture(k, d);
  TensorOptions opt;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    opt.seed = seed++;
    auto p = decompose_triplet(tm, k, opt);
    benchmark::DoNotOptimize(p.pi(0));
  }
}
BENCHMARK(BM_DecomposeTriplet)->Args({2, 4})->Args({3, 8})->Args({4, 16});
