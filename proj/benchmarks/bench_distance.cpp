#include <benchmark/benchmark.h>

#include "ltm/distance.hpp"
#include "ltm/exact.hpp"
#include "ltm/model.hpp"
#include "ltm/sampling.hpp"

using namespace ltm;

namespace {

struct Fixture {
  GroundTruthModel model;
  SampleSet samples;
  Fixture(int p, long n) {
    GeneratorOptions o;
    o.topology = Topology::random_degree;
    model = random_latent_tree(p, 2, 2, o, 42);
    samples = sample_model(model, n, 7);
  }
};

}  // namespace

static void BM_AllPairsDistances(benchmark::State& state) {
  static Fixture fx(static_cast<int>(64), 20000);
  SampleMoments moments(fx.samples);
  AllPairsOptions opt;
  opt.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto res = all_pairs_distances(moments, 2, opt);
    benchmark::DoNotOptimize(res.d(0, 1));
  }
  state.SetItemsProcessed(state.iterations() * 64 * 63 / 2);
}
BENCHMARK(BM_AllPairsDistances)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();

static void BM_PairwiseMomentSparse(benchmark::State& state) {
  static Fixture fx(8, 100000);
  for (auto _ : state) {
    auto m = pairwise_moment(fx.samples, 0, 1);
    benchmark::DoNotOptimize(m.m(0, 0));
  }
}
BENCHMARK(BM_PairwiseMomentSparse);

static void BM_InfoDistance(benchmark::State& state) {
  static Fixture fx(8, 1000);
  Matrix ab = exact_pair_moment(fx.model, 0, 1);
  Matrix aa = exact_pair_moment(fx.model, 0, 0);
  Matrix bb = exact_pair_moment(fx.model, 1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(info_distance(ab, aa, bb, 2));
  }
}
BENCHMARK(BM_InfoDistance);
