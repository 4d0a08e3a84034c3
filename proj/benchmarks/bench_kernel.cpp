#include <random>

#include <benchmark/benchmark.h>

#include "harmonica/kernel.hpp"
#include "harmonica/krr.hpp"

using namespace harmonica;

static void BM_Gram(benchmark::State& state) {
  const auto ell = static_cast<std::size_t>(state.range(0));
  const auto spec = build_kernel({ActivationSpec::exp(), ActivationSpec::square()}, 2, 3);
  std::mt19937_64 rng(7);
  const auto xs = sample_uniform_batch(ell, 2, 3, rng);
  for (auto _ : state) benchmark::DoNotOptimize(gram(spec, xs));
}
BENCHMARK(BM_Gram)->RangeMultiplier(4)->Range(64, 1024)->Unit(benchmark::kMillisecond);

static void BM_RlsFit(benchmark::State& state) {
  const auto ell = static_cast<std::size_t>(state.range(0));
  const auto spec = build_kernel({ActivationSpec::exp(), ActivationSpec::square()}, 2, 3);
  std::mt19937_64 rng(8);
  Dataset data;
  data.xs = sample_uniform_batch(ell, 2, 3, rng);
  for (std::size_t i = 0; i < ell; ++i) data.ys.push_back(static_cast<double>(i % 3));
  const auto G = gram(spec, data.xs);
  for (auto _ : state) benchmark::DoNotOptimize(rls_fit(G, data, 1e-3));
}
BENCHMARK(BM_RlsFit)->RangeMultiplier(4)->Range(64, 1024)->Unit(benchmark::kMillisecond);

static void BM_Nystrom(benchmark::State& state) {
  const auto spec = build_kernel({ActivationSpec::exp(), ActivationSpec::identity()}, 1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nystrom_eigs(spec, static_cast<int>(state.range(0)), 10, 3));
}
BENCHMARK(BM_Nystrom)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
