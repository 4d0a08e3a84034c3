#include <benchmark/benchmark.h>

#include "harmonica/kernel.hpp"
#include "harmonica/spectrum.hpp"

using namespace harmonica;

static void BM_LambdaTable(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const auto spec = build_kernel({ActivationSpec::exp(), ActivationSpec::square()}, 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(lambda_table(spec, K));
}
BENCHMARK(BM_LambdaTable)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_Enumerate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int K = static_cast<int>(state.range(1));
  const auto spec = build_kernel({ActivationSpec::geometric(0.5), ActivationSpec::square()}, n, 3);
  const auto table = lambda_table(spec, K);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_spectrum(spec, table, K));
}
BENCHMARK(BM_Enumerate)->Args({1, 40})->Args({2, 20})->Args({2, 40})->Args({4, 12})
    ->Unit(benchmark::kMillisecond);

static void BM_MercerReconstruct(benchmark::State& state) {
  const auto spec = build_kernel({ActivationSpec::exp(), ActivationSpec::square()}, 2, 3);
  const auto table = lambda_table(spec, 12);
  const auto x = sample_uniform(2, 3, 1u);
  const auto y = sample_uniform(2, 3, 2u);
  for (auto _ : state) benchmark::DoNotOptimize(mercer_reconstruct(spec, table, x, y, 12));
}
BENCHMARK(BM_MercerReconstruct)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
