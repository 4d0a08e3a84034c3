#include <benchmark/benchmark.h>

#include "harmonica/activations.hpp"
#include "harmonica/taylor.hpp"

using namespace harmonica;

static void BM_CauchyProduct(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const auto a = CoeffSeries::exponential(order);
  for (auto _ : state) benchmark::DoNotOptimize(cauchy_product(a, a, order));
}
BENCHMARK(BM_CauchyProduct)->RangeMultiplier(4)->Range(16, 1024);

static void BM_Power(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const auto a = majorant_series(ActivationSpec::erf_sigmoid(), order);
  for (auto _ : state) benchmark::DoNotOptimize(power(a, 4, order));
}
BENCHMARK(BM_Power)->RangeMultiplier(4)->Range(16, 1024);

static void BM_ComposeExpSquare(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const auto outer = CoeffSeries::exponential(4 * order);
  const CoeffSeries inner{0.0, 0.0, 1.0};
  SeriesLimits limits;
  limits.compose_terms = 4 * order;
  for (auto _ : state) benchmark::DoNotOptimize(compose(outer, inner, order, limits));
}
BENCHMARK(BM_ComposeExpSquare)->RangeMultiplier(4)->Range(16, 256);

BENCHMARK_MAIN();
