#include <benchmark/benchmark.h>

#include <til/rng.hpp>

static void BM_PhiloxNormal(benchmark::State& state) {
  til::PhiloxStream rng(1, 0);
  double acc = 0.0;
  for (auto _ : state) {
    acc += rng.normal();
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}

BENCHMARK(BM_PhiloxNormal);

static void BM_PhiloxUniform(benchmark::State& state) {
  til::PhiloxStream rng(1, 0);
  double acc = 0.0;
  for (auto _ : state) {
    acc += rng.uniform();
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}

BENCHMARK(BM_PhiloxUniform);

BENCHMARK_MAIN();
