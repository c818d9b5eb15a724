#include <benchmark/benchmark.h>

#include <random>

#include "hmpc/prf.hpp"
#include "hmpc/ring.hpp"

using namespace hmpc;

static void bm_prf_stream(benchmark::State& state) {
  PrfStream s(derive_key(1, "bench", 0), 0);
  for (auto _ : state) benchmark::DoNotOptimize(s.next64());
  state.SetBytesProcessed(state.iterations() * 8);
}
BENCHMARK(bm_prf_stream);

static void bm_inverse_mod2k(benchmark::State& state) {
  std::mt19937_64 rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(inverse_mod2k(u128(rng() | 1), 66));
}
BENCHMARK(bm_inverse_mod2k);

static void bm_smallest_sqrt(benchmark::State& state) {
  std::mt19937_64 rng(2);
  for (auto _ : state) {
    u128 c = u128(rng() | 1);
    benchmark::DoNotOptimize(smallest_sqrt_mod2k(Z66::mul(c, c), 66));
  }
}
BENCHMARK(bm_smallest_sqrt);
