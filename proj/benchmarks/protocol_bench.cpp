#include <benchmark/benchmark.h>

#include "hmpc/apps.hpp"
#include "hmpc/report.hpp"

using namespace hmpc;

namespace {

void run_shape(benchmark::State& state, BenchShape s, Mode mode) {
  const int n = static_cast<int>(state.range(0));
  EngineOptions o;
  o.mode = mode;
  Circuit c = bench_circuit(s);
  Report last;
  for (auto _ : state) {
    RunOutcome out = run_mem(c, n, o, PartyInputs(n));
    if (!out.all_ok()) state.SkipWithError("run aborted");
    last = make_report(bench_name(s.kind), n, o, "mem", out);
  }
  state.counters["online_B_per_gate"] = static_cast<double>(last.phase(Phase::online).bytes) / s.gates;
  state.counters["prep_B_per_gate"] =
      static_cast<double>(mode == Mode::semi ? last.phase(Phase::prep).bytes : last.phase(Phase::prep).modeled_bytes()) /
      s.gates;
  state.counters["online_rounds"] = static_cast<double>(last.phase(Phase::online).rounds);
  state.SetItemsProcessed(state.iterations() * s.gates);
}

void bm_semi_mult(benchmark::State& state) { run_shape(state, {BenchKind::mult, 10000, 10}, Mode::semi); }
void bm_mal_mult(benchmark::State& state) { run_shape(state, {BenchKind::mult, 2000, 10}, Mode::malicious); }
void bm_semi_mult4(benchmark::State& state) { run_shape(state, {BenchKind::mult4, 2000, 1}, Mode::semi); }
void bm_semi_dotp(benchmark::State& state) {
  run_shape(state, {BenchKind::dotp, 1000, 1, static_cast<std::uint32_t>(state.range(1))}, Mode::semi);
}
void bm_semi_trunc(benchmark::State& state) { run_shape(state, {BenchKind::mult, 1000, 1, 1, kFrac}, Mode::semi); }

void bm_bio(benchmark::State& state) {
  auto inst = random_bio(static_cast<std::size_t>(state.range(0)), 4, 1);
  auto bp = build_bio(inst);
  for (auto _ : state) {
    RunOutcome out = run_mem(bp.prog.circuit, 5, EngineOptions{}, bp.prog.inputs(5));
    if (!out.all_ok()) state.SkipWithError("run aborted");
  }
}

}  // namespace

BENCHMARK(bm_semi_mult)->Arg(5)->Arg(7)->Arg(9)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(bm_mal_mult)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(bm_semi_mult4)->Arg(5)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(bm_semi_dotp)->Args({5, 1})->Args({5, 16})->Args({5, 256})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(bm_semi_trunc)->Arg(5)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(bm_bio)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
