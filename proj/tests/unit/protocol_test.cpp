#include <random>

#include "doctest.h"
#include "hmpc/apps.hpp"
#include "hmpc/frontend.hpp"
#include "hmpc/report.hpp"

using namespace hmpc;

namespace {

Report bench(BenchKind kind, int n, Mode mode, std::size_t gates, int depth = 1, std::uint32_t nf = 1) {
  BenchShape s;
  s.kind = kind;
  s.gates = gates;
  s.depth = depth;
  s.nf = nf;
  EngineOptions o;
  o.mode = mode;
  RunOutcome out = run_mem(bench_circuit(s), n, o, PartyInputs(n));
  REQUIRE(out.all_ok());
  return make_report("t", n, o, "mem", out);
}

std::uint64_t online(const Report& r) { return r.phase(Phase::online).bytes; }
std::uint64_t tag_rounds(const Report& r, const std::string& tag) {
  for (const auto& [k, c] : r.tags)
    if (k == tag) return c.rounds;
  return 0;
}

}  // namespace

TEST_CASE("semi-honest per-gate bytes match the closed forms") {
  for (int n : {5, 7, 9}) {
    const std::uint64_t t = (n - 1) / 2, l = 8, G = 200;
    CAPTURE(n);
    Report m = bench(BenchKind::mult, n, Mode::semi, G);
    CHECK(m.phase(Phase::prep).bytes == t * l * G);
    CHECK(online(m) == 2 * t * l * G);
    Report m3 = bench(BenchKind::mult3, n, Mode::semi, G);
    CHECK(m3.phase(Phase::prep).bytes == 6 * t * l * G);
    CHECK(online(m3) == 2 * t * l * G);
    Report m4 = bench(BenchKind::mult4, n, Mode::semi, G);
    CHECK(m4.phase(Phase::prep).bytes == 15 * t * l * G);
    CHECK(online(m4) == 2 * t * l * G);
  }
}

TEST_CASE("malicious per-gate bytes match the closed forms") {
  for (int n : {5, 7}) {
    const std::uint64_t t = (n - 1) / 2, l = 8, G = 100;
    CAPTURE(n);
    Report m = bench(BenchKind::mult, n, Mode::malicious, G);
    CHECK(m.phase(Phase::prep).bytes == 0);
    CHECK(m.phase(Phase::prep).modeled_bytes() == 3 * t * l * G);
    CHECK(online(m) == 3 * t * l * G);
    Report m3 = bench(BenchKind::mult3, n, Mode::malicious, G);
    CHECK(m3.phase(Phase::prep).modeled_bytes() == 12 * t * l * G);
    CHECK(online(m3) == 3 * t * l * G);
    Report m4 = bench(BenchKind::mult4, n, Mode::malicious, G);
    CHECK(m4.phase(Phase::prep).modeled_bytes() == 33 * t * l * G);
    CHECK(online(m4) == 3 * t * l * G);
  }
}

TEST_CASE("online rounds follow the multiplicative depth") {
  for (int d : {1, 3, 10}) {
    Report r = bench(BenchKind::mult, 5, Mode::semi, 10 * d, d);
    CHECK(r.phase(Phase::online).rounds == std::uint64_t(2 * d));
  }
  CHECK(bench(BenchKind::mult3, 5, Mode::semi, 10).phase(Phase::online).rounds == 2);
  CHECK(bench(BenchKind::mult4, 5, Mode::semi, 10).phase(Phase::online).rounds == 2);
  Report mal = bench(BenchKind::mult, 5, Mode::malicious, 40, 4);
  CHECK(tag_rounds(mal, "online/eval") == 8);
  CHECK(tag_rounds(mal, "online/dbatch") == 1);
}

TEST_CASE("dot product online cost does not depend on the vector length") {
  const std::uint64_t a = online(bench(BenchKind::dotp, 5, Mode::semi, 100, 1, 1));
  CHECK(a == online(bench(BenchKind::dotp, 5, Mode::semi, 100, 1, 16)));
  CHECK(a == online(bench(BenchKind::dotp, 5, Mode::semi, 100, 1, 256)));
  CHECK(a == 2 * 2 * 8 * 100);
}

TEST_CASE("doubly-shared bits cost 4t(l+2) bits each in the semi-honest setting") {
  for (int n : {5, 7}) {
    const std::uint64_t t = (n - 1) / 2;
    Report r = bench(BenchKind::dsbits, n, Mode::semi, 64);
    CHECK(r.phase(Phase::prep).bits == 64 * 4 * t * 66);
  }
}

TEST_CASE("random circuits agree with the oracle") {
  for (Mode mode : {Mode::semi, Mode::malicious})
    for (int n : {3, 5}) {
      for (int s = 1; s <= 10; ++s) {
        PlainCircuit pc = random_plain_circuit(s, n, 6, 30, 4);
        std::mt19937_64 rng(s);
        std::vector<u64> v;
        for (std::size_t i = 0; i < pc.inputs.size(); ++i) v.push_back(rng());
        auto ref = oracle::eval_circuit_plain(pc, v);
        CompiledPlain cp = compile_plain(pc);
        EngineOptions o;
        o.mode = mode;
        o.seed = s;
        RunOutcome out = run_mem(cp.circuit, n, o, plain_inputs(cp, pc, n, v));
        REQUIRE(out.all_ok());
        for (std::size_t k = 0; k < ref.size(); ++k) CHECK(ref[k].admits(out.outputs()[k][0]));
      }
    }
}

TEST_CASE("frozen oracle outputs for seeded random circuits") {
  const u64 want[3][4] = {
      {0xc681c4f48d73637aull, 0x2de35bf311ab4000ull, 0x93898fdd6f73d800ull, 0xb629d332dacbfcf0ull},
      {0x4b7f3714ad29c940ull, 0xbe59e364f723213cull, 0xfd43f6786475f000ull, 0xc29878d804594ca4ull},
      {0xef653da7608cc8e0ull, 0x1ddddfe913bd22acull, 0x0c4d7e6e27b58108ull, 0xcd1fbf15f7f85429ull}};
  for (int s = 1; s <= 3; ++s) {
    PlainCircuit pc = random_plain_circuit(s, 5, 6, 30, 4);
    std::mt19937_64 rng(s);
    std::vector<u64> v;
    for (std::size_t i = 0; i < pc.inputs.size(); ++i) v.push_back(rng());
    auto ref = oracle::eval_circuit_plain(pc, v);
    CompiledPlain cp = compile_plain(pc);
    RunOutcome out = run_mem(cp.circuit, 5, EngineOptions{}, plain_inputs(cp, pc, 5, v));
    REQUIRE(out.all_ok());
    for (int k = 0; k < 4; ++k) {
      CHECK(ref[k].ring == want[s - 1][k]);
      CHECK(out.outputs()[k][0] == want[s - 1][k]);
    }
  }
}

TEST_CASE("truncated product of 1.5 and 2.0") {
  for (Mode mode : {Mode::semi, Mode::malicious}) {
    Circuit c;
    int x = c.input(0, 1), y = c.input(1, 1);
    c.output(c.mul(x, y, kFrac));
    PartyInputs in(5);
    in[0][x] = {fp_encode_raw(1.5)};
    in[1][y] = {fp_encode_raw(2.0)};
    EngineOptions o;
    o.mode = mode;
    RunOutcome out = run_mem(c, 5, o, in);
    REQUIRE(out.all_ok());
    CHECK(std::abs(fp_decode_raw(out.outputs()[0][0]) - 3.0) <= 1.0 / (1 << kFrac));
  }
}

TEST_CASE("truncation pairs from the dealer give the same bound") {
  Circuit c;
  int x = c.input(0, 64), y = c.input(1, 64);
  c.output(c.mul(x, y, kFrac));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-8, 8);
  PartyInputs in(5);
  std::vector<double> a(64), b(64);
  for (int i = 0; i < 64; ++i) {
    a[i] = d(rng), b[i] = d(rng);
    in[0][x].push_back(fp_encode_raw(a[i]));
    in[1][y].push_back(fp_encode_raw(b[i]));
  }
  EngineOptions o;
  o.trgen = TrGen::dealer;
  RunOutcome out = run_mem(c, 5, o, in);
  REQUIRE(out.all_ok());
  for (int i = 0; i < 64; ++i) {
    const double exact = fp_decode_raw(fp_encode_raw(a[i])) * fp_decode_raw(fp_encode_raw(b[i]));
    CHECK(std::abs(fp_decode_raw(out.outputs()[0][i]) - exact) <= 1.0 / (1 << kFrac) + 1e-12);
  }
}

TEST_CASE("a corrupted share makes every honest party abort") {
  Circuit c;
  int x = c.input(0, 8), y = c.input(1, 8);
  c.output(c.mul(x, y));
  PartyInputs in(5);
  in[0][x] = std::vector<u64>(8, 3);
  in[1][y] = std::vector<u64>(8, 4);
  EngineOptions o;
  o.mode = Mode::malicious;
  FaultInjector f;
  f.add(parse_fault_rule("from=0,to=2,tag=eval,nth=0,action=add,offset=1,value=1"));
  RunOutcome out = run_mem(c, 5, o, in, &f);
  CHECK(f.fired() == 1);
  for (const auto& p : out.parties)
    if (p.party != 0) CHECK_FALSE(p.ok);
}

TEST_CASE("inconsistent masked values are caught by agreement") {
  Circuit c;
  int x = c.input(0, 4), y = c.input(1, 4);
  c.output(c.mul(x, y));
  PartyInputs in(5);
  in[0][x] = {1, 2, 3, 4};
  in[1][y] = {5, 6, 7, 8};
  EngineOptions o;
  o.mode = Mode::malicious;
  FaultInjector f;
  f.add(parse_fault_rule("from=2,to=3,tag=dbatch,nth=0,action=add,offset=0,value=9"));
  RunOutcome out = run_mem(c, 5, o, in, &f);
  CHECK(f.fired() == 1);
  CHECK_FALSE(out.any_ok());
}

TEST_CASE("semi-honest and malicious runs are deterministic under a fixed seed") {
  for (Mode mode : {Mode::semi, Mode::malicious}) {
    auto once = [&] {
      BenchShape s;
      s.gates = 64;
      s.depth = 2;
      EngineOptions o;
      o.mode = mode;
      o.seed = 9;
      return report_json(make_report("d", 5, o, "mem", run_mem(bench_circuit(s), 5, o, PartyInputs(5))), false);
    };
    CHECK(once() == once());
  }
}

TEST_CASE("fair mode delivers outputs to everyone") {
  Circuit c;
  int x = c.input(0, 4), y = c.input(4, 4);
  c.output(c.mul(x, y));
  PartyInputs in(5);
  in[0][x] = {1, 2, 3, 4};
  in[4][y] = {5, 6, 7, 8};
  EngineOptions o;
  o.mode = Mode::malicious;
  o.fair = true;
  RunOutcome out = run_mem(c, 5, o, in);
  REQUIRE(out.all_ok());
  for (const auto& p : out.parties) CHECK(p.outputs[0] == std::vector<u64>{5, 12, 21, 32});
}
