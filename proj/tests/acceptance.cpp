#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>

#include "hmpc/apps.hpp"
#include "hmpc/attacks.hpp"
#include "hmpc/checks.hpp"
#include "hmpc/report.hpp"

using namespace hmpc;

namespace {

constexpr std::uint64_t kEllBytes = 8;
constexpr double kSemiRuntimeLimit = 30.0;       // seconds, 10^5 mults at depth 100
constexpr double kAppRuntimeLimit = 60.0;        // seconds per application run
constexpr double kTruncTolerance = 1.0 / 8192;   // 2^-13
constexpr double kFpRange = 8.0;                 // operands drawn from [-8, 8]
constexpr double kBiasSigmas = 3.0;
constexpr int kSoundTrials = 100;                // per fault class at kappa = 40
constexpr int kWeakTrials = 1000;                // kappa = 1
constexpr double kWeakAbortFloor = 0.4;
constexpr int kNnAgreeFloor = 99;                // of 100
constexpr int kRandomCircuits = 1000;
constexpr std::size_t kGadgetInputs = 1000;

struct Line {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Report bench(BenchKind kind, int n, Mode mode, std::size_t gates, int depth = 1, std::uint32_t nf = 1) {
  BenchShape s;
  s.kind = kind;
  s.gates = gates;
  s.depth = depth;
  s.nf = nf;
  EngineOptions o;
  o.mode = mode;
  RunOutcome out = run_mem(bench_circuit(s), n, o, PartyInputs(n));
  return make_report(bench_name(kind), n, o, "mem", out);
}

std::uint64_t tag_rounds(const Report& r, const std::string& tag) {
  for (const auto& [k, c] : r.tags)
    if (k == tag) return c.rounds;
  return 0;
}

void c1(Line& l) {
  for (int n : {5, 7, 9}) {
    const std::uint64_t t = (n - 1) / 2, G = 100000;
    auto t0 = std::chrono::steady_clock::now();
    Report r = bench(BenchKind::mult, n, Mode::semi, G, 100);
    const double wall = seconds(t0);
    const auto prep = r.phase(Phase::prep).bytes, on = r.phase(Phase::online).bytes;
    l.detail << " n=" << n << " prep=" << prep << " online=" << on << " (" << std::fixed << std::setprecision(2)
             << wall << "s)";
    l.require(r.ok, "run aborted");
    l.require(prep == t * kEllBytes * G, "prep bytes");
    l.require(on == 2 * t * kEllBytes * G, "online bytes");
    l.require(wall < kSemiRuntimeLimit, "runtime");
  }
}

void c2(Line& l) {
  Report r = bench(BenchKind::mult, 5, Mode::malicious, 10000, 1);
  const auto on = r.phase(Phase::online).bytes, mod = r.phase(Phase::prep).modeled_bytes(),
             ver = r.phase(Phase::verify).bytes;
  l.detail << " online=" << on << " modeled-prep=" << mod << " verification=" << ver;
  l.require(r.ok, "run aborted");
  l.require(on == 480000, "online bytes");
  l.require(mod == 480000, "modeled prep bytes");
  l.require(r.phase(Phase::prep).bytes == 0, "measured prep must be empty");
  l.require(ver > 0, "verification bytes missing");
}

void c3(Line& l) {
  std::uint64_t checked = 0;
  for (int d : {1, 10, 100}) {
    Report r = bench(BenchKind::mult, 5, Mode::semi, std::size_t(10) * d, d);
    l.require(r.phase(Phase::online).rounds == std::uint64_t(2 * d), "semi rounds at depth " + std::to_string(d));
    ++checked;
  }
  for (auto k : {BenchKind::mult3, BenchKind::mult4}) {
    l.require(bench(k, 5, Mode::semi, 100).phase(Phase::online).rounds == 2, std::string(bench_name(k)) + " rounds");
    l.require(tag_rounds(bench(k, 5, Mode::malicious, 100), "online/eval") == 2,
              std::string(bench_name(k)) + " malicious rounds");
    checked += 2;
  }
  const std::uint64_t G = 200;
  for (int n : {5, 7, 9}) {
    const std::uint64_t tl = (n - 1) / 2 * kEllBytes;
    const std::size_t Gm = n == 9 ? 50 : G;
    struct Want {
      BenchKind k;
      Mode m;
      std::uint64_t online, prep;
      bool modeled;
    };
    const Want wants[] = {{BenchKind::mult, Mode::semi, 2, 1, false},       {BenchKind::mult3, Mode::semi, 2, 6, false},
                          {BenchKind::mult4, Mode::semi, 2, 15, false},     {BenchKind::mult, Mode::malicious, 3, 3, true},
                          {BenchKind::mult3, Mode::malicious, 3, 12, true}, {BenchKind::mult4, Mode::malicious, 3, 33, true}};
    for (const auto& w : wants) {
      const std::size_t gates = w.m == Mode::malicious ? Gm : G;
      Report r = bench(w.k, n, w.m, gates);
      const auto prep = w.modeled ? r.phase(Phase::prep).modeled_bytes() : r.phase(Phase::prep).bytes;
      const std::string who = std::string(bench_name(w.k)) + "/" + mode_name(w.m) + "/n=" + std::to_string(n);
      l.require(r.ok, who + " aborted");
      l.require(r.phase(Phase::online).bytes == w.online * tl * gates, who + " online");
      l.require(prep == w.prep * tl * gates, who + " prep");
      ++checked;
    }
  }
  l.detail << " " << checked << " configurations";
}

void c4(Line& l) {
  std::uint64_t first = 0;
  for (std::uint32_t nf : {1u, 16u, 256u}) {
    Report r = bench(BenchKind::dotp, 5, Mode::semi, 1000, 1, nf);
    const auto on = r.phase(Phase::online).bytes;
    l.detail << " nf=" << nf << ":" << on;
    if (nf == 1) first = on;
    l.require(r.ok && on == first, "online bytes differ at nf=" + std::to_string(nf));
  }
  Report m1 = bench(BenchKind::dotp, 5, Mode::malicious, 200, 1, 1), m256 = bench(BenchKind::dotp, 5, Mode::malicious, 200, 1, 256);
  l.detail << " mal nf=1/256:" << m1.phase(Phase::online).bytes << "/" << m256.phase(Phase::online).bytes;
  l.require(m1.ok && m256.ok && m1.phase(Phase::online).bytes == m256.phase(Phase::online).bytes, "malicious online");
}

void c5(Line& l) {
  std::size_t cases = 0;
  for (Mode mode : {Mode::semi, Mode::malicious})
    for (int n : {5, 7, 9}) {
      CheckResult r = check_random_circuits(n, mode, kRandomCircuits, 1000 + n);
      cases += r.cases;
      l.require(r.ok(), std::string("random circuits ") + mode_name(mode) + " n=" + std::to_string(n) + ": " +
                            r.first_failure);
    }
  l.detail << " circuits=" << cases;
  std::size_t gad = 0;
  for (Mode mode : {Mode::semi, Mode::malicious})
    for (const auto& r : check_gadgets(5, mode, kGadgetInputs, 77)) {
      gad += r.cases;
      l.require(r.ok(), r.name + " (" + mode_name(mode) + "): " + r.first_failure);
    }
  l.detail << " gadget-cases=" << gad;
  std::size_t mini = 0;
  for (Mode mode : {Mode::semi, Mode::malicious})
    for (const auto& r : check_mini_ring(5, mode, 8)) {
      mini += r.cases;
      l.require(r.ok() && r.cases == 65536, r.name + " (" + mode_name(mode) + "): " + r.first_failure);
    }
  l.detail << " mini-ring-pairs=" << mini;
}

void c6(Line& l) {
  const std::size_t N = 10000;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(-kFpRange, kFpRange);
  std::vector<u64> a(N), b(N);
  for (std::size_t i = 0; i < N; ++i) a[i] = fp_encode_raw(d(rng)), b[i] = fp_encode_raw(d(rng));
  for (Mode mode : {Mode::semi, Mode::malicious}) {
    Circuit c;
    int x = c.input(0, N), y = c.input(1, N);
    c.output(c.mul(x, y, kFrac));
    PartyInputs in(5);
    in[0][x] = a;
    in[1][y] = b;
    EngineOptions o;
    o.mode = mode;
    RunOutcome out = run_mem(c, 5, o, in);
    l.require(out.all_ok(), std::string("run aborted (") + mode_name(mode) + ")");
    if (!out.all_ok()) continue;
    double worst = 0;
    std::size_t bad = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double exact = fp_decode_raw(a[i]) * fp_decode_raw(b[i]);
      const double err = std::abs(fp_decode_raw(out.outputs()[0][i]) - exact);
      worst = std::max(worst, err);
      bad += err > kTruncTolerance ? 1 : 0;
    }
    l.detail << " " << mode_name(mode) << ": max-err=" << std::scientific << std::setprecision(3) << worst
             << " over-bound=" << bad;
    l.require(bad == 0, std::string("error bound (") + mode_name(mode) + ")");
  }
}

void c7(Line& l) {
  const std::uint32_t N = 1000;
  for (Mode mode : {Mode::semi, Mode::malicious}) {
    Circuit c;
    auto [ar, bo] = c.dsbits(N, 1);
    c.output(ar);
    c.output_b(bo);
    EngineOptions o;
    o.mode = mode;
    o.seed = 70;
    RunOutcome out = run_mem(c, 5, o, PartyInputs(5));
    l.require(out.all_ok(), "run aborted");
    if (!out.all_ok()) continue;
    const auto& A = out.outputs()[0];
    const auto& B = out.outputs()[1];
    std::size_t ones = 0, bad = 0;
    for (std::uint32_t i = 0; i < N; ++i) {
      bad += (A[i] > 1 || A[i] != B[i]) ? 1 : 0;
      ones += A[i] == 1 ? 1 : 0;
    }
    const double sigma = std::sqrt(N * 0.25);
    l.detail << " " << mode_name(mode) << ": ones=" << ones << " inconsistent=" << bad;
    l.require(bad == 0, "arithmetic and Boolean bits disagree");
    l.require(std::abs(static_cast<double>(ones) - N / 2.0) <= kBiasSigmas * sigma, "bias");
    if (mode == Mode::semi) {
      Report r = make_report("dsbits", 5, o, "mem", out);
      const std::uint64_t t = 2, want = std::uint64_t(N) * 4 * t * (64 + 2);
      l.detail << " semi-prep-bits=" << r.phase(Phase::prep).bits << "/" << want;
      l.require(r.phase(Phase::prep).bits == want, "semi cost");
    }
  }
}

void c8(Line& l) {
  int total = 0, aborted = 0;
  for (auto cls : kFaultClasses) {
    SoundnessTally t = soundness_trials(cls, 5, 40, kSoundTrials, 8);
    total += t.trials;
    aborted += t.all_aborted;
    l.require(t.fired == t.trials && t.all_aborted == t.trials, std::string("class ") + fault_class_name(cls));
  }
  l.detail << " kappa=40: " << aborted << "/" << total << " aborted";
  SoundnessTally w = soundness_trials(FaultClass::zeta_share, 5, 1, kWeakTrials, 9, u64(1) << 63);
  const double rate = w.fired ? static_cast<double>(w.all_aborted) / w.fired : 0;
  l.detail << "; kappa=1 additive 2^63: " << w.all_aborted << "/" << w.fired << " = " << std::fixed
           << std::setprecision(3) << rate;
  l.require(w.fired == kWeakTrials, "faults not injected");
  l.require(w.all_aborted + w.none_aborted == w.fired, "honest parties split on abort");
  l.require(rate >= kWeakAbortFloor, "kappa=1 abort rate");
}

void c9(Line& l) {
  int runs = 0, splits = 0;
  for (int n : {5, 7})
    for (std::uint64_t seed : {1, 2, 3})
      for (const auto& s : fair_schedules(n)) {
        FairOutcome f = run_fair_schedule(s, n, seed);
        ++runs;
        if (f.split) {
          ++splits;
          l.require(false, s.name + " n=" + std::to_string(n));
        }
      }
  l.detail << " schedules=" << runs << " splits=" << splits;
}

void c10(Line& l) {
  for (Mode mode : {Mode::semi, Mode::malicious}) {
    EngineOptions o;
    o.mode = mode;
    auto inst = random_bio(1024, 4, 10);
    auto bp = build_bio(inst);
    auto t0 = std::chrono::steady_clock::now();
    RunOutcome out = run_mem(bp.prog.circuit, 5, o, bp.prog.inputs(5));
    double wall = seconds(t0);
    bool exact = out.all_ok() && check_bio(inst, out.outputs()).ok();
    l.detail << " bio-" << mode_name(mode) << "=" << (exact ? "exact" : "MISMATCH") << "(" << std::fixed
             << std::setprecision(2) << wall << "s)";
    l.require(exact && wall < kAppRuntimeLimit, std::string("bio ") + mode_name(mode));

    auto sinst = random_ssq(1000, 25, 8, 6, 10);
    auto luts = build_luts(sinst);
    bool lut_ok = ssq_from_luts(luts).distances == oracle::ssq(sinst.db, sinst.query, sinst.block_len).distances;
    auto sp = build_ssq(luts);
    t0 = std::chrono::steady_clock::now();
    out = run_mem(sp.prog.circuit, 5, o, sp.prog.inputs(5));
    wall = seconds(t0);
    exact = lut_ok && out.all_ok() && check_ssq(luts, out.outputs()).ok();
    l.detail << " ssq-" << mode_name(mode) << "=" << (exact ? "exact" : "MISMATCH") << "(" << wall << "s)";
    l.require(exact && wall < kAppRuntimeLimit, std::string("ssq ") + mode_name(mode));
  }
  auto net = random_mlp({16, 8, 8, 10}, 10);
  auto xs = random_mlp_inputs(100, 16, 11);
  auto np = build_nn1(net, xs);
  RunOutcome out = run_mem(np.prog.circuit, 5, EngineOptions{}, np.prog.inputs(5));
  l.require(out.all_ok(), "nn1 aborted");
  if (out.all_ok()) {
    AppCheck chk = check_nn1(net, xs, out.outputs());
    l.detail << " nn1-argmax=" << chk.agree << "/100 in-bound=" << chk.compared - chk.mismatched << "/"
             << chk.compared;
    l.require(chk.agree >= static_cast<std::size_t>(kNnAgreeFloor), "nn1 argmax agreement");
  }
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Line&)>> criteria[] = {
      {"C1 semi-honest multiplication bytes, 1e5 mults at depth 100", c1},
      {"C2 malicious n=5, 1e4 mults: online and modeled preprocessing", c2},
      {"C3 round counts and per-gate costs", c3},
      {"C4 dot product online bytes independent of nf", c4},
      {"C5 oracle equivalence", c5},
      {"C6 truncated multiplication error", c6},
      {"C7 doubly-shared bits", c7},
      {"C8 malicious soundness", c8},
      {"C9 fair reconstruction without splits", c9},
      {"C10 applications", c10},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Line l;
    auto t0 = std::chrono::steady_clock::now();
    try {
      fn(l);
    } catch (const std::exception& e) {
      l.pass = false;
      l.detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s %s:%s (%.1fs)\n", l.pass ? "PASS" : "FAIL", name, l.detail.str().c_str(), seconds(t0));
    std::fflush(stdout);
    failed += l.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
