#include "hmpc/checks.hpp"

#include <chrono>
#include <functional>
#include <random>
#include <string>

#include "hmpc/frontend.hpp"
#include "hmpc/gadgets.hpp"
#include "hmpc/oracle.hpp"
#include "hmpc/runner.hpp"

namespace hmpc {

namespace {

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void miss(CheckResult& r, const std::string& what) {
  if (r.mismatches++ == 0) r.first_failure = what;
}

std::string abort_text(const RunOutcome& out) {
  for (const auto& p : out.parties)
    if (!p.ok) return "party " + std::to_string(p.party) + " aborted in " + p.abort_phase + "/" + p.abort_tag + ": " + p.abort_reason;
  return "no outputs";
}

}  // namespace

CheckResult check_random_circuits(int n, Mode mode, int count, std::uint64_t seed, int gates) {
  CheckResult r;
  r.name = "random-circuits";
  auto t0 = std::chrono::steady_clock::now();
  for (int it = 0; it < count; ++it) {
    const std::uint64_t s = seed * 7919 + static_cast<std::uint64_t>(it);
    PlainCircuit pc = random_plain_circuit(s, n, 6, gates, 4);
    std::mt19937_64 rng(s);
    std::vector<u64> vals;
    for (std::size_t i = 0; i < pc.inputs.size(); ++i) vals.push_back(rng());
    auto ref = oracle::eval_circuit_plain(pc, vals);
    CompiledPlain cp = compile_plain(pc);
    EngineOptions o;
    o.mode = mode;
    o.seed = s + 1;
    RunOutcome out = run_mem(cp.circuit, n, o, plain_inputs(cp, pc, n, vals));
    ++r.cases;
    if (!out.all_ok()) {
      if (r.aborts++ == 0 && r.first_failure.empty()) r.first_failure = abort_text(out);
      continue;
    }
    const auto& res = out.outputs();
    for (std::size_t k = 0; k < pc.outputs.size(); ++k)
      if (res[k].size() != 1 || !ref[k].admits(res[k][0])) {
        miss(r, "circuit " + std::to_string(it) + " output " + std::to_string(k));
        break;
      }
    for (const auto& p : out.parties)
      if (p.outputs != res) {
        miss(r, "circuit " + std::to_string(it) + ": parties disagree");
        break;
      }
  }
  r.wall_s = since(t0);
  return r;
}

std::vector<CheckResult> check_gadgets(int n, Mode mode, std::size_t count, std::uint64_t seed) {
  const auto L = static_cast<std::uint32_t>(count);
  std::mt19937_64 rng(seed);
  auto draw = [&](std::size_t k, const std::function<u64()>& f) {
    std::vector<u64> v(k);
    for (auto& e : v) e = f();
    return v;
  };
  // operands with equal and adjacent pairs mixed in
  std::vector<u64> xs = draw(count, [&] { return rng(); }), ys(count);
  for (std::size_t i = 0; i < count; ++i) {
    switch (i % 4) {
      case 0: ys[i] = xs[i]; break;
      case 1: ys[i] = xs[i] + 1; break;
      case 2: xs[i] >>= rng() % 64, ys[i] = rng() >> (rng() % 64); break;
      default: ys[i] = rng(); break;
    }
  }
  std::vector<u64> bits = draw(count, [&] { return rng() & 1; });
  std::vector<u64> words = draw(count, [&] { return rng(); });
  std::vector<u64> small = draw(count, [&] { return static_cast<u64>(static_cast<i64>(rng() % 2001) - 1000); });
  std::vector<u64> pool_max = draw(count, [&] { return static_cast<u64>(static_cast<i64>(rng() >> 34) - (1ll << 29)); });
  std::vector<u64> pool_min = pool_max;
  for (std::size_t i = 0; i + 1 < count; i += 7) pool_min[i + 1] = pool_min[i];
  const std::uint32_t ma = 10, mb = 8, mc = std::max<std::uint32_t>(1, L / 10);
  std::uniform_real_distribution<double> fpd(-4.0, 4.0);
  std::vector<u64> A = draw(std::size_t(ma) * mb, [&] { return fp_encode_raw(fpd(rng)); });
  std::vector<u64> B = draw(std::size_t(mb) * mc, [&] { return fp_encode_raw(fpd(rng)); });

  Circuit c;
  PartyInputs in(n);
  auto arith = [&](int owner, const std::vector<u64>& v) {
    int w = c.input(owner, static_cast<std::uint32_t>(v.size()));
    in[owner][w] = v;
    return w;
  };
  auto boolean = [&](int owner, const std::vector<u64>& v, int lanes) {
    int w = c.input_b(owner, static_cast<std::uint32_t>(v.size()), lanes);
    in[owner][w] = v;
    return w;
  };
  int x = arith(0, xs), y = arith(1, ys), v = arith(2 % n, words), sm = arith(1, small);
  int b = boolean(0, bits, 1), bw = boolean(1, words, 64);
  int pmx = arith(2 % n, pool_max), pmn = arith(0, pool_min);
  int wa = arith(0, A), wb = arith(1, B);

  int o_bit2a = bit2a(c, b);
  int o_a2b = a2b(c, x);
  int o_b2a = b2a(c, bw);
  int o_inject = bit_inject(c, b, v);
  int o_lt = bit2a(c, lt(c, x, y));
  int o_eq = bit2a(c, eq(c, x, y));
  int o_relu = relu(c, sm);
  int o_sel = select(c, b, x, y);
  PoolResult pmax = pool(c, pmx, true, true, true);
  PoolResult pmin = pool(c, pmn, false, true, true);
  int o_mm = matmul(c, wa, wb, ma, mb, mc, kFrac);
  for (int w : {o_bit2a, o_inject, o_lt, o_eq, o_relu, o_sel, o_b2a, pmax.value, pmax.index, pmin.value, pmin.index, o_mm})
    c.output(w);
  for (int w : {o_a2b, pmax.onehot, pmin.onehot}) c.output_b(w);

  EngineOptions o;
  o.mode = mode;
  o.seed = seed + 3;
  auto t0 = std::chrono::steady_clock::now();
  RunOutcome out = run_mem(c, n, o, in);
  const double wall = since(t0);

  const char* names[] = {"bit2a", "bit_inject", "compare", "equals", "relu", "select", "b2a", "maxpool", "minpool",
                         "matmul", "a2b"};
  std::vector<CheckResult> res;
  for (const char* nm : names) {
    CheckResult r;
    r.name = nm;
    r.wall_s = wall;
    res.push_back(r);
  }
  auto at = [&](const std::string& nm) -> CheckResult& {
    for (auto& r : res)
      if (r.name == nm) return r;
    return res.front();
  };
  if (!out.all_ok()) {
    for (auto& r : res) r.cases = 1, r.aborts = 1, r.first_failure = abort_text(out);
    return res;
  }
  const auto& R = out.outputs();
  auto elementwise = [&](const std::string& nm, const std::vector<u64>& got, const std::function<u64(std::size_t)>& want) {
    CheckResult& r = at(nm);
    for (std::size_t i = 0; i < count; ++i) {
      ++r.cases;
      if (got[i] != want(i)) miss(r, "element " + std::to_string(i));
    }
  };
  elementwise("bit2a", R[0], [&](std::size_t i) { return oracle::bit2a(static_cast<int>(bits[i])); });
  elementwise("bit_inject", R[1], [&](std::size_t i) { return oracle::inject(static_cast<int>(bits[i]), words[i]); });
  elementwise("compare", R[2], [&](std::size_t i) { return oracle::bit2a(oracle::lt(xs[i], ys[i])); });
  elementwise("equals", R[3], [&](std::size_t i) { return oracle::bit2a(oracle::eq(xs[i], ys[i])); });
  elementwise("relu", R[4], [&](std::size_t i) { return oracle::relu(small[i]); });
  elementwise("select", R[5], [&](std::size_t i) { return bits[i] ? ys[i] : xs[i]; });
  elementwise("b2a", R[6], [&](std::size_t i) { return oracle::b2a(words[i]); });
  elementwise("a2b", R[12], [&](std::size_t i) { return oracle::a2b(xs[i]); });
  auto pooled = [&](const std::string& nm, const oracle::PoolValue& want, u64 value, u64 index, const std::vector<u64>& onehot) {
    CheckResult& r = at(nm);
    r.cases += 2 + count;
    if (value != want.value) miss(r, "pooled value");
    if (index != want.index) miss(r, "pooled index");
    for (std::size_t i = 0; i < count; ++i)
      if (onehot[i] != (i == want.index ? 1u : 0u)) miss(r, "one-hot element " + std::to_string(i));
  };
  pooled("maxpool", oracle::maxpool(pool_max), R[7][0], R[8][0], R[13]);
  pooled("minpool", oracle::minpool(pool_min), R[9][0], R[10][0], R[14]);
  {
    CheckResult& r = at("matmul");
    auto want = oracle::matmul(A, B, ma, mb, mc, kFrac);
    for (std::size_t i = 0; i < want.size(); ++i) {
      ++r.cases;
      if (!want[i].admits(R[11][i])) miss(r, "entry " + std::to_string(i));
    }
  }
  return res;
}

std::vector<CheckResult> check_mini_ring(int n, Mode mode, int width, std::size_t batch) {
  if (width < 1 || width > 12) throw std::invalid_argument("mini-ring width out of range");
  const u64 size = u64(1) << width, total = size * size;
  const int shift = 64 - width;
  std::vector<CheckResult> res(2);
  res[0].name = "compare-" + std::to_string(width) + "bit";
  res[1].name = "equals-" + std::to_string(width) + "bit";
  auto t0 = std::chrono::steady_clock::now();
  for (u64 first = 0; first < total; first += batch) {
    const u64 cnt = std::min<u64>(batch, total - first);
    std::vector<u64> xs(cnt), ys(cnt);
    for (u64 i = 0; i < cnt; ++i) xs[i] = ((first + i) / size) << shift, ys[i] = ((first + i) % size) << shift;
    Circuit c;
    PartyInputs in(n);
    int x = c.input(0, static_cast<std::uint32_t>(cnt)), y = c.input(1, static_cast<std::uint32_t>(cnt));
    in[0][x] = xs;
    in[1][y] = ys;
    c.output_b(lt(c, x, y));
    c.output_b(eq(c, x, y));
    EngineOptions o;
    o.mode = mode;
    o.seed = first + 1;
    RunOutcome out = run_mem(c, n, o, in);
    if (!out.all_ok()) {
      for (auto& r : res)
        if (r.aborts++ == 0 && r.first_failure.empty()) r.first_failure = abort_text(out);
      continue;
    }
    const auto& R = out.outputs();
    for (u64 i = 0; i < cnt; ++i) {
      const u64 a = xs[i] >> shift, b = ys[i] >> shift;
      ++res[0].cases, ++res[1].cases;
      if (R[0][i] != static_cast<u64>(oracle::lt_ring(a, b, width)))
        miss(res[0], std::to_string(a) + " < " + std::to_string(b));
      if (R[1][i] != static_cast<u64>(oracle::eq_ring(a, b, width)))
        miss(res[1], std::to_string(a) + " == " + std::to_string(b));
    }
  }
  for (auto& r : res) r.wall_s = since(t0);
  return res;
}

}  // namespace hmpc
