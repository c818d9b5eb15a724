#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "engine_impl.hpp"

namespace hmpc {

const char* mode_name(Mode m) { return m == Mode::semi ? "semi" : "malicious"; }

Mode parse_mode(const std::string& s) {
  if (s == "semi" || s == "semi-honest") return Mode::semi;
  if (s == "mal" || s == "malicious") return Mode::malicious;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

bool needs_dealer(const Circuit& c, const EngineOptions& o) {
  if (o.mode == Mode::malicious) return true;
  if (o.trgen == TrGen::dealer)
    for (const auto& g : c.gates())
      if ((g.op == Op::mul || g.op == Op::dotp) && g.trunc > 0) return true;
  return false;
}

namespace detail {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Engine::Engine(const Circuit& c, int n_, int me_, Endpoint& ep, const EngineOptions& o, FaultInjector* f)
    : C(c),
      n(n_),
      me(me_),
      ps(n_),
      idx(ps),
      ks(idx, me_, o.seed),
      comm(ep, n_, f),
      opt(o),
      g(idx.g()),
      king(ps.king()),
      mal(o.mode == Mode::malicious),
      inE(ps.in_E(me_)),
      is_king(me_ == ps.king()) {}

bool Engine::is_product(Op op) {
  switch (op) {
    case Op::mul:
    case Op::mul3:
    case Op::mul4:
    case Op::dotp:
    case Op::inject:
    case Op::band:
    case Op::band3:
    case Op::band4:
      return true;
    default:
      return false;
  }
}

int Engine::k_of(const Gate& gt) const {
  switch (gt.op) {
    case Op::mul3:
    case Op::band3:
      return 3;
    case Op::mul4:
    case Op::band4:
      return 4;
    default:
      return 2;
  }
}

int Engine::term_index(int k, unsigned S) const {
  int t = 0;
  for (unsigned s = 1; s < (1u << k); ++s) {
    if (std::popcount(s) < 2) continue;
    if (s == S) return t;
    ++t;
  }
  throw std::logic_error("no such product term");
}

// Wires whose mask RSS a gate reads.
std::vector<int> Engine::lam_inputs(const Gate& gt) const {
  std::vector<int> v;
  auto add = [&](int w) {
    if (w >= 0 && !C.wire(w).pub) v.push_back(w);
  };
  switch (gt.op) {
    case Op::input:
    case Op::rand_in:
    case Op::constant:
    case Op::input_b:
    case Op::constant_b:
    case Op::mbits:
    case Op::bitpub:
    case Op::dsbits:
    case Op::open:
    case Op::open_b:
    case Op::output:
    case Op::output_b:
      break;
    case Op::concat:
      for (int w : gt.ins) add(w);
      break;
    case Op::inject:
      add(gt.in[1]);
      add(gt.in[2]);
      break;
    default:
      for (int w : gt.in) add(w);
  }
  return v;
}

void Engine::analyze() {
  const auto& gates = C.gates();
  W.assign(C.wires().size(), {});
  G.assign(gates.size(), {});
  level.assign(gates.size(), 0);
  wlevel.assign(C.wires().size(), 0);
  ds_off.assign(gates.size(), 0);
  for (std::size_t gi = 0; gi < gates.size(); ++gi) {
    const Gate& gt = gates[gi];
    int L = 0;
    auto see = [&](int w) {
      if (w < 0) return;
      if (C.wire(w).nested == gt.nested) L = std::max(L, wlevel[w]);
    };
    if (gt.op != Op::rss_in && gt.op != Op::rss_in_b) {
      for (int w : gt.in) see(w);
      for (int w : gt.ins) see(w);
    }
    if (op_interactive(gt.op)) ++L;
    level[gi] = L;
    if (gt.out >= 0) wlevel[gt.out] = L;
    if (gt.out2 >= 0) wlevel[gt.out2] = L;
    for (int w : lam_inputs(gt)) ++W[w].uses;
    if (is_product(gt.op)) {
      ++W[gt.out].uses;  // the output mask doubles as r in the last product term
      for (int w : gt.in)
        if (w >= 0) W[w].needE = true;
    }
    if (gt.op == Op::open || gt.op == Op::open_b || gt.op == Op::output || gt.op == Op::output_b)
      W[gt.in[0]].needE = true;
    if (gt.op == Op::dsbits) {
      ds_off[gi] = ds_total;
      ds_total += std::size_t(C.wire(gt.out).len) * gt.k;
    }
    bool trunc = (gt.op == Op::mul || gt.op == Op::dotp) && gt.trunc > 0;
    if (trunc && opt.trgen == TrGen::dsbits) {
      ds_off[gi] = ds_total;
      ds_total += std::size_t(C.wire(gt.out).len) * 64;
    }
    auto& inter = gt.nested ? inter_nested : inter_main;
    auto& lin = gt.nested ? lin_nested : lin_main;
    int& mx = gt.nested ? max_nested : max_main;
    mx = std::max(mx, L);
    if (inter.size() <= std::size_t(L)) inter.resize(L + 1), lin.resize(L + 1);
    if (lin.size() <= std::size_t(L)) lin.resize(L + 1);
    if (op_interactive(gt.op)) inter[L].push_back(static_cast<int>(gi));
    else lin[L].push_back(static_cast<int>(gi));
  }
  inter_main.resize(max_main + 1), lin_main.resize(max_main + 1);
  inter_nested.resize(max_nested + 1), lin_nested.resize(max_nested + 1);
}

void Engine::set_lam(int w, Words&& v) {
  auto& s = W[w];
  s.lam = std::move(v);
  s.lam_ok = true;
  const std::size_t L = len(w);
  if (boolean(w)) {
    u64 mk = wmask(w);
    for (auto& x : s.lam) x &= mk;
  }
  if (inE && s.needE && s.lamE.empty()) {
    s.lamE.resize(L);
    if (boolean(w)) slots_sum<B64>(idx.e_slots(me), s.lam.data(), L, L, s.lamE.data());
    else slots_sum<Z64>(idx.e_slots(me), s.lam.data(), L, L, s.lamE.data());
  }
  if (s.uses == 0 && !mal) {
    Words().swap(s.lam);
    s.lam_ok = false;
  }
}

void Engine::materialize(int w) {
  const Wire& wr = C.wire(w);
  const Gate& gt = C.gates()[wr.producer];
  const std::size_t L = wr.len;
  Words v(std::size_t(g) * L);
  std::uint64_t label = make_label(Purpose::lambda, static_cast<std::uint64_t>(wr.producer));
  if (gt.op == Op::input || gt.op == Op::input_b) {
    pi_prand<Z64>(ks, idx, gt.owner, label, L, v.data(), nullptr);
  } else if (gt.op == Op::rand_in) {
    pi_rand<Z64>(ks, idx, label, L, v.data());
  } else {
    throw std::logic_error(std::string("mask of wire produced by ") + op_name(gt.op) + " is not available");
  }
  int keep = W[w].uses;
  W[w].uses = keep + 1;  // the caller's pending read
  set_lam(w, std::move(v));
  W[w].uses = keep;
}

const u64* Engine::lam(int w) {
  if (C.wire(w).pub) throw std::logic_error("public wire has no mask");
  if (!W[w].lam_ok) materialize(w);
  return W[w].lam.data();
}

void Engine::release(int w) {
  if (w < 0 || C.wire(w).pub) return;
  auto& s = W[w];
  if (--s.uses <= 0 && !mal) {
    Words().swap(s.lam);
    s.lam_ok = false;
  }
}

// Masks of every wire, in gate order.
void Engine::propagate() {
  const auto& gates = C.gates();
  for (std::size_t gi = 0; gi < gates.size(); ++gi) {
    const Gate& gt = gates[gi];
    if (gt.out < 0 || C.wire(gt.out).pub) continue;
    const int o = gt.out;
    const std::size_t L = len(o);
    const bool bo = boolean(o);
    auto in_lam = [&](int w) -> const u64* { return C.wire(w).pub ? nullptr : lam(w); };
    Words v;
    auto fresh = [&](Purpose p) {
      v.resize(std::size_t(g) * L);
      pi_rand<Z64>(ks, idx, make_label(p, gi), L, v.data());
    };
    switch (gt.op) {
      case Op::input:
      case Op::input_b:
      case Op::rand_in:
      case Op::dsbits:
        continue;  // created on demand or in the bit stage
      case Op::add:
      case Op::sub:
      case Op::bxor: {
        const std::size_t La = len(gt.in[0]);
        const u64* a = in_lam(gt.in[0]);
        const u64* b = in_lam(gt.in[1]);
        v.assign(std::size_t(g) * L, 0);
        for (std::size_t i = 0; i < v.size(); ++i) {
          u64 x = a ? a[i] : 0, y = b ? b[i] : 0;
          v[i] = gt.op == Op::add ? x + y : gt.op == Op::sub ? x - y : (x ^ y);
        }
        (void)La;
        break;
      }
      case Op::neg: {
        const u64* a = lam(gt.in[0]);
        v.resize(std::size_t(g) * L);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = u64(0) - a[i];
        break;
      }
      case Op::cmul: {
        const u64* a = lam(gt.in[0]);
        v.resize(std::size_t(g) * L);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * gt.k;
        break;
      }
      case Op::addc:
      case Op::bxorc: {
        const u64* a = lam(gt.in[0]);
        v.assign(a, a + std::size_t(g) * L);
        break;
      }
      case Op::bandc: {
        const u64* a = lam(gt.in[0]);
        v.resize(std::size_t(g) * L);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] & gt.k;
        break;
      }
      case Op::bshl:
      case Op::bshr: {
        const u64* a = lam(gt.in[0]);
        v.resize(std::size_t(g) * L);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = gt.op == Op::bshl ? a[i] << gt.k : a[i] >> gt.k;
        break;
      }
      case Op::wsum: {
        const u64* a = lam(gt.in[0]);
        const std::size_t k = gt.cvals.size(), La = len(gt.in[0]);
        v.assign(std::size_t(g) * L, 0);
        for (int s = 0; s < g; ++s)
          for (std::size_t e = 0; e < L; ++e) {
            u64 acc = 0;
            for (std::size_t i = 0; i < k; ++i) acc += gt.cvals[i] * a[s * La + e * k + i];
            v[s * L + e] = acc;
          }
        break;
      }
      case Op::unpack: {
        const u64* a = lam(gt.in[0]);
        const std::size_t La = len(gt.in[0]);
        const int lanes = C.wire(gt.in[0]).lanes;
        v.resize(std::size_t(g) * L);
        for (int s = 0; s < g; ++s)
          for (std::size_t e = 0; e < La; ++e)
            for (int i = 0; i < lanes; ++i) v[s * L + e * lanes + i] = (a[s * La + e] >> i) & 1;
        break;
      }
      case Op::gather: {
        const u64* a = in_lam(gt.in[0]);
        const std::size_t La = len(gt.in[0]);
        v.resize(std::size_t(g) * L);
        for (int s = 0; s < g; ++s)
          for (std::size_t e = 0; e < L; ++e) v[s * L + e] = a[s * La + gt.idx[e]];
        break;
      }
      case Op::concat: {
        v.assign(std::size_t(g) * L, 0);
        std::size_t off = 0;
        for (int w : gt.ins) {
          const std::size_t Lw = len(w);
          if (!C.wire(w).pub) {
            const u64* a = lam(w);
            for (int s = 0; s < g; ++s) std::copy(a + s * Lw, a + (s + 1) * Lw, v.begin() + s * L + off);
          }
          off += Lw;
        }
        break;
      }
      case Op::rss_in: {
        const u64* a = lam(gt.in[0]);
        v.resize(std::size_t(g) * L);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = u64(0) - a[i];
        break;
      }
      case Op::rss_in_b: {
        const u64* a = lam(gt.in[0]);
        v.assign(a, a + std::size_t(g) * L);
        break;
      }
      case Op::mul:
      case Op::dotp:
        if (gt.trunc > 0) {
          v = std::move(G[gi].rd);
          G[gi].rd.clear();
          for (auto& x : v) x = u64(0) - x;
        } else {
          fresh(Purpose::lambda);
          for (auto& x : v) x = u64(0) - x;
        }
        break;
      case Op::mul3:
      case Op::mul4:
      case Op::inject:
        fresh(Purpose::lambda);
        for (auto& x : v) x = u64(0) - x;
        break;
      case Op::band:
      case Op::band3:
      case Op::band4:
        fresh(Purpose::lambda);
        break;
      default:
        throw std::logic_error(std::string("unhandled gate in mask propagation: ") + op_name(gt.op));
    }
    if (!is_product(gt.op))
      for (int w : lam_inputs(gt)) release(w);
    (void)bo;
    set_lam(o, std::move(v));
  }
}

PartyResult Engine::run(const std::map<int, Words>& inputs) {
  PartyResult res;
  res.party = me;
  auto t0 = std::chrono::steady_clock::now();
  int stage = 0;
  try {
    analyze();
    for (const auto& [w, v] : inputs) {
      if (w < 0 || w >= static_cast<int>(C.wires().size())) throw std::invalid_argument("input for unknown wire");
      const Gate& gt = C.gates()[C.wire(w).producer];
      if ((gt.op != Op::input && gt.op != Op::input_b) || gt.owner != me)
        throw std::invalid_argument("wire " + std::to_string(w) + " is not an input owned by party " + std::to_string(me));
      if (v.size() != len(w)) throw std::invalid_argument("input length mismatch on wire " + std::to_string(w));
    }
    for (const auto& gt : C.gates())
      if ((gt.op == Op::input || gt.op == Op::input_b) && gt.owner == me && !inputs.count(gt.out))
        throw std::invalid_argument("missing value for input wire " + std::to_string(gt.out));

    stage_bits();
    if (opt.trgen == TrGen::dealer) stage_trgen_dealer();
    propagate();
    pipeline(true);
    levels(true);
    pipeline(false);
    if (mal && opt.fair) fair_commit();
    res.prep_s = seconds_since(t0);

    stage = 1;
    auto t1 = std::chrono::steady_clock::now();
    inputs_round(inputs);
    if (inE) levels(false);
    if (mal) d_replay();
    std::vector<Words> outs;
    if (!mal) outs = outputs_semi();
    res.online_s = seconds_since(t1);

    if (mal) {
      stage = 2;
      auto t2 = std::chrono::steady_clock::now();
      agree();
      verify();
      outs = opt.fair ? outputs_fair() : outputs_abort();
      res.verify_s = seconds_since(t2);
    }
    res.outputs = std::move(outs);
    res.have_outputs = true;
    if (needs_dealer(C, opt)) {
      Writer w;
      w.put(0, 8);
      comm.dealer_send(w);
    }
  } catch (const AbortError& e) {
    res.ok = false;
    res.abort_phase = phase_name(e.phase);
    res.abort_tag = e.tag;
    res.abort_reason = e.what();
    res.suspects = e.suspects;
    comm.broadcast_abort();
  } catch (const TransportError& e) {
    res.ok = false;
    res.abort_phase = stage == 0 ? "prep" : stage == 1 ? "online" : "verify";
    res.abort_tag = "transport";
    res.abort_reason = e.what();
    comm.broadcast_abort();
  } catch (...) {
    comm.broadcast_abort();
    throw;
  }
  res.meter = comm.meter();
  return res;
}

}  // namespace detail

PartyResult run_party(const Circuit& c, int n, int party, Endpoint& ep, const EngineOptions& o,
                      const std::map<int, std::vector<std::uint64_t>>& inputs, FaultInjector* faults) {
  detail::Engine e(c, n, party, ep, o, faults);
  return e.run(inputs);
}

}  // namespace hmpc
