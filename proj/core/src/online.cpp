#include <algorithm>
#include <bit>
#include <stdexcept>

#include "engine_impl.hpp"

namespace hmpc::detail {

const u64* Engine::lamE_of(int w) {
  if (C.wire(w).pub) {
    if (zbuf.size() < len(w)) zbuf.assign(len(w), 0);
    return zbuf.data();
  }
  auto& s = W[w];
  if (s.lamE.empty()) {
    if (!s.needE) throw std::logic_error("E-additive mask requested for a wire not marked for it");
    materialize(w);
  }
  if (s.lamE.size() != len(w)) throw std::logic_error("E-additive mask missing");
  return s.lamE.data();
}

void Engine::inputs_round(const std::map<int, Words>& inputs) {
  const bool need_m = inE || mal;
  bool any = false;
  for (const Gate& gt : C.gates()) any = any || gt.op == Op::input || gt.op == Op::input_b;
  if (!any) return;
  Round r = comm.round(Phase::online, "input");
  std::vector<bool> from(n, false);
  for (const Gate& gt : C.gates()) {
    if (gt.op != Op::input && gt.op != Op::input_b) continue;
    if (gt.owner == me) {
      const int w = gt.out;
      const std::size_t L = len(w);
      Words shares(std::size_t(g) * L), full(L);
      const std::uint64_t label = make_label(Purpose::lambda, C.wire(w).producer);
      if (boolean(w)) pi_prand<B64>(ks, idx, me, label, L, shares.data(), full.data());
      else pi_prand<Z64>(ks, idx, me, label, L, shares.data(), full.data());
      const Words& x = inputs.at(w);
      Words m(L);
      const u64 mk = wmask(w);
      for (std::size_t e = 0; e < L; ++e) m[e] = boolean(w) ? ((x[e] ^ full[e]) & mk) : x[e] + full[e];
      for (int p = 0; p < n; ++p)
        if (p != me && (mal || ps.in_E(p))) put_vec(r.to(p), m.data(), L, wbits(w));
      if (need_m) {
        W[w].m = std::move(m);
        W[w].m_ok = true;
      }
    } else if (need_m) {
      from[gt.owner] = true;
    }
  }
  for (int p = 0; p < n; ++p)
    if (from[p]) r.expect(p);
  r.run();
  if (!need_m) return;
  for (const Gate& gt : C.gates()) {
    if ((gt.op != Op::input && gt.op != Op::input_b) || gt.owner == me) continue;
    const int w = gt.out;
    W[w].m.resize(len(w));
    get_vec(r.from(gt.owner), W[w].m.data(), len(w), wbits(w));
    W[w].m_ok = true;
  }
}

void Engine::eval_linear(int gi) {
  const Gate& gt = C.gates()[gi];
  if (gt.out < 0) return;
  const int o = gt.out;
  const std::size_t L = len(o);
  auto M = [&](int w) -> const Words& {
    if (!W[w].m_ok) throw std::logic_error(std::string("masked value missing for ") + op_name(gt.op));
    return W[w].m;
  };
  Words v(L, 0);
  switch (gt.op) {
    case Op::input:
    case Op::input_b:
      return;
    case Op::rand_in:
    case Op::rss_in:
    case Op::rss_in_b:
      break;
    case Op::dsbits:
      W[gt.out2].m.assign(len(gt.out2), 0);
      W[gt.out2].m_ok = true;
      break;
    case Op::constant:
    case Op::constant_b:
      v = gt.cvals;
      break;
    case Op::add:
    case Op::sub:
    case Op::bxor: {
      const Words& a = M(gt.in[0]);
      const Words& b = M(gt.in[1]);
      for (std::size_t e = 0; e < L; ++e)
        v[e] = gt.op == Op::add ? a[e] + b[e] : gt.op == Op::sub ? a[e] - b[e] : (a[e] ^ b[e]);
      break;
    }
    case Op::neg: {
      const Words& a = M(gt.in[0]);
      for (std::size_t e = 0; e < L; ++e) v[e] = u64(0) - a[e];
      break;
    }
    case Op::cmul: {
      const Words& a = M(gt.in[0]);
      for (std::size_t e = 0; e < L; ++e) v[e] = a[e] * gt.k;
      break;
    }
    case Op::addc: {
      const Words& a = M(gt.in[0]);
      for (std::size_t e = 0; e < L; ++e) v[e] = a[e] + gt.k;
      break;
    }
    case Op::bxorc: {
      const Words& a = M(gt.in[0]);
      for (std::size_t e = 0; e < L; ++e) v[e] = a[e] ^ gt.k;
      break;
    }
    case Op::bandc: {
      const Words& a = M(gt.in[0]);
      for (std::size_t e = 0; e < L; ++e) v[e] = a[e] & gt.k;
      break;
    }
    case Op::bshl:
    case Op::bshr: {
      const Words& a = M(gt.in[0]);
      for (std::size_t e = 0; e < L; ++e) v[e] = gt.op == Op::bshl ? a[e] << gt.k : a[e] >> gt.k;
      break;
    }
    case Op::wsum: {
      const Words& a = M(gt.in[0]);
      const std::size_t k = gt.cvals.size();
      for (std::size_t e = 0; e < L; ++e) {
        u64 acc = 0;
        for (std::size_t i = 0; i < k; ++i) acc += gt.cvals[i] * a[e * k + i];
        v[e] = acc;
      }
      break;
    }
    case Op::unpack: {
      const Words& a = M(gt.in[0]);
      const int lanes = C.wire(gt.in[0]).lanes;
      for (std::size_t e = 0; e < a.size(); ++e)
        for (int i = 0; i < lanes; ++i) v[e * lanes + i] = (a[e] >> i) & 1;
      break;
    }
    case Op::gather: {
      const Words& a = M(gt.in[0]);
      for (std::size_t e = 0; e < L; ++e) v[e] = a[gt.idx[e]];
      break;
    }
    case Op::concat: {
      std::size_t off = 0;
      for (int w : gt.ins) {
        const Words& a = M(w);
        std::copy(a.begin(), a.end(), v.begin() + off);
        off += a.size();
      }
      break;
    }
    case Op::mbits:
      v = M(gt.in[0]);
      break;
    case Op::bitpub: {
      const Words& a = M(gt.in[0]);
      for (std::size_t e = 0; e < L; ++e) v[e] = a[e] & 1;
      break;
    }
    default:
      throw std::logic_error(std::string("not a local gate: ") + op_name(gt.op));
  }
  if (boolean(o)) {
    const u64 mk = wmask(o);
    for (auto& x : v) x &= mk;
  }
  W[o].m = std::move(v);
  W[o].m_ok = true;
}

// This party's E-additive share of z - r for an interactive gate.
void Engine::zeta(int gi, Words& z) {
  const Gate& gt = C.gates()[gi];
  const int o = gt.out;
  const std::size_t L = len(o);
  const bool b = boolean(o);
  z.assign(L, 0);
  auto M = [&](int w) -> const u64* {
    if (!W[w].m_ok) throw std::logic_error("masked operand missing");
    return W[w].m.data();
  };
  auto& T = G[gi].T;
  switch (gt.op) {
    case Op::open:
    case Op::open_b: {
      const int a = gt.in[0];
      const u64* E = lamE_of(a);
      const u64* m = M(a);
      for (std::size_t e = 0; e < L; ++e) {
        u64 mk = is_king ? m[e] : 0;
        z[e] = b ? (E[e] ^ mk) : mk - E[e];
      }
      return;
    }
    case Op::dotp: {
      const int x = gt.in[0], y = gt.in[1];
      const std::size_t nf = gt.nf;
      const u64 *mx = M(x), *my = M(y), *lx = lamE_of(x), *ly = lamE_of(y);
      const u64* t = T[0].data();
      for (std::size_t e = 0; e < L; ++e) {
        u64 s = t[e];
        const std::size_t xo = gt.bcast ? 0 : e * nf, yo = e * nf;
        for (std::size_t k = 0; k < nf; ++k) {
          s -= my[yo + k] * lx[xo + k] + mx[xo + k] * ly[yo + k];
          if (is_king) s += mx[xo + k] * my[yo + k];
        }
        z[e] = s;
      }
      return;
    }
    case Op::inject: {
      const int sb = gt.in[0], v = gt.in[1];
      const u64 *mb = M(sb), *mv = M(v), *lv = lamE_of(v);
      const u64 *gam = T[0].data(), *er = G[gi].extra_r.data(), *lb = G[gi].extra_lb.data();
      for (std::size_t e = 0; e < L; ++e) {
        const u64 bit = mb[e] & 1, c = 2 * bit - 1;
        u64 s = u64(0) - bit * lv[e] + c * gam[e] - c * mv[e] * lb[e] - er[e];
        if (is_king) s += bit * mv[e];
        z[e] = s;
      }
      return;
    }
    default:
      break;
  }
  const int k = k_of(gt);
  const u64* m[4] = {};
  for (int i = 0; i < k; ++i) m[i] = M(gt.in[i]);
  for (unsigned S = 0; S < (1u << k); ++S) {
    const int pc = std::popcount(S);
    const u64* f = nullptr;
    if (pc == 0) {
      if (!is_king) continue;
    } else if (pc == 1) {
      f = lamE_of(gt.in[std::countr_zero(S)]);
    } else {
      f = T[term_index(k, S)].data();
    }
    const bool neg = !b && (pc % 2 == 1);
    for (std::size_t e = 0; e < L; ++e) {
      u64 c = b ? ~u64(0) : 1;
      for (int i = 0; i < k; ++i)
        if (!((S >> i) & 1)) c = b ? (c & m[i][e]) : c * m[i][e];
      if (b) {
        z[e] ^= f ? (c & f[e]) : c;
      } else {
        u64 v = f ? c * f[e] : c;
        z[e] = neg ? z[e] - v : z[e] + v;
      }
    }
  }
  if (b)
    for (auto& x : z) x &= wmask(o);
}

void Engine::finalize(int gi) {
  const Gate& gt = C.gates()[gi];
  const int o = gt.out;
  const Words& p = G[gi].p;
  Words m(p);
  if ((gt.op == Op::mul || gt.op == Op::dotp) && gt.trunc > 0)
    for (auto& x : m) x = asr(x, gt.trunc) + 1;
  if (boolean(o))
    for (auto& x : m) x &= wmask(o);
  W[o].m = std::move(m);
  W[o].m_ok = true;
  G[gi].T.clear();
  G[gi].T.shrink_to_fit();
}

void Engine::levels(bool nested) {
  if (!inE && !mal) return;
  const auto& inter = nested ? inter_nested : inter_main;
  const auto& lin = nested ? lin_nested : lin_main;
  const Phase ph = nested ? Phase::prep : Phase::online;
  const char* tag = nested ? "nested" : "eval";
  const bool d_receives = mal && nested;
  for (std::size_t L = 0; L < inter.size(); ++L) {
    const auto& IG = inter[L];
    if (!IG.empty() && (inE || d_receives)) {
      std::vector<Words> z(IG.size());
      if (inE) {
        Round r1 = comm.round(ph, tag);
        for (std::size_t i = 0; i < IG.size(); ++i) zeta(IG[i], z[i]);
        if (is_king) {
          for (int p = 0; p < king; ++p) r1.expect(p);
        } else {
          Writer& w = r1.to(king);
          for (std::size_t i = 0; i < IG.size(); ++i) put_vec(w, z[i].data(), z[i].size(), wbits(C.gates()[IG[i]].out));
        }
        r1.run();
        if (is_king)
          for (int p = 0; p < king; ++p) {
            Reader& rd = r1.from(p);
            for (std::size_t i = 0; i < IG.size(); ++i) {
              const int o = C.gates()[IG[i]].out;
              Words in(z[i].size());
              get_vec(rd, in.data(), in.size(), wbits(o));
              for (std::size_t e = 0; e < in.size(); ++e) z[i][e] = boolean(o) ? (z[i][e] ^ in[e]) : z[i][e] + in[e];
            }
          }
      }
      Round r2 = comm.round(ph, tag);
      if (is_king) {
        Writer out;
        for (std::size_t i = 0; i < IG.size(); ++i) put_vec(out, z[i].data(), z[i].size(), wbits(C.gates()[IG[i]].out));
        for (int p = 0; p < n; ++p)
          if (p != me && (ps.in_E(p) || d_receives)) {
            Writer copy = out;
            r2.to(p) = std::move(copy);
          }
        r2.run();
        for (std::size_t i = 0; i < IG.size(); ++i) G[IG[i]].p = std::move(z[i]);
      } else {
        r2.expect(king);
        r2.run();
        Reader& rd = r2.from(king);
        for (std::size_t i = 0; i < IG.size(); ++i) {
          const int o = C.gates()[IG[i]].out;
          G[IG[i]].p.resize(len(o));
          get_vec(rd, G[IG[i]].p.data(), len(o), wbits(o));
        }
      }
      for (int gi : IG) finalize(gi);
    }
    for (int gi : lin[L]) eval_linear(gi);
  }
}

void Engine::d_replay() {
  if (inE && !is_king) return;
  bool any = false;
  for (const auto& IG : inter_main) any = any || !IG.empty();
  if (!any) {
    if (!inE)
      for (const auto& LG : lin_main)
        for (int gi : LG) eval_linear(gi);
    return;
  }
  Round r = comm.round(Phase::online, "dbatch");
  if (is_king) {
    Writer w;
    for (const auto& IG : inter_main)
      for (int gi : IG) put_vec(w, G[gi].p.data(), G[gi].p.size(), wbits(C.gates()[gi].out));
    for (int p = king + 1; p < n; ++p) {
      Writer copy = w;
      r.to(p) = std::move(copy);
    }
    r.run();
    return;
  }
  r.expect(king);
  r.run();
  Reader& rd = r.from(king);
  for (std::size_t L = 0; L < inter_main.size(); ++L) {
    for (int gi : inter_main[L]) {
      const int o = C.gates()[gi].out;
      G[gi].p.resize(len(o));
      get_vec(rd, G[gi].p.data(), len(o), wbits(o));
      finalize(gi);
    }
    for (int gi : lin_main[L]) eval_linear(gi);
  }
}

std::vector<Words> Engine::outputs_semi() {
  const auto& outs = C.outputs();
  std::vector<Words> res(outs.size());
  if (outs.empty()) return res;
  Round r1 = comm.round(Phase::online, "output");
  if (inE) {
    if (is_king) {
      for (int p = 0; p < king; ++p) r1.expect(p);
    } else {
      Writer& w = r1.to(king);
      for (int o : outs) put_vec(w, lamE_of(o), len(o), wbits(o));
    }
    r1.run();
  }
  Round r2 = comm.round(Phase::online, "output");
  if (is_king) {
    for (std::size_t i = 0; i < outs.size(); ++i) {
      const int o = outs[i];
      const u64* E = lamE_of(o);
      res[i].assign(E, E + len(o));
    }
    for (int p = 0; p < king; ++p) {
      Reader& rd = r1.from(p);
      for (std::size_t i = 0; i < outs.size(); ++i) {
        const int o = outs[i];
        Words in(len(o));
        get_vec(rd, in.data(), in.size(), wbits(o));
        for (std::size_t e = 0; e < in.size(); ++e) res[i][e] = boolean(o) ? (res[i][e] ^ in[e]) : res[i][e] + in[e];
      }
    }
    Writer w;
    for (std::size_t i = 0; i < outs.size(); ++i) {
      const int o = outs[i];
      const Words& m = W[o].m;
      for (std::size_t e = 0; e < res[i].size(); ++e)
        res[i][e] = boolean(o) ? ((m[e] ^ res[i][e]) & wmask(o)) : m[e] - res[i][e];
      put_vec(w, res[i].data(), res[i].size(), wbits(o));
    }
    for (int p = 0; p < n; ++p)
      if (p != me) {
        Writer copy = w;
        r2.to(p) = std::move(copy);
      }
    r2.run();
  } else {
    r2.expect(king);
    r2.run();
    Reader& rd = r2.from(king);
    for (std::size_t i = 0; i < outs.size(); ++i) {
      res[i].resize(len(outs[i]));
      get_vec(rd, res[i].data(), res[i].size(), wbits(outs[i]));
    }
  }
  return res;
}

}  // namespace hmpc::detail
