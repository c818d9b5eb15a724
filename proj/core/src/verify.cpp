#include <sodium.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <set>
#include <stdexcept>

#include "engine_impl.hpp"

namespace hmpc::detail {

namespace {

template <class R>
void put_w(Writer& w, const Word<R>* v, std::size_t len) {
  if constexpr (R::bits == 64) w.put_words(v, len);
  else
    for (std::size_t e = 0; e < len; ++e) w.put128(v[e], R::bits);
}

template <class R>
void get_w(Reader& r, Word<R>* v, std::size_t len) {
  if constexpr (R::bits == 64) r.get_words(v, len);
  else
    for (std::size_t e = 0; e < len; ++e) v[e] = r.get128(R::bits);
}

Key128 theta_key(const KeyStore& ks, const Digest& agreed) {
  Hasher h;
  h.update(ks.all_key().data(), ks.all_key().size());
  h.update(agreed.data(), agreed.size());
  Digest d = h.finish();
  Key128 k{};
  std::copy(d.begin(), d.begin() + k.size(), k.begin());
  return k;
}

Digest commitment(int out, int j, const u64* lam, std::size_t len, const Key128& rho) {
  Hasher h;
  h.update_pod(static_cast<std::uint32_t>(out));
  h.update_pod(static_cast<std::uint32_t>(j));
  h.update(lam, len * sizeof(u64));
  h.update(rho.data(), rho.size());
  return h.finish();
}

}  // namespace

void Engine::agree() {
  Hasher h;
  for (std::size_t gi = 0; gi < C.gates().size(); ++gi) {
    const Gate& gt = C.gates()[gi];
    if (gt.op == Op::input || gt.op == Op::input_b) {
      const Words& m = W[gt.out].m;
      h.update(m.data(), m.size() * sizeof(u64));
    } else if (op_interactive(gt.op)) {
      const Words& p = G[gi].p;
      h.update(p.data(), p.size() * sizeof(u64));
    }
  }
  for (u128 c : ds_c) h.update_pod(c);
  agree_digest = h.finish();
  Round r = comm.round(Phase::verify, "agree");
  for (int p = 0; p < n; ++p)
    if (p != me) r.to(p).put_bytes(agree_digest.data(), agree_digest.size());
  r.expect_all_but_me();
  r.run();
  for (int p = 0; p < n; ++p) {
    if (p == me) continue;
    Digest d{};
    r.from(p).get_bytes(d.data(), d.size());
    if (d != agree_digest)
      throw AbortError(Phase::verify, "agree", "public values differ from party " + std::to_string(p), {p});
  }
}

template <class R>
std::vector<typename R::word> Engine::rec_robust(const std::vector<typename R::word>& rss, std::size_t len, Phase ph,
                                                 const std::string& tag) {
  using Wd = typename R::word;
  const auto& held = idx.held(me);
  auto send_set = [&](int s, int p, bool designated) {
    std::vector<int> js;
    for (int j = 0; j < idx.q(); ++j)
      if (idx.holds(s, j) && !idx.holds(p, j) && ((idx.first_holder(j) == s) == designated)) js.push_back(j);
    return js;
  };
  auto hash_of = [&](const std::vector<int>& js, auto&& value_of) {
    Hasher h;
    for (int j : js) {
      h.update_pod(static_cast<std::uint32_t>(j));
      const Wd* v = value_of(j);
      h.update(v, len * sizeof(Wd));
    }
    return h.finish();
  };
  Round r = comm.round(ph, tag);
  for (int p = 0; p < n; ++p) {
    if (p == me) continue;
    auto vals = send_set(me, p, true);
    auto hs = send_set(me, p, false);
    if (vals.empty() && hs.empty()) continue;
    Writer& w = r.to(p);
    for (int j : vals) put_w<R>(w, rss.data() + idx.slot(me, j) * len, len);
    if (!hs.empty()) {
      Digest d = hash_of(hs, [&](int j) { return rss.data() + idx.slot(me, j) * len; });
      w.put_bytes(d.data(), d.size());
    }
  }
  std::vector<int> senders;
  for (int s = 0; s < n; ++s)
    if (s != me && (!send_set(s, me, true).empty() || !send_set(s, me, false).empty())) {
      senders.push_back(s);
      r.expect(s);
    }
  r.run();
  std::vector<std::vector<Wd>> got(idx.q());
  std::vector<Digest> hashes(n);
  for (int s : senders) {
    Reader& rd = r.from(s);
    for (int j : send_set(s, me, true)) {
      got[j].resize(len);
      get_w<R>(rd, got[j].data(), len);
    }
    if (!send_set(s, me, false).empty()) rd.get_bytes(hashes[s].data(), 32);
  }
  for (int s : senders) {
    auto hs = send_set(s, me, false);
    if (hs.empty()) continue;
    Digest want = hash_of(hs, [&](int j) { return got[j].data(); });
    if (want != hashes[s])
      throw AbortError(ph, tag, "inconsistent replicated shares reported by party " + std::to_string(s), {s});
  }
  std::vector<Wd> out(len, Wd{});
  for (int j = 0; j < idx.q(); ++j) {
    const Wd* v = idx.holds(me, j) ? rss.data() + idx.slot(me, j) * len : got[j].data();
    for (std::size_t e = 0; e < len; ++e) out[e] = R::add(out[e], v[e]);
  }
  (void)held;
  return out;
}

template std::vector<u64> Engine::rec_robust<Z64>(const std::vector<u64>&, std::size_t, Phase, const std::string&);
template std::vector<u64> Engine::rec_robust<B64>(const std::vector<u64>&, std::size_t, Phase, const std::string&);
template std::vector<u128> Engine::rec_robust<Z66>(const std::vector<u128>&, std::size_t, Phase, const std::string&);

// Random linear combination of every multiplication and opening relation, reconstructed and checked for zero.
void Engine::verify() {
  const int kappa = std::max(1, opt.kappa);
  const Key128 tk = theta_key(ks, agree_digest);
  const int t1 = idx.slot(me, 0);
  Words omegaA(std::size_t(g) * kappa, 0), omegaB(std::size_t(g) * kappa, 0);
  std::vector<PrfStream> thA, thB;
  for (int k = 0; k < kappa; ++k) {
    thA.emplace_back(tk, make_label(Purpose::theta, 0, k));
    thB.emplace_back(tk, make_label(Purpose::theta, 1, k));
  }
  const auto& gates = C.gates();
  Words th;
  for (std::size_t gi = 0; gi < gates.size(); ++gi) {
    const Gate& gt = gates[gi];
    if (!op_interactive(gt.op)) continue;
    const int o = gt.out;
    const std::size_t L = len(o);
    const bool b = boolean(o);
    const Words& p = G[gi].p;
    Words d(std::size_t(g) * L, 0);
    auto add_rss = [&](const u64* x, std::size_t xs, const u64* coef, bool negate) {
      for (int a = 0; a < g; ++a)
        for (std::size_t e = 0; e < L; ++e) {
          u64 c = coef ? coef[e] : (b ? ~u64(0) : 1);
          if (b) d[a * L + e] ^= c & x[a * xs + e];
          else d[a * L + e] += negate ? u64(0) - c * x[a * xs + e] : c * x[a * xs + e];
        }
    };
    Words pub(L, 0);
    if (gt.op == Op::open || gt.op == Op::open_b) {
      const int a = gt.in[0];
      pub = W[a].m;
      add_rss(lam(a), len(a), nullptr, false);
    } else if (gt.op == Op::dotp) {
      const int x = gt.in[0], y = gt.in[1];
      const std::size_t nf = gt.nf, Lx = len(x), Ly = len(y);
      const Words &mx = W[x].m, &my = W[y].m;
      const u64* lx = C.wire(x).pub ? nullptr : lam(x);
      const u64* ly = C.wire(y).pub ? nullptr : lam(y);
      for (std::size_t e = 0; e < L; ++e) {
        const std::size_t xo = gt.bcast ? 0 : e * nf, yo = e * nf;
        u64 s = 0;
        for (std::size_t k = 0; k < nf; ++k) s += mx[xo + k] * my[yo + k];
        pub[e] = s;
        for (int a = 0; a < g; ++a) {
          u64 acc = 0;
          for (std::size_t k = 0; k < nf; ++k) {
            if (lx) acc += my[yo + k] * lx[a * Lx + xo + k];
            if (ly) acc += mx[xo + k] * ly[a * Ly + yo + k];
          }
          d[a * L + e] += acc;
        }
      }
      add_rss(G[gi].Trss[0].data(), L, nullptr, true);
    } else if (gt.op == Op::inject) {
      const int sb = gt.in[0], v = gt.in[1];
      const Words &mb = W[sb].m, &mv = W[v].m;
      Words cb(L), cmv(L), bit(L);
      for (std::size_t e = 0; e < L; ++e) {
        bit[e] = mb[e] & 1;
        cb[e] = 2 * bit[e] - 1;
        cmv[e] = cb[e] * mv[e];
        pub[e] = bit[e] * mv[e];
      }
      Job j;
      j.gate = static_cast<int>(gi);
      std::size_t us = 0;
      Words tmp;
      const u64* u = factor_rss(j, Factor{Fk::val, gt.in[2]}, us, tmp);
      if (!C.wire(v).pub) add_rss(lam(v), len(v), bit.data(), false);
      add_rss(G[gi].Trss[0].data(), L, cb.data(), true);
      add_rss(u, us, cmv.data(), false);
      Words r = r_rss(static_cast<int>(gi));
      add_rss(r.data(), L, nullptr, false);
    } else {
      const int k = k_of(gt);
      const u64* m[4] = {};
      for (int i = 0; i < k; ++i) m[i] = W[gt.in[i]].m.data();
      Words c(L);
      for (unsigned S = 0; S < (1u << k); ++S) {
        for (std::size_t e = 0; e < L; ++e) {
          u64 v = b ? ~u64(0) : 1;
          for (int i = 0; i < k; ++i)
            if (!((S >> i) & 1)) v = b ? (v & m[i][e]) : v * m[i][e];
          c[e] = v;
        }
        const int pc = std::popcount(S);
        if (pc == 0) {
          pub = c;
          continue;
        }
        const bool neg = (pc % 2 == 1);
        if (pc == 1) {
          const int w = gt.in[std::countr_zero(S)];
          if (C.wire(w).pub) continue;
          add_rss(lam(w), len(w), c.data(), !neg);
        } else {
          add_rss(G[gi].Trss[term_index(k, S)].data(), L, c.data(), !neg);
        }
      }
    }
    if (t1 >= 0)
      for (std::size_t e = 0; e < L; ++e) d[t1 * L + e] = b ? (d[t1 * L + e] ^ p[e] ^ pub[e]) : d[t1 * L + e] + p[e] - pub[e];
    if (b)
      for (auto& x : d) x &= wmask(o);
    th.resize(L);
    for (int k = 0; k < kappa; ++k) {
      (b ? thB : thA)[k].fill(th.data(), L * sizeof(u64));
      Words& om = b ? omegaB : omegaA;
      for (int a = 0; a < g; ++a) {
        u64 acc = 0;
        for (std::size_t e = 0; e < L; ++e) acc = b ? (acc ^ (th[e] & d[a * L + e])) : acc + th[e] * d[a * L + e];
        om[a * kappa + k] = b ? (om[a * kappa + k] ^ acc) : om[a * kappa + k] + acc;
      }
    }
  }
  Words128 omegaC(std::size_t(g) * kappa, 0);
  if (ds_total > 0) {
    const std::size_t N = ds_total;
    for (int k = 0; k < kappa; ++k) {
      PrfStream s(tk, make_label(Purpose::theta, 2, k));
      Words128 th66(N);
      fill_words<Z66>(s, th66.data(), N);
      for (int a = 0; a < g; ++a) {
        u128 acc = 0;
        for (std::size_t e = 0; e < N; ++e) {
          u128 dv = ds_a2[a * N + e];
          if (a == t1) dv = Z66::sub(dv, Z66::mul(ds_c[e], ds_c[e]));
          acc = Z66::add(acc, Z66::mul(th66[e], dv));
        }
        omegaC[a * kappa + k] = acc;
      }
    }
  }
  auto zA = rec_robust<Z64>(omegaA, kappa, Phase::verify, "vrec");
  auto zB = rec_robust<B64>(omegaB, kappa, Phase::verify, "vrec");
  bool ok = std::all_of(zA.begin(), zA.end(), [](u64 v) { return v == 0; }) &&
            std::all_of(zB.begin(), zB.end(), [](u64 v) { return v == 0; });
  if (ds_total > 0) {
    auto zC = rec_robust<Z66>(omegaC, kappa, Phase::verify, "vrec");
    ok = ok && std::all_of(zC.begin(), zC.end(), [](u128 v) { return v == 0; });
  }
  Round r = comm.round(Phase::verify, "verdict");
  for (int p = 0; p < n; ++p)
    if (p != me) r.to(p).put(ok ? 1 : 0, 8);
  r.expect_all_but_me();
  r.run();
  if (!ok) throw AbortError(Phase::verify, "verify", "multiplication check failed");
  for (int p = 0; p < n; ++p)
    if (p != me && r.from(p).get(8) != 1)
      throw AbortError(Phase::verify, "verdict", "party " + std::to_string(p) + " reported a failed check");
}

std::vector<Words> Engine::outputs_abort() {
  const auto& outs = C.outputs();
  std::vector<Words> res(outs.size());
  for (int pass = 0; pass < 2; ++pass) {
    Words rss;
    std::vector<std::size_t> which;
    std::size_t total = 0;
    for (std::size_t i = 0; i < outs.size(); ++i)
      if (boolean(outs[i]) == (pass == 1)) which.push_back(i), total += len(outs[i]);
    if (which.empty()) continue;
    rss.assign(std::size_t(g) * total, 0);
    std::size_t off = 0;
    for (std::size_t i : which) {
      const int o = outs[i];
      const std::size_t L = len(o);
      if (!C.wire(o).pub) {
        const u64* l = lam(o);
        for (int a = 0; a < g; ++a) std::copy(l + a * L, l + (a + 1) * L, rss.begin() + a * total + off);
      }
      off += L;
    }
    auto lamv = pass == 1 ? rec_robust<B64>(rss, total, Phase::verify, "output")
                          : rec_robust<Z64>(rss, total, Phase::verify, "output");
    off = 0;
    for (std::size_t i : which) {
      const int o = outs[i];
      const std::size_t L = len(o);
      res[i].resize(L);
      for (std::size_t e = 0; e < L; ++e)
        res[i][e] = pass == 1 ? ((W[o].m[e] ^ lamv[off + e]) & wmask(o)) : W[o].m[e] - lamv[off + e];
      off += L;
    }
  }
  return res;
}

void Engine::fair_commit() {
  const auto& outs = C.outputs();
  const int q = idx.q();
  fair_commits.assign(outs.size() * q, Digest{});
  auto rho = [&](std::size_t oi, int j) {
    PrfStream s(ks.subset_key(j), make_label(Purpose::commit, oi));
    Key128 k{};
    s.fill(k.data(), k.size());
    return k;
  };
  auto lam_slot = [&](int o, int j) -> const u64* {
    if (C.wire(o).pub) {
      if (zbuf.size() < len(o)) zbuf.assign(len(o), 0);
      return zbuf.data();
    }
    return lam(o) + idx.slot(me, j) * len(o);
  };
  for (std::size_t oi = 0; oi < outs.size(); ++oi)
    for (int j : idx.held(me)) fair_commits[oi * q + j] = commitment(static_cast<int>(oi), j, lam_slot(outs[oi], j), len(outs[oi]), rho(oi, j));
  Round r = comm.round(Phase::prep, "commit");
  for (int p = 0; p < n; ++p) {
    if (p == me) continue;
    Writer& w = r.to(p);
    for (std::size_t oi = 0; oi < outs.size(); ++oi)
      for (int j : idx.held(me))
        if (!idx.holds(p, j)) w.put_bytes(fair_commits[oi * q + j].data(), 32);
  }
  r.expect_all_but_me();
  r.run();
  std::vector<bool> seen(outs.size() * q, false);
  for (int s = 0; s < n; ++s) {
    if (s == me) continue;
    Reader& rd = r.from(s);
    for (std::size_t oi = 0; oi < outs.size(); ++oi)
      for (int j : idx.held(s)) {
        if (idx.holds(me, j)) continue;
        Digest d{};
        rd.get_bytes(d.data(), 32);
        const std::size_t at = oi * q + j;
        if (!seen[at]) {
          fair_commits[at] = d;
          seen[at] = true;
        } else if (fair_commits[at] != d) {
          throw AbortError(Phase::prep, "commit", "conflicting output commitments", {s});
        }
      }
  }
}

namespace {

struct Signer {
  std::array<unsigned char, crypto_sign_PUBLICKEYBYTES> pk{};
  std::array<unsigned char, crypto_sign_SECRETKEYBYTES> sk{};
};

Signer signer_for(std::uint64_t seed, int party) {
  Key128 a = derive_key(seed, "sign-lo", party), b = derive_key(seed, "sign-hi", party);
  unsigned char s[crypto_sign_SEEDBYTES];
  std::memcpy(s, a.data(), 16);
  std::memcpy(s + 16, b.data(), 16);
  Signer out;
  crypto_sign_seed_keypair(out.pk.data(), out.sk.data(), s);
  return out;
}

using Sig = std::array<unsigned char, crypto_sign_BYTES>;

struct Chain {
  int sender = 0;
  int value = 0;
  std::vector<std::pair<int, Sig>> sigs;
};

std::vector<unsigned char> alive_msg(const Digest& run, int sender, int value) {
  std::vector<unsigned char> m = {'a', 'l', 'i', 'v', 'e'};
  m.insert(m.end(), run.begin(), run.end());
  m.push_back(static_cast<unsigned char>(sender));
  m.push_back(static_cast<unsigned char>(value));
  return m;
}

}  // namespace

// Agreement on every party's alive bit by a signed-chain broadcast, then opening of the committed output masks.
std::vector<Words> Engine::outputs_fair() {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
  const auto& outs = C.outputs();
  const int q = idx.q();
  std::vector<Signer> keys;
  for (int p = 0; p < n; ++p) keys.push_back(signer_for(ks.seed(), p));
  auto sign = [&](int s, int v) {
    auto m = alive_msg(agree_digest, s, v);
    Sig sig{};
    crypto_sign_detached(sig.data(), nullptr, m.data(), m.size(), keys[me].sk.data());
    return sig;
  };
  std::vector<std::set<int>> V(n);
  std::vector<Chain> queue;
  {
    Chain c{me, 1, {{me, sign(me, 1)}}};
    V[me].insert(1);
    queue.push_back(c);
  }
  const int t = ps.t;
  for (int rnd = 1; rnd <= t + 1; ++rnd) {
    Round r = comm.round(Phase::verify, "alive");
    r.tolerate_aborts();
    for (int p = 0; p < n; ++p) {
      if (p == me) continue;
      Writer& w = r.to(p);
      w.put(queue.size(), 8);
      for (const auto& c : queue) {
        w.put(c.sender, 8);
        w.put(c.value, 8);
        w.put(c.sigs.size(), 8);
        for (const auto& [who, sig] : c.sigs) {
          w.put(who, 8);
          w.put_bytes(sig.data(), sig.size());
        }
      }
    }
    r.expect_all_but_me();
    r.run();
    std::vector<Chain> next;
    for (int p = 0; p < n; ++p) {
      if (p == me || !r.has(p)) continue;
      std::vector<Chain> in;
      try {
        Reader& rd = r.from(p);
        const int cnt = static_cast<int>(rd.get(8));
        for (int i = 0; i < cnt; ++i) {
          Chain c;
          c.sender = static_cast<int>(rd.get(8));
          c.value = static_cast<int>(rd.get(8));
          const int k = static_cast<int>(rd.get(8));
          for (int s = 0; s < k; ++s) {
            int who = static_cast<int>(rd.get(8));
            Sig sig{};
            rd.get_bytes(sig.data(), sig.size());
            c.sigs.emplace_back(who, sig);
          }
          in.push_back(std::move(c));
        }
      } catch (const std::exception&) {
        continue;
      }
      for (auto& c : in) {
        if (c.sender < 0 || c.sender >= n || (c.value != 0 && c.value != 1)) continue;
        if (static_cast<int>(c.sigs.size()) < rnd || c.sigs.empty() || c.sigs[0].first != c.sender) continue;
        std::set<int> signers;
        bool good = true;
        auto m = alive_msg(agree_digest, c.sender, c.value);
        for (const auto& [who, sig] : c.sigs) {
          if (who < 0 || who >= n || !signers.insert(who).second ||
              crypto_sign_verify_detached(sig.data(), m.data(), m.size(), keys[who].pk.data()) != 0) {
            good = false;
            break;
          }
        }
        if (!good || V[c.sender].count(c.value)) continue;
        V[c.sender].insert(c.value);
        if (rnd <= t && !signers.count(me)) {
          c.sigs.emplace_back(me, sign(c.sender, c.value));
          next.push_back(std::move(c));
        }
      }
    }
    queue = std::move(next);
  }
  for (int s = 0; s < n; ++s)
    if (V[s] != std::set<int>{1})
      throw AbortError(Phase::verify, "alive", "party " + std::to_string(s) + " is not alive", {s});

  Round r = comm.round(Phase::verify, "open");
  r.tolerate_aborts();
  for (int p = 0; p < n; ++p) {
    if (p == me) continue;
    Writer& w = r.to(p);
    for (std::size_t oi = 0; oi < outs.size(); ++oi) {
      const int o = outs[oi];
      for (int j : idx.held(me)) {
        if (idx.holds(p, j)) continue;
        if (C.wire(o).pub) {
          Words z(len(o), 0);
          w.put_words(z.data(), z.size());
        } else {
          w.put_words(lam(o) + idx.slot(me, j) * len(o), len(o));
        }
        PrfStream s(ks.subset_key(j), make_label(Purpose::commit, oi));
        Key128 k{};
        s.fill(k.data(), k.size());
        w.put_bytes(k.data(), k.size());
      }
    }
  }
  r.expect_all_but_me();
  r.run();
  // opened[oi][j]: the mask share of subset j
  std::vector<std::vector<Words>> opened(outs.size(), std::vector<Words>(q));
  for (int s = 0; s < n; ++s) {
    if (s == me || !r.has(s)) continue;
    try {
      Reader& rd = r.from(s);
      for (std::size_t oi = 0; oi < outs.size(); ++oi) {
        const int o = outs[oi];
        for (int j : idx.held(s)) {
          if (idx.holds(me, j)) continue;
          Words v(len(o));
          rd.get_words(v.data(), v.size());
          Key128 k{};
          rd.get_bytes(k.data(), k.size());
          if (opened[oi][j].empty() &&
              commitment(static_cast<int>(oi), j, v.data(), v.size(), k) == fair_commits[oi * q + j])
            opened[oi][j] = std::move(v);
        }
      }
    } catch (const std::exception&) {
    }
  }
  std::vector<Words> res(outs.size());
  for (std::size_t oi = 0; oi < outs.size(); ++oi) {
    const int o = outs[oi];
    const std::size_t L = len(o);
    const bool b = boolean(o);
    Words lamv(L, 0);
    for (int j = 0; j < q; ++j) {
      const u64* v;
      if (idx.holds(me, j)) {
        if (C.wire(o).pub) continue;
        v = lam(o) + idx.slot(me, j) * L;
      } else {
        if (opened[oi][j].empty()) throw AbortError(Phase::verify, "open", "no valid opening for a committed share");
        v = opened[oi][j].data();
      }
      for (std::size_t e = 0; e < L; ++e) lamv[e] = b ? (lamv[e] ^ v[e]) : lamv[e] + v[e];
    }
    res[oi].resize(L);
    for (std::size_t e = 0; e < L; ++e)
      res[oi][e] = b ? ((W[o].m[e] ^ lamv[e]) & wmask(o)) : W[o].m[e] - lamv[e];
  }
  return res;
}

}  // namespace hmpc::detail
