#include <algorithm>
#include <bit>
#include <stdexcept>

#include "engine_impl.hpp"

namespace hmpc::detail {

namespace {

constexpr std::size_t kChunk = 4096;
constexpr std::size_t kDealerWords = 1 << 16;

struct SlotStreams {
  std::vector<PrfStream> s;
  SlotStreams(const KeyStore& ks, const SubsetIndex& idx, std::uint64_t label) {
    for (int j : idx.held(ks.party())) s.emplace_back(ks.subset_key(j), label);
  }
};

}  // namespace

void Engine::dealer_status(Reader& r) {
  if (r.get(8) != 0) throw AbortError(Phase::prep, "dealer", "dealer rejected inconsistent shares");
}

std::vector<Words> Engine::dealer_mul(bool boolean_ring, const std::vector<DealerJob>& jobs) {
  Writer w;
  w.put(1, 8);
  w.put(boolean_ring ? 1 : 0, 8);
  w.put(jobs.size(), 32);
  std::size_t modeled = 0;
  for (const auto& j : jobs) {
    w.put(j.len, 32);
    w.put(j.nf, 32);
    w.put(j.bcast ? 1 : 0, 8);
    const std::size_t xl = j.bcast ? j.nf : j.len * j.nf, yl = j.len * j.nf;
    for (int a = 0; a < g; ++a) w.put_words(j.x + a * j.xs, xl);
    for (int a = 0; a < g; ++a) w.put_words(j.y + a * j.ys, yl);
    modeled += j.len;
  }
  comm.dealer_send(w);
  if (is_king) comm.meter().modeled(Phase::prep, "mulpre", modeled_bits(64, modeled));
  Reader r = comm.dealer_recv();
  dealer_status(r);
  std::vector<Words> out;
  for (const auto& j : jobs) {
    Words z(std::size_t(g) * j.len);
    r.get_words(z.data(), z.size());
    out.push_back(std::move(z));
  }
  return out;
}

Words128 Engine::dealer_mul66(const Words128& a, std::size_t len) {
  if (is_king) comm.meter().modeled(Phase::prep, "mulpre", modeled_bits(66, len));
  Words128 z(std::size_t(g) * len);
  const std::size_t step = std::max<std::size_t>(64, kDealerWords / g);
  for (std::size_t b0 = 0; b0 < len || b0 == 0; b0 += step) {
    const std::size_t cnt = std::min(step, len - b0);
    Writer w;
    w.put(1, 8);
    w.put(2, 8);
    w.put(1, 32);
    w.put(cnt, 32);
    w.put(1, 32);
    w.put(2, 8);
    for (int s = 0; s < g; ++s)
      for (std::size_t e = 0; e < cnt; ++e) {
        const u128 v = a[s * len + b0 + e];
        w.put(static_cast<u64>(v), 64);
        w.put(static_cast<u64>(v >> 64), 64);
      }
    comm.dealer_send(w);
    Reader r = comm.dealer_recv();
    dealer_status(r);
    for (int s = 0; s < g; ++s)
      for (std::size_t e = 0; e < cnt; ++e) {
        u128 lo = r.get(64);
        u128 hi = r.get(64);
        z[s * len + b0 + e] = lo | (hi << 64);
      }
    if (len == 0) break;
  }
  return z;
}

// Doubly-shared bits for dsbits gates and for truncation pairs, in one batch.
void Engine::stage_bits() {
  if (ds_total == 0) return;
  const std::size_t N = ds_total;
  const auto& held = idx.held(me);
  const int t1 = idx.slot(me, 0);
  const std::uint64_t ulabel = make_label(Purpose::dsbits_u, 0);
  Words128 cvals(N);

  auto a_slot = [&](u128 u, int a) { return Z66::norm((u << 1) + (a == t1 ? 1 : 0)); };

  if (!mal) {
    Writer msg;
    Words128 acc;
    if (is_king) acc.resize(N);
    SlotStreams us(ks, idx, ulabel);
    PrfStream zmine(ks.pair_key((me + 1) % n), make_label(Purpose::dsbits_zero, 0));
    PrfStream zprev(ks.pair_key((me + n - 1) % n), make_label(Purpose::dsbits_zero, 0));
    const auto& plan = idx.mul_plan(me);
    std::vector<u128> av(std::size_t(g) * kChunk), z1(kChunk), z2(kChunk);
    for (std::size_t b0 = 0; b0 < N; b0 += kChunk) {
      const std::size_t cnt = std::min(kChunk, N - b0);
      for (int a = 0; a < g; ++a) {
        fill_words<Z66>(us.s[a], av.data() + a * kChunk, cnt);
        for (std::size_t e = 0; e < cnt; ++e) av[a * kChunk + e] = a_slot(av[a * kChunk + e], a);
      }
      fill_words<Z66>(zmine, z1.data(), cnt);
      fill_words<Z66>(zprev, z2.data(), cnt);
      for (std::size_t e = 0; e < cnt; ++e) {
        u128 s = Z66::sub(z1[e], z2[e]);
        for (int a = 0; a < g; ++a) {
          u128 ys = 0;
          for (int b : plan[a]) ys += av[b * kChunk + e];
          s += av[a * kChunk + e] * ys;
        }
        s = Z66::norm(s);
        if (is_king) acc[b0 + e] = s;
        else msg.put128(s, 66);
      }
    }
    Round r1 = comm.round(Phase::prep, "dsbits");
    if (is_king) {
      r1.expect_all_but_me();
    } else {
      r1.to(king) = std::move(msg);
    }
    r1.run();
    Round r2 = comm.round(Phase::prep, "dsbits");
    if (is_king) {
      for (int p = 0; p < n; ++p) {
        if (p == me) continue;
        Reader& rd = r1.from(p);
        for (std::size_t e = 0; e < N; ++e) acc[e] = Z66::add(acc[e], rd.get128(66));
      }
      Writer out;
      for (std::size_t e = 0; e < N; ++e) {
        cvals[e] = smallest_sqrt_mod2k(acc[e], 66);
        out.put128(cvals[e], 66);
      }
      for (int p = 0; p < n; ++p)
        if (p != me) {
          Writer copy = out;
          r2.to(p) = std::move(copy);
        }
    } else {
      r2.expect(king);
    }
    r2.run();
    if (!is_king) {
      Reader& rd = r2.from(king);
      for (std::size_t e = 0; e < N; ++e) cvals[e] = rd.get128(66);
    }
  } else {
    Words128 av(std::size_t(g) * N);
    {
      SlotStreams us(ks, idx, ulabel);
      for (int a = 0; a < g; ++a) {
        fill_words<Z66>(us.s[a], av.data() + a * N, N);
        for (std::size_t e = 0; e < N; ++e) av[a * N + e] = a_slot(av[a * N + e], a);
      }
    }
    ds_a2 = dealer_mul66(av, N);
    Words128().swap(av);
    Round r1 = comm.round(Phase::prep, "dsbits");
    Words128 acc;
    if (inE) {
      acc.assign(N, 0);
      for (int a : idx.e_slots(me))
        for (std::size_t e = 0; e < N; ++e) acc[e] = Z66::add(acc[e], ds_a2[a * N + e]);
      if (is_king) {
        for (int p = 0; p < king; ++p) r1.expect(p);
      } else {
        Writer& w = r1.to(king);
        for (std::size_t e = 0; e < N; ++e) w.put128(acc[e], 66);
      }
      r1.run();
    }
    Round r2 = comm.round(Phase::prep, "dsbits");
    if (is_king) {
      for (int p = 0; p < king; ++p) {
        Reader& rd = r1.from(p);
        for (std::size_t e = 0; e < N; ++e) acc[e] = Z66::add(acc[e], rd.get128(66));
      }
      Writer out;
      for (std::size_t e = 0; e < N; ++e) {
        if ((acc[e] & 7) != 1) throw AbortError(Phase::prep, "dsbits", "square is not a quadratic residue");
        cvals[e] = smallest_sqrt_mod2k(acc[e], 66);
        out.put128(cvals[e], 66);
      }
      for (int p = 0; p < n; ++p)
        if (p != me) {
          Writer copy = out;
          r2.to(p) = std::move(copy);
        }
    } else {
      r2.expect(king);
    }
    r2.run();
    if (!is_king) {
      Reader& rd = r2.from(king);
      for (std::size_t e = 0; e < N; ++e) {
        cvals[e] = rd.get128(66);
        if ((cvals[e] & 1) == 0) throw AbortError(Phase::prep, "dsbits", "even square root received");
      }
    }
  }

  // Derive the bits: d = c^-1 a + 1 is even in every share, b = d / 2.
  Words128 cinv(N);
  for (std::size_t e = 0; e < N; ++e) cinv[e] = inverse_mod2k(cvals[e], 66);
  SlotStreams us(ks, idx, ulabel);
  std::vector<u128> ub(kChunk);
  auto next_bits = [&](std::size_t off, std::size_t cnt, Words& bA, Words& bB) {
    bA.assign(std::size_t(g) * cnt, 0);
    bB.assign(std::size_t(g) * cnt, 0);
    for (int a = 0; a < g; ++a) {
      for (std::size_t b0 = 0; b0 < cnt; b0 += kChunk) {
        const std::size_t c = std::min(kChunk, cnt - b0);
        fill_words<Z66>(us.s[a], ub.data(), c);
        for (std::size_t e = 0; e < c; ++e) {
          u128 d = Z66::mul(cinv[off + b0 + e], a_slot(ub[e], a)) + (a == t1 ? 1 : 0);
          d = Z66::norm(d);
          u128 b = d >> 1;
          bA[a * cnt + b0 + e] = static_cast<u64>(b);
          bB[a * cnt + b0 + e] = static_cast<u64>(b & 1);
        }
      }
    }
  };
  (void)held;
  const auto& gates = C.gates();
  for (std::size_t gi = 0; gi < gates.size(); ++gi) {
    const Gate& gt = gates[gi];
    const bool trunc = (gt.op == Op::mul || gt.op == Op::dotp) && gt.trunc > 0 && opt.trgen == TrGen::dsbits;
    if (gt.op != Op::dsbits && !trunc) continue;
    const std::size_t L = len(gt.out);
    const int lanes = gt.op == Op::dsbits ? static_cast<int>(gt.k) : 64;
    Words bA, bB;
    next_bits(ds_off[gi], L * lanes, bA, bB);
    const std::size_t cnt = L * lanes;
    if (gt.op == Op::dsbits) {
      Words ra(std::size_t(g) * L, 0), rb(std::size_t(g) * L, 0);
      for (int a = 0; a < g; ++a)
        for (std::size_t e = 0; e < L; ++e) {
          u64 x = 0, y = 0;
          for (int i = 0; i < lanes; ++i) {
            x += bA[a * cnt + e * lanes + i] << i;
            y |= bB[a * cnt + e * lanes + i] << i;
          }
          ra[a * L + e] = u64(0) - x;
          rb[a * L + e] = y;
        }
      set_lam(gt.out, std::move(ra));
      set_lam(gt.out2, std::move(rb));
    } else {
      const int d = gt.trunc;
      Words r(std::size_t(g) * L, 0), rd(std::size_t(g) * L, 0);
      for (int a = 0; a < g; ++a)
        for (std::size_t e = 0; e < L; ++e) {
          u64 x = 0, y = 0;
          const u64* b = bA.data() + a * cnt + e * 64;
          for (int i = 0; i < 64; ++i) x += b[i] << i;
          for (int i = d; i < 63; ++i) y += b[i] << (i - d);
          y -= b[63] << (63 - d);
          r[a * L + e] = x;
          rd[a * L + e] = y;
        }
      G[gi].r = std::move(r);
      G[gi].rd = std::move(rd);
    }
  }
  if (mal) ds_c = std::move(cvals);
}

void Engine::stage_trgen_dealer() {
  Writer w;
  w.put(2, 8);
  std::vector<int> gl;
  for (std::size_t gi = 0; gi < C.gates().size(); ++gi) {
    const Gate& gt = C.gates()[gi];
    if ((gt.op == Op::mul || gt.op == Op::dotp) && gt.trunc > 0) gl.push_back(static_cast<int>(gi));
  }
  if (gl.empty()) return;
  w.put(gl.size(), 32);
  for (int gi : gl) {
    w.put(len(C.gates()[gi].out), 32);
    w.put(C.gates()[gi].trunc, 8);
  }
  comm.dealer_send(w);
  Reader r = comm.dealer_recv();
  dealer_status(r);
  for (int gi : gl) {
    const std::size_t L = len(C.gates()[gi].out);
    G[gi].r.resize(std::size_t(g) * L);
    G[gi].rd.resize(std::size_t(g) * L);
    r.get_words(G[gi].r.data(), G[gi].r.size());
    r.get_words(G[gi].rd.data(), G[gi].rd.size());
  }
}

std::vector<Job> Engine::make_jobs(int gi) const {
  const Gate& gt = C.gates()[gi];
  std::vector<Job> js;
  auto lamf = [&](int w) { return Factor{Fk::lam, w}; };
  auto termf = [&](int t) { return Factor{Fk::term, t}; };
  auto add = [&](int term, Factor x, Factor y, int stage, bool reveal, bool full) {
    Job j;
    j.gate = gi, j.term = term, j.x = x, j.y = y, j.stage = stage, j.reveal = reveal, j.full = full;
    js.push_back(j);
  };
  if (gt.op == Op::dotp) {
    add(0, lamf(gt.in[0]), lamf(gt.in[1]), 1, false, true);
    return js;
  }
  if (gt.op == Op::inject) {
    add(0, Factor{Fk::val, gt.in[2]}, lamf(gt.in[1]), 1, false, false);
    return js;
  }
  const int k = k_of(gt);
  const int* w = gt.in;
  if (k == 2) {
    add(0, lamf(w[0]), lamf(w[1]), 1, false, true);
  } else if (k == 3) {
    add(term_index(3, 3), lamf(w[0]), lamf(w[1]), 1, true, false);
    add(term_index(3, 5), lamf(w[0]), lamf(w[2]), 1, false, false);
    add(term_index(3, 6), lamf(w[1]), lamf(w[2]), 1, false, false);
    add(term_index(3, 7), termf(term_index(3, 3)), lamf(w[2]), 2, false, true);
  } else {
    const int ab = term_index(4, 3), cd = term_index(4, 12);
    add(ab, lamf(w[0]), lamf(w[1]), 1, true, false);
    add(cd, lamf(w[2]), lamf(w[3]), 1, true, false);
    add(term_index(4, 5), lamf(w[0]), lamf(w[2]), 1, false, false);
    add(term_index(4, 9), lamf(w[0]), lamf(w[3]), 1, false, false);
    add(term_index(4, 6), lamf(w[1]), lamf(w[2]), 1, false, false);
    add(term_index(4, 10), lamf(w[1]), lamf(w[3]), 1, false, false);
    add(term_index(4, 7), termf(ab), lamf(w[2]), 2, false, false);
    add(term_index(4, 11), termf(ab), lamf(w[3]), 2, false, false);
    add(term_index(4, 13), lamf(w[0]), termf(cd), 2, false, false);
    add(term_index(4, 14), lamf(w[1]), termf(cd), 2, false, false);
    add(term_index(4, 15), termf(ab), termf(cd), 2, false, true);
  }
  return js;
}

const u64* Engine::factor_rss(const Job& j, const Factor& f, std::size_t& stride, Words& tmp) {
  switch (f.kind) {
    case Fk::lam:
      stride = len(f.id);
      if (C.wire(f.id).pub) {
        tmp = zero_rss(f.id);
        return tmp.data();
      }
      return lam(f.id);
    case Fk::term:
      stride = len(C.gates()[j.gate].out);
      return G[j.gate].Trss[f.id].data();
    case Fk::val: {
      const int w = f.id;
      const std::size_t L = len(w);
      stride = L;
      const u64* l = lam(w);
      tmp.resize(std::size_t(g) * L);
      for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = u64(0) - l[i];
      const int t1 = idx.slot(me, 0);
      if (t1 >= 0)
        for (std::size_t e = 0; e < L; ++e) tmp[t1 * L + e] += W[w].m[e];
      return tmp.data();
    }
  }
  return nullptr;
}

// RSS of the mask r carried by the last product term: the output mask with sign fixed, or the truncation r.
Words Engine::r_rss(int gi) {
  const Gate& gt = C.gates()[gi];
  if ((gt.op == Op::mul || gt.op == Op::dotp) && gt.trunc > 0) return G[gi].r;
  const u64* l = lam(gt.out);
  Words r(l, l + std::size_t(g) * len(gt.out));
  if (!boolean(gt.out))
    for (auto& x : r) x = u64(0) - x;
  return r;
}

void Engine::product_additive(const Job& j, u64* out) {
  const Gate& gt = C.gates()[j.gate];
  const std::size_t L = len(gt.out);
  std::size_t xs = 0, ys = 0;
  Words tx, ty, scratch;
  const u64* x = factor_rss(j, j.x, xs, tx);
  const u64* y = factor_rss(j, j.y, ys, ty);
  std::fill(out, out + L, u64(0));
  const bool b = boolean(gt.out);
  auto run = [&](const u64* xp, std::size_t xst, const u64* yp, std::size_t yst, std::size_t cnt, u64* o) {
    if (b) mul_acc<B64>(idx, me, xp, xst, yp, yst, cnt, o, scratch);
    else mul_acc<Z64>(idx, me, xp, xst, yp, yst, cnt, o, scratch);
  };
  const std::size_t nf = gt.op == Op::dotp ? gt.nf : 1;
  if (nf == 1) {
    run(x, xs, y, ys, L, out);
    return;
  }
  Words tmp(gt.bcast ? nf : L * nf, 0);
  if (!gt.bcast) {
    run(x, xs, y, ys, L * nf, tmp.data());
    for (std::size_t e = 0; e < L; ++e) {
      u64 s = 0;
      for (std::size_t k = 0; k < nf; ++k) s += tmp[e * nf + k];
      out[e] = s;
    }
  } else {
    for (std::size_t e = 0; e < L; ++e) {
      std::fill(tmp.begin(), tmp.end(), u64(0));
      run(x, xs, y + e * nf, ys, nf, tmp.data());
      u64 s = 0;
      for (std::size_t k = 0; k < nf; ++k) s += tmp[k];
      out[e] = s;
    }
  }
}

void Engine::pipeline(bool nested) {
  const auto& gates = C.gates();
  std::vector<int> gl;
  for (std::size_t gi = 0; gi < gates.size(); ++gi)
    if (gates[gi].nested == nested && is_product(gates[gi].op)) gl.push_back(static_cast<int>(gi));
  if (gl.empty()) return;

  std::vector<Job> jobs;
  for (int gi : gl) {
    auto js = make_jobs(gi);
    const Gate& gt = gates[gi];
    int terms = 0;
    for (const auto& j : js) terms = std::max(terms, j.term + 1);
    G[gi].T.assign(terms, {});
    G[gi].Trss.assign(terms, {});
    jobs.insert(jobs.end(), js.begin(), js.end());
    (void)gt;
  }

  auto sign_of_r = [&](const Gate& gt) {
    // the last term holds gamma - (-1)^k r
    int k = gt.op == Op::dotp ? 2 : k_of(gt);
    return (k % 2 == 0) ? -1 : 1;
  };

  if (!mal) {
    Writer reveal_msg, corr_msg;
    std::vector<const Job*> reveals, corrs;
    auto zero_mask = [&](const Job& j, u64* v, std::size_t L, bool b) {
      Words z(L);
      if (b) pi_zero<B64>(ks, ps, make_label(Purpose::zero, j.gate, j.term + 1), L, z.data());
      else pi_zero<Z64>(ks, ps, make_label(Purpose::zero, j.gate, j.term + 1), L, z.data());
      for (std::size_t e = 0; e < L; ++e) v[e] = b ? (v[e] ^ z[e]) : v[e] + z[e];
    };
    auto do_stage = [&](int stage) {
      for (const Job& j : jobs) {
        if (j.stage != stage) continue;
        const Gate& gt = gates[j.gate];
        const std::size_t L = len(gt.out);
        const bool b = boolean(gt.out);
        const int bits = wbits(gt.out);
        Words v(L);
        product_additive(j, v.data());
        if (j.reveal) {
          Words rho(std::size_t(g) * L), ra(L);
          pi_rand<Z64>(ks, idx, make_label(Purpose::gamma_mask, j.gate, j.term), L, rho.data());
          if (b) slots_sum<B64>(idx.all_slots(me), rho.data(), L, L, ra.data());
          else slots_sum<Z64>(idx.all_slots(me), rho.data(), L, L, ra.data());
          for (std::size_t e = 0; e < L; ++e) v[e] = b ? (v[e] ^ ra[e]) : v[e] - ra[e];
          zero_mask(j, v.data(), L, b);
          if (b)
            for (auto& x : v) x &= wmask(gt.out);
          G[j.gate].Trss[j.term] = std::move(rho);
          if (is_king) G[j.gate].T[j.term] = std::move(v);
          else put_vec(reveal_msg, v.data(), L, bits);
          reveals.push_back(&j);
          continue;
        }
        if (j.full) {
          Words r = r_rss(j.gate), ra(L);
          if (b) slots_sum<B64>(idx.all_slots(me), r.data(), L, L, ra.data());
          else slots_sum<Z64>(idx.all_slots(me), r.data(), L, L, ra.data());
          const int s = sign_of_r(gt);
          for (std::size_t e = 0; e < L; ++e) v[e] = b ? (v[e] ^ ra[e]) : (s < 0 ? v[e] - ra[e] : v[e] + ra[e]);
        }
        zero_mask(j, v.data(), L, b);
        if (b)
          for (auto& x : v) x &= wmask(gt.out);
        if (inE) G[j.gate].T[j.term] = std::move(v);
        else put_vec(corr_msg, v.data(), L, bits);
        corrs.push_back(&j);
      }
    };
    do_stage(1);
    if (!reveals.empty()) {
      Round r1 = comm.round(Phase::prep, nested ? "nested" : "reveal");
      if (is_king) r1.expect_all_but_me();
      else r1.to(king) = std::move(reveal_msg);
      r1.run();
      Round r2 = comm.round(Phase::prep, nested ? "nested" : "reveal");
      if (is_king) {
        Writer out;
        for (int p = 0; p < n; ++p) {
          if (p == me) continue;
          Reader& rd = r1.from(p);
          for (const Job* j : reveals) {
            auto& v = G[j->gate].T[j->term];
            const int out_w = gates[j->gate].out;
            Words in(v.size());
            get_vec(rd, in.data(), in.size(), wbits(out_w));
            for (std::size_t e = 0; e < v.size(); ++e) v[e] = boolean(out_w) ? (v[e] ^ in[e]) : v[e] + in[e];
          }
        }
        for (const Job* j : reveals) put_vec(out, G[j->gate].T[j->term].data(), G[j->gate].T[j->term].size(), wbits(gates[j->gate].out));
        for (int p = 0; p < king; ++p) {
          Writer copy = out;
          r2.to(p) = std::move(copy);
        }
      } else if (inE) {
        r2.expect(king);
      }
      r2.run();
      for (const Job* j : reveals) {
        const int out_w = gates[j->gate].out;
        const std::size_t L = len(out_w);
        const bool b = boolean(out_w);
        Words delta;
        if (is_king) delta = std::move(G[j->gate].T[j->term]);
        else if (inE) {
          delta.resize(L);
          get_vec(r2.from(king), delta.data(), L, wbits(out_w));
        }
        auto& rss = G[j->gate].Trss[j->term];
        const int t1 = idx.slot(me, 0);
        if (t1 >= 0)
          for (std::size_t e = 0; e < L; ++e) rss[t1 * L + e] = b ? (rss[t1 * L + e] ^ delta[e]) : rss[t1 * L + e] + delta[e];
        if (inE) {
          auto& T = G[j->gate].T[j->term];
          T.assign(L, 0);
          if (b) slots_sum<B64>(idx.e_slots(me), rss.data(), L, L, T.data());
          else slots_sum<Z64>(idx.e_slots(me), rss.data(), L, L, T.data());
        } else {
          G[j->gate].T[j->term].clear();
        }
      }
    }
    do_stage(2);
    if (!corrs.empty()) {
      Round rc = comm.round(Phase::prep, nested ? "nested" : "corr");
      if (is_king) {
        for (int p = king + 1; p < n; ++p) rc.expect(p);
      } else if (!inE) {
        rc.to(king) = std::move(corr_msg);
      }
      if (is_king || !inE) rc.run();
      if (is_king) {
        for (int p = king + 1; p < n; ++p) {
          Reader& rd = rc.from(p);
          for (const Job* j : corrs) {
            auto& v = G[j->gate].T[j->term];
            const int out_w = gates[j->gate].out;
            Words in(v.size());
            get_vec(rd, in.data(), in.size(), wbits(out_w));
            for (std::size_t e = 0; e < v.size(); ++e) v[e] = boolean(out_w) ? (v[e] ^ in[e]) : v[e] + in[e];
          }
        }
      }
    }
    for (const Job& j : jobs) G[j.gate].Trss[j.term].clear();
  } else {
    for (int stage = 1; stage <= 2; ++stage) {
      for (int b = 0; b < 2; ++b) {
        std::vector<DealerJob> dj;
        std::vector<const Job*> owners;
        std::vector<Words> keep;
        keep.reserve(jobs.size() * 2);
        for (const Job& j : jobs) {
          const Gate& gt = gates[j.gate];
          if (j.stage != stage || boolean(gt.out) != (b == 1)) continue;
          std::size_t xs = 0, ys = 0;
          keep.emplace_back();
          Words& tx = keep.back();
          const u64* x = factor_rss(j, j.x, xs, tx);
          keep.emplace_back();
          Words& ty = keep.back();
          const u64* y = factor_rss(j, j.y, ys, ty);
          DealerJob d{x, y, xs, ys, len(gt.out), gt.op == Op::dotp ? gt.nf : 1, gt.op == Op::dotp && gt.bcast};
          dj.push_back(d);
          owners.push_back(&j);
        }
        if (dj.empty()) continue;
        auto res = dealer_mul(b == 1, dj);
        for (std::size_t i = 0; i < owners.size(); ++i) {
          const Job& j = *owners[i];
          const Gate& gt = gates[j.gate];
          Words z = std::move(res[i]);
          if (j.full) {
            Words r = r_rss(j.gate);
            const int s = sign_of_r(gt);
            for (std::size_t e = 0; e < z.size(); ++e)
              z[e] = b ? (z[e] ^ r[e]) : (s < 0 ? z[e] - r[e] : z[e] + r[e]);
          }
          if (b)
            for (auto& x : z) x &= wmask(gt.out);
          G[j.gate].Trss[j.term] = std::move(z);
        }
      }
    }
    if (inE)
      for (const Job& j : jobs) {
        const std::size_t L = len(gates[j.gate].out);
        auto& T = G[j.gate].T[j.term];
        T.assign(L, 0);
        if (boolean(gates[j.gate].out)) slots_sum<B64>(idx.e_slots(me), G[j.gate].Trss[j.term].data(), L, L, T.data());
        else slots_sum<Z64>(idx.e_slots(me), G[j.gate].Trss[j.term].data(), L, L, T.data());
      }
  }

  // bit injection: E-additive shares of r and of the selector's arithmetic mask bit
  if (inE)
    for (int gi : gl) {
      const Gate& gt = gates[gi];
      if (gt.op != Op::inject) continue;
      const std::size_t L = len(gt.out);
      Words r = r_rss(gi);
      G[gi].extra_r.assign(L, 0);
      slots_sum<Z64>(idx.e_slots(me), r.data(), L, L, G[gi].extra_r.data());
      const int u = gt.in[2];
      G[gi].extra_lb.resize(L);
      for (std::size_t e = 0; e < L; ++e) G[gi].extra_lb[e] = (is_king ? W[u].m[e] : 0) - W[u].lamE[e];
    }

  for (int gi : gl) {
    for (int w : lam_inputs(gates[gi])) release(w);
    release(gates[gi].out);
  }
}

}  // namespace hmpc::detail
