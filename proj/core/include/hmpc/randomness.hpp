#pragma once

#include <cstddef>
#include <vector>

#include "hmpc/prf.hpp"
#include "hmpc/share.hpp"

namespace hmpc {

template <class R>
void fill_words(PrfStream& s, Word<R>* out, std::size_t len) {
  s.fill(out, len * sizeof(Word<R>));
  if constexpr (R::bits != 64)
    for (std::size_t e = 0; e < len; ++e) out[e] = R::norm(out[e]);
}

// RSS of a fresh random vector: out is slot-major, g * len words.
template <class R>
void pi_rand(const KeyStore& ks, const SubsetIndex& idx, std::uint64_t label, std::size_t len, Word<R>* out) {
  const auto& held = idx.held(ks.party());
  for (std::size_t a = 0; a < held.size(); ++a) {
    PrfStream s(ks.subset_key(held[a]), label);
    fill_words<R>(s, out + a * len, len);
  }
}

template <class R>
std::vector<Word<R>> pi_rand(const KeyStore& ks, const SubsetIndex& idx, std::uint64_t label, std::size_t len) {
  std::vector<Word<R>> out(idx.g() * len);
  pi_rand<R>(ks, idx, label, len, out.data());
  return out;
}

// Like pi_rand, but owner learns every share; if the caller is the owner, full receives the value.
template <class R>
void pi_prand(const KeyStore& ks, const SubsetIndex& idx, int owner, std::uint64_t label, std::size_t len,
              Word<R>* out, Word<R>* full) {
  const int me = ks.party();
  const auto& held = idx.held(me);
  auto key_for = [&](int j) -> const Key128& {
    if (idx.holds(owner, j)) return ks.subset_key(j);
    return ks.wide_key(idx.mask(j) | (1u << owner));
  };
  for (std::size_t a = 0; a < held.size(); ++a) {
    PrfStream s(key_for(held[a]), label);
    fill_words<R>(s, out + a * len, len);
  }
  if (me == owner && full) {
    std::vector<Word<R>> tmp(len);
    for (std::size_t e = 0; e < len; ++e) full[e] = Word<R>{};
    for (int j = 0; j < idx.q(); ++j) {
      PrfStream s(key_for(j), label);
      fill_words<R>(s, tmp.data(), len);
      for (std::size_t e = 0; e < len; ++e) full[e] = R::add(full[e], tmp[e]);
    }
  }
}

// Additive sharing of zero from ring-neighbour keys: <0>_i = r_i - r_{i-1}.
template <class R>
void pi_zero(const KeyStore& ks, const PartySet& ps, std::uint64_t label, std::size_t len, Word<R>* out) {
  const int me = ks.party();
  PrfStream mine(ks.pair_key((me + 1) % ps.n), label);
  PrfStream prev(ks.pair_key((me + ps.n - 1) % ps.n), label);
  std::vector<Word<R>> a(len), b(len);
  fill_words<R>(mine, a.data(), len);
  fill_words<R>(prev, b.data(), len);
  for (std::size_t e = 0; e < len; ++e) out[e] = R::sub(a[e], b[e]);
}

// Per-party additive share of x*y from two RSS vectors (slot-major), accumulated into out.
template <class R>
void rss_mul_acc(const SubsetIndex& idx, int party, const Word<R>* x, const Word<R>* y, std::size_t len,
                 Word<R>* out) {
  const auto& plan = idx.mul_plan(party);
  std::vector<Word<R>> ysum(len);
  for (std::size_t a = 0; a < plan.size(); ++a) {
    if (plan[a].empty()) continue;
    std::fill(ysum.begin(), ysum.end(), Word<R>{});
    for (int b : plan[a]) {
      const Word<R>* yb = y + b * len;
      for (std::size_t e = 0; e < len; ++e) ysum[e] = R::add(ysum[e], yb[e]);
    }
    const Word<R>* xa = x + a * len;
    for (std::size_t e = 0; e < len; ++e) out[e] = R::add(out[e], R::mul(xa[e], ysum[e]));
  }
}

// Sum of the slots a party is charged with for a T-additive conversion.
template <class R>
void rss_to_tadd_vec(const std::vector<int>& slots, const Word<R>* x, std::size_t len, Word<R>* out) {
  for (std::size_t e = 0; e < len; ++e) out[e] = Word<R>{};
  for (int a : slots) {
    const Word<R>* xa = x + a * len;
    for (std::size_t e = 0; e < len; ++e) out[e] = R::add(out[e], xa[e]);
  }
}

}  // namespace hmpc
