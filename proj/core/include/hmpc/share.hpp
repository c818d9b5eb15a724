#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "hmpc/ring.hpp"

namespace hmpc {

// Parties are numbered 0..n-1 internally; party i is P_{i+1}.
struct PartySet {
  int n = 0;
  int t = 0;

  explicit PartySet(int parties);
  int h() const { return t + 1; }
  int king() const { return t; }
  bool in_E(int i) const { return i <= t; }
  bool in_D(int i) const { return i > t; }
  std::uint32_t E_mask() const { return (1u << (t + 1)) - 1; }
  std::uint32_t all_mask() const { return (1u << n) - 1; }
};

// The q = C(n, t+1) subsets T_1..T_q in lexicographic order; T_1 = E.
class SubsetIndex {
 public:
  explicit SubsetIndex(const PartySet& ps);

  const PartySet& parties() const { return ps_; }
  int q() const { return static_cast<int>(masks_.size()); }
  int g() const { return g_; }
  std::uint32_t mask(int j) const { return masks_[j]; }
  bool holds(int party, int j) const { return (masks_[j] >> party) & 1; }
  const std::vector<int>& held(int party) const { return held_[party]; }
  int slot(int party, int j) const { return slot_[party * q() + j]; }
  std::vector<int> members(int j) const;
  int least_in(std::uint32_t T, int j) const;
  int first_holder(int j) const { return least_in(ps_.all_mask(), j); }

  // Local slots whose shares party i adds up to form its T-additive share.
  std::vector<int> tadd_slots(std::uint32_t T, int party) const;
  const std::vector<int>& e_slots(int party) const { return e_slots_[party]; }
  const std::vector<int>& all_slots(int party) const { return all_slots_[party]; }
  // For each local slot a of party i, the local slots b whose product term it owns.
  const std::vector<std::vector<int>>& mul_plan(int party) const { return mul_plan_[party]; }

 private:
  PartySet ps_;
  int g_ = 0;
  std::vector<std::uint32_t> masks_;
  std::vector<std::vector<int>> held_;
  std::vector<int> slot_;
  std::vector<std::vector<int>> e_slots_, all_slots_;
  std::vector<std::vector<std::vector<int>>> mul_plan_;
};

std::uint64_t binomial(int n, int k);

// Per-party views of the share types.
template <class R>
struct RssShare {
  int party = 0;
  std::vector<typename R::word> s;  // aligned with SubsetIndex::held(party)
};

template <class R>
struct MaskedShare {
  int party = 0;
  bool has_m = false;
  typename R::word m{};
  RssShare<R> lam;
};

template <class R>
using Word = typename R::word;

template <class R>
Word<R> rss_to_tadditive(const SubsetIndex& idx, const RssShare<R>& x, std::uint32_t T) {
  if (!((T >> x.party) & 1)) return Word<R>{};
  Word<R> acc{};
  for (int a : idx.tadd_slots(T, x.party)) acc = R::add(acc, x.s[a]);
  return acc;
}

template <class R>
Word<R> rss_to_additive(const SubsetIndex& idx, const RssShare<R>& x) {
  return rss_to_tadditive<R>(idx, x, idx.parties().all_mask());
}

// The designated party folds m into its share; defaults to Pking when it is in T.
inline int designated(const PartySet& ps, std::uint32_t T) {
  if ((T >> ps.king()) & 1) return ps.king();
  for (int i = 0; i < ps.n; ++i)
    if ((T >> i) & 1) return i;
  throw std::invalid_argument("empty party set");
}

template <class R>
Word<R> masked_to_tadditive(const SubsetIndex& idx, const MaskedShare<R>& x, std::uint32_t T) {
  if (!((T >> x.party) & 1)) return Word<R>{};
  Word<R> v = R::neg(rss_to_tadditive<R>(idx, x.lam, T));
  if (x.party == designated(idx.parties(), T)) {
    if (!x.has_m) throw std::logic_error("designated party lacks the masked value");
    v = R::add(v, x.m);
  }
  return v;
}

template <class R>
Word<R> masked_to_additive(const SubsetIndex& idx, const MaskedShare<R>& x) {
  return masked_to_tadditive<R>(idx, x, idx.parties().all_mask());
}

template <class R>
MaskedShare<R> rss_to_masked(const RssShare<R>& x) {
  MaskedShare<R> out;
  out.party = x.party;
  out.has_m = true;
  out.m = Word<R>{};
  out.lam.party = x.party;
  out.lam.s.reserve(x.s.size());
  for (auto v : x.s) out.lam.s.push_back(R::neg(v));
  return out;
}

template <class R>
RssShare<R> masked_to_rss(const SubsetIndex& idx, const MaskedShare<R>& x) {
  RssShare<R> out{x.party, {}};
  out.s.reserve(x.lam.s.size());
  for (auto v : x.lam.s) out.s.push_back(R::neg(v));
  int a = idx.slot(x.party, 0);
  if (a >= 0) {
    if (!x.has_m) throw std::logic_error("holder of the E subset lacks the masked value");
    out.s[a] = R::add(out.s[a], x.m);
  }
  return out;
}

template <class R>
MaskedShare<R> public_to_masked(const SubsetIndex& idx, int party, Word<R> a) {
  MaskedShare<R> out;
  out.party = party;
  out.has_m = true;
  out.m = a;
  out.lam.party = party;
  out.lam.s.assign(idx.g(), Word<R>{});
  return out;
}

template <class R>
RssShare<R> add_public_constant(const SubsetIndex& idx, RssShare<R> x, Word<R> c) {
  int a = idx.slot(x.party, 0);
  if (a >= 0) x.s[a] = R::add(x.s[a], c);
  return x;
}

template <class R>
Word<R> rss_mul_to_additive(const SubsetIndex& idx, const RssShare<R>& x, const RssShare<R>& y) {
  const auto& plan = idx.mul_plan(x.party);
  Word<R> acc{};
  for (std::size_t a = 0; a < plan.size(); ++a) {
    Word<R> s{};
    for (int b : plan[a]) s = R::add(s, y.s[b]);
    acc = R::add(acc, R::mul(x.s[a], s));
  }
  return acc;
}

template <class R>
MaskedShare<R> linear_combine(Word<R> c1, const MaskedShare<R>& x, Word<R> c2, const MaskedShare<R>& y) {
  MaskedShare<R> out;
  out.party = x.party;
  out.has_m = x.has_m && y.has_m;
  if (out.has_m) out.m = R::add(R::mul(c1, x.m), R::mul(c2, y.m));
  out.lam.party = x.party;
  out.lam.s.resize(x.lam.s.size());
  for (std::size_t a = 0; a < x.lam.s.size(); ++a)
    out.lam.s[a] = R::add(R::mul(c1, x.lam.s[a]), R::mul(c2, y.lam.s[a]));
  return out;
}

// Whole-system helpers: share among all parties and reconstruct from all views.
template <class R, class Rng>
std::vector<RssShare<R>> share_rss(const SubsetIndex& idx, Word<R> value, Rng& rng) {
  std::vector<Word<R>> full(idx.q());
  Word<R> acc{};
  for (int j = 1; j < idx.q(); ++j) {
    Word<R> v = R::norm(static_cast<Word<R>>((static_cast<u128>(rng()) << 64) | rng()));
    full[j] = v;
    acc = R::add(acc, v);
  }
  full[0] = R::sub(R::norm(value), acc);
  std::vector<RssShare<R>> views(idx.parties().n);
  for (int i = 0; i < idx.parties().n; ++i) {
    views[i].party = i;
    for (int j : idx.held(i)) views[i].s.push_back(full[j]);
  }
  return views;
}

template <class R>
Word<R> reconstruct_rss(const SubsetIndex& idx, const std::vector<RssShare<R>>& views) {
  Word<R> acc{};
  for (int j = 0; j < idx.q(); ++j) {
    bool seen = false;
    Word<R> v{};
    for (const auto& p : views) {
      int a = idx.slot(p.party, j);
      if (a < 0) continue;
      if (!seen) {
        v = p.s[a];
        seen = true;
      } else if (p.s[a] != v) {
        throw std::runtime_error("replicated share mismatch");
      }
    }
    if (!seen) throw std::runtime_error("subset share missing");
    acc = R::add(acc, v);
  }
  return acc;
}

template <class R>
Word<R> reconstruct_masked(const SubsetIndex& idx, const std::vector<MaskedShare<R>>& views) {
  std::vector<RssShare<R>> lam;
  for (const auto& v : views) lam.push_back(v.lam);
  Word<R> l = reconstruct_rss<R>(idx, lam);
  for (const auto& v : views)
    if (v.has_m) return R::sub(v.m, l);
  throw std::runtime_error("no party holds the masked value");
}

}  // namespace hmpc
