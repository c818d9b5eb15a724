#include <random>

#include "doctest.h"
#include "hmpc/share.hpp"

using namespace hmpc;

namespace {

std::vector<int> members_of(std::uint32_t T, int n) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if ((T >> i) & 1) out.push_back(i);
  return out;
}

}  // namespace

TEST_CASE("subset counts") {
  for (int n : {3, 5, 7, 9}) {
    PartySet ps(n);
    SubsetIndex idx(ps);
    const int t = (n - 1) / 2;
    CHECK(idx.q() == static_cast<int>(binomial(n, t + 1)));
    CHECK(idx.g() == static_cast<int>(binomial(n - 1, t)));
    CHECK(ps.king() == t);
    for (int i = 0; i < n; ++i) CHECK(static_cast<int>(idx.held(i).size()) == idx.g());
    // the E subset is slot 0 and is held exactly by E
    for (int i = 0; i < n; ++i) CHECK((idx.slot(i, 0) >= 0) == ps.in_E(i));
  }
}

TEST_CASE("rss sharing reconstructs") {
  std::mt19937_64 rng(1);
  for (int n : {3, 5, 7}) {
    SubsetIndex idx{PartySet(n)};
    for (int it = 0; it < 20; ++it) {
      u64 v = rng();
      auto views = share_rss<Z64>(idx, v, rng);
      CHECK(reconstruct_rss<Z64>(idx, views) == v);
      u64 b = rng();
      auto bv = share_rss<B64>(idx, b, rng);
      CHECK(reconstruct_rss<B64>(idx, bv) == b);
    }
  }
}

TEST_CASE("t+1 additive shares from every subset of size t+1") {
  std::mt19937_64 rng(2);
  const int n = 5;
  SubsetIndex idx{PartySet(n)};
  for (int it = 0; it < 10; ++it) {
    u64 v = rng();
    auto views = share_rss<Z64>(idx, v, rng);
    int subsets = 0;
    for (std::uint32_t T = 0; T < (1u << n); ++T) {
      if (std::popcount(T) != 3) continue;
      ++subsets;
      u64 acc = 0;
      for (int p : members_of(T, n)) acc += rss_to_tadditive<Z64>(idx, views[p], T);
      CHECK(acc == v);
    }
    CHECK(subsets == 10);
  }
}

TEST_CASE("masked and rss views convert both ways") {
  std::mt19937_64 rng(3);
  const int n = 7;
  SubsetIndex idx{PartySet(n)};
  for (int it = 0; it < 10; ++it) {
    u64 v = rng();
    auto views = share_rss<Z64>(idx, v, rng);
    std::vector<MaskedShare<Z64>> masked;
    for (auto& r : views) masked.push_back(rss_to_masked<Z64>(r));
    CHECK(reconstruct_masked<Z64>(idx, masked) == v);
    std::vector<RssShare<Z64>> back;
    for (auto& m : masked) back.push_back(masked_to_rss<Z64>(idx, m));
    CHECK(reconstruct_rss<Z64>(idx, back) == v);
    u64 add = 0;
    for (auto& m : masked) add += masked_to_additive<Z64>(idx, m);
    CHECK(add == v);
  }
}

TEST_CASE("linear combination of masked shares") {
  std::mt19937_64 rng(4);
  const int n = 5;
  SubsetIndex idx{PartySet(n)};
  auto mask = [&](u64 v) {
    std::vector<MaskedShare<Z64>> out;
    const u64 lam = rng();
    auto lv = share_rss<Z64>(idx, lam, rng);
    for (auto& l : lv) out.push_back({l.party, true, v + lam, l});
    return out;
  };
  auto x = mask(5), y = mask(3);
  std::vector<MaskedShare<Z64>> z;
  for (int i = 0; i < n; ++i) z.push_back(linear_combine<Z64>(2, x[i], u64(0) - 1, y[i]));
  CHECK(reconstruct_masked<Z64>(idx, z) == 7);
  std::vector<MaskedShare<Z64>> pub;
  for (int i = 0; i < n; ++i) pub.push_back(public_to_masked<Z64>(idx, i, 42));
  CHECK(reconstruct_masked<Z64>(idx, pub) == 42);
}

TEST_CASE("local products of rss shares sum to the product") {
  std::mt19937_64 rng(5);
  for (int n : {3, 5, 7, 9}) {
    SubsetIndex idx{PartySet(n)};
    for (int it = 0; it < 5; ++it) {
      u64 a = rng(), b = rng();
      auto av = share_rss<Z64>(idx, a, rng), bv = share_rss<Z64>(idx, b, rng);
      u64 acc = 0;
      for (int i = 0; i < n; ++i) acc += rss_mul_to_additive<Z64>(idx, av[i], bv[i]);
      CHECK(acc == a * b);
    }
  }
}

TEST_CASE("adding a public constant") {
  std::mt19937_64 rng(6);
  SubsetIndex idx{PartySet(5)};
  auto v = share_rss<Z64>(idx, 10, rng);
  for (auto& s : v) s = add_public_constant<Z64>(idx, s, 32);
  CHECK(reconstruct_rss<Z64>(idx, v) == 42);
}
