#include <map>
#include <set>

#include "doctest.h"
#include "hmpc/apps.hpp"
#include "hmpc/randomness.hpp"

using namespace hmpc;

TEST_CASE("keystream golden values") {
  PrfStream s(derive_key(42, "golden", 0), 7);
  CHECK(s.next64() == 0xe871b667f6f015bfull);
  CHECK(s.next64() == 0x068fd58f1bd26ab6ull);
  CHECK(s.next64() == 0x508e17667d544869ull);
  CHECK(s.next64() == 0xc63e4ed05ddd269bull);
}

TEST_CASE("block ids are the leading bytes of sha256") { CHECK(block_id("ACGTACGT") == 0x1d66706b7e7e8bb2ull); }

TEST_CASE("distinct labels give distinct streams") {
  PrfStream a(derive_key(1, "k", 0), 1), b(derive_key(1, "k", 0), 2), c(derive_key(1, "k", 0), 1);
  const u64 x = a.next64();
  CHECK(x != b.next64());
  CHECK(x == c.next64());
}

TEST_CASE("subset keys agree among holders") {
  for (int n : {3, 5, 7}) {
    PartySet ps(n);
    SubsetIndex idx(ps);
    std::vector<KeyStore> ks;
    for (int i = 0; i < n; ++i) ks.emplace_back(idx, i, 99);
    for (int j = 0; j < idx.q(); ++j) {
      auto mem = idx.members(j);
      for (int p : mem) CHECK(ks[p].subset_key(j) == ks[mem[0]].subset_key(j));
    }
  }
}

TEST_CASE("zero sharing sums to zero") {
  for (int n : {3, 5, 9}) {
    PartySet ps(n);
    SubsetIndex idx(ps);
    std::vector<u64> sum(16, 0);
    for (int i = 0; i < n; ++i) {
      KeyStore ks(idx, i, 5);
      std::vector<u64> z(16);
      pi_zero<Z64>(ks, ps, 3, 16, z.data());
      for (int e = 0; e < 16; ++e) sum[e] += z[e];
    }
    for (u64 v : sum) CHECK(v == 0);
  }
}

TEST_CASE("pi_rand shares are replicated and the owner of pi_prand learns the value") {
  const int n = 5;
  PartySet ps(n);
  SubsetIndex idx(ps);
  std::map<int, u64> slot_value;
  u64 total = 0, owner_view = 0;
  for (int i = 0; i < n; ++i) {
    KeyStore ks(idx, i, 11);
    std::vector<u64> out(idx.g());
    u64 full = 0;
    pi_prand<Z64>(ks, idx, 2, 77, 1, out.data(), i == 2 ? &full : nullptr);
    if (i == 2) owner_view = full;
    for (int a = 0; a < idx.g(); ++a) {
      int j = idx.held(i)[a];
      auto it = slot_value.find(j);
      if (it == slot_value.end()) slot_value[j] = out[a], total += out[a];
      else CHECK(it->second == out[a]);
    }
  }
  CHECK(static_cast<int>(slot_value.size()) == idx.q());
  CHECK(owner_view == total);
}

TEST_CASE("reconstructed random values look uniform") {
  const int n = 5, buckets = 16, draws = 4096;
  PartySet ps(n);
  SubsetIndex idx(ps);
  std::vector<u64> sum(draws, 0);
  std::vector<std::set<int>> seen(draws);
  for (int i = 0; i < n; ++i) {
    KeyStore ks(idx, i, 21);
    auto v = pi_rand<Z64>(ks, idx, 9, draws);
    for (int a = 0; a < idx.g(); ++a) {
      int j = idx.held(i)[a];
      for (int e = 0; e < draws; ++e)
        if (seen[e].insert(j).second) sum[e] += v[std::size_t(a) * draws + e];
    }
  }
  std::vector<int> hist(buckets, 0);
  for (u64 v : sum) ++hist[v >> 60];
  double chi = 0, expect = double(draws) / buckets;
  for (int h : hist) chi += (h - expect) * (h - expect) / expect;
  CHECK(chi < 37.7);  // 15 degrees of freedom, p = 0.001
}
