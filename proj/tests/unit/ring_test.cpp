#include <random>

#include "doctest.h"
#include "hmpc/ring.hpp"

using namespace hmpc;

TEST_CASE("ring elements wrap at their width") {
  RingElem a(u128(60), 6), b(u128(10), 6);
  CHECK((a + b).value() == 6);
  CHECK((b - a).value() == 14);
  CHECK((a * b).value() == (600 % 64));
  CHECK(RingElem::of(~u64(0)).low() + 1 == 0);
}

TEST_CASE("msb and bit decomposition") {
  CHECK(msb(RingElem::of(u64(1) << 63)) == 1);
  CHECK(msb(RingElem::of(0)) == 0);
  auto bits = bit_decompose(RingElem::of(0b1011));
  CHECK(bits[0] == 1);
  CHECK(bits[1] == 1);
  CHECK(bits[2] == 0);
  CHECK(bits[3] == 1);
  CHECK(bits[63] == 0);
}

TEST_CASE("square roots modulo 2^6") {
  std::vector<u128> roots;
  for (u128 c = 0; c < 64; ++c)
    if ((c * c) % 64 == 9) roots.push_back(c);
  CHECK(roots == std::vector<u128>{3, 29, 35, 61});
  CHECK(smallest_sqrt_mod2k(9, 6) == 3);
  CHECK(smallest_sqrt_mod2k(1, 6) == 1);
}

TEST_CASE("smallest square roots of random odd squares modulo 2^16") {
  std::mt19937_64 rng(16);
  for (int it = 0; it < 200; ++it) {
    u128 x = (rng() & 0xffff) | 1;
    u128 e = (x * x) & 0xffff;
    u128 brute = 0;
    for (u128 c = 1; c < 65536; c += 2)
      if (((c * c) & 0xffff) == e) {
        brute = c;
        break;
      }
    REQUIRE(smallest_sqrt_mod2k(e, 16) == brute);
  }
}

TEST_CASE("bit derivation from a = 1") {
  const u128 c = smallest_sqrt_mod2k(1, 66);
  CHECK(c == 1);
  const u128 d = ((inverse_mod2k(c, 66) * 1) + 1) & ((u128(1) << 66) - 1);
  CHECK(d == 2);
  CHECK((d >> 1) == 1);
}

TEST_CASE("inverses modulo 2^66") {
  std::mt19937_64 rng(66);
  for (int it = 0; it < 100; ++it) {
    u128 a = ((u128(rng()) << 64) | rng() | 1) & Z66::kMask;
    CHECK(Z66::mul(a, inverse_mod2k(a, 66)) == 1);
  }
}

TEST_CASE("fixed point encoding") {
  CHECK(fp_encode_raw(1.5) == 12288);
  CHECK(fp_decode_raw(fp_encode_raw(-2.25)) == doctest::Approx(-2.25));
  CHECK(asr(fp_encode_raw(-1.0), kFrac) == ~u64(0));
  const u64 p = fp_encode_raw(1.5) * fp_encode_raw(2.0);
  CHECK(std::abs(fp_decode_raw(asr(p, kFrac)) - 3.0) <= 1.0 / (1 << kFrac));
}
