#include "hmpc/ring.hpp"

#include <cmath>

namespace hmpc {

RingElem add(const RingElem& a, const RingElem& b) { return a + b; }
RingElem sub(const RingElem& a, const RingElem& b) { return a - b; }
RingElem mul(const RingElem& a, const RingElem& b) { return a * b; }

u64 fp_encode_raw(double x, int frac_bits) {
  const double bound = std::ldexp(1.0, kEll - frac_bits - 1);
  if (!(std::fabs(x) < bound)) throw std::out_of_range("fixed-point value out of range");
  long double scaled = std::nearbyint(static_cast<long double>(x) * std::ldexp(1.0L, frac_bits));
  return static_cast<u64>(static_cast<i64>(scaled));
}

double fp_decode_raw(u64 raw, int frac_bits) {
  return std::ldexp(static_cast<double>(static_cast<i64>(raw)), -frac_bits);
}

FixedPoint fp_encode(double x, int frac_bits) {
  return {RingElem::of(fp_encode_raw(x, frac_bits)), frac_bits};
}

double fp_decode(const FixedPoint& f) {
  if (f.raw.width() != kEll) throw std::invalid_argument("fixed-point raw must have width 64");
  return fp_decode_raw(f.raw.low(), f.frac_bits);
}

int msb(const RingElem& a) { return static_cast<int>((a.value() >> (a.width() - 1)) & 1); }

std::vector<int> bit_decompose(const RingElem& a) {
  std::vector<int> bits(a.width());
  for (int i = 0; i < a.width(); ++i) bits[i] = static_cast<int>((a.value() >> i) & 1);
  return bits;
}

u128 inverse_mod2k(u128 a, int k) {
  if ((a & 1) == 0) throw std::invalid_argument("even element has no inverse");
  u128 x = a;  // Newton iteration doubles the number of correct low bits
  for (int i = 0; i < 7; ++i) x *= 2 - a * x;
  return x & width_mask(k);
}

u128 smallest_sqrt_mod2k(u128 e, int k) {
  const u128 mask = width_mask(k);
  e &= mask;
  if ((e & 1) == 0) throw std::invalid_argument("sqrt: even argument");
  if (k <= 3) {
    for (u128 c = 1; c <= mask; c += 2)
      if (((c * c) & mask) == e) return c;
    throw std::invalid_argument("sqrt: not a quadratic residue");
  }
  if ((e & 7) != 1) throw std::invalid_argument("sqrt: not a quadratic residue");
  // Hensel lifting: keep x with x^2 = e mod 2^(j+1), adjust bit j-1 as needed.
  u128 x = 1;
  for (int j = 3; j < k; ++j) {
    u128 m = width_mask(j + 1);
    if (((x * x) & m) != (e & m)) x += u128(1) << (j - 1);
  }
  x &= mask;
  const u128 half = u128(1) << (k - 1);
  u128 roots[4] = {x, (u128(0) - x) & mask, (x + half) & mask, (u128(0) - x + half) & mask};
  u128 best = roots[0];
  for (u128 r : roots) {
    if (((r * r) & mask) != e) throw std::logic_error("sqrt: lifting failed");
    if (r < best) best = r;
  }
  return best;
}

}  // namespace hmpc
