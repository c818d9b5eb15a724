#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmpc {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

constexpr int kEll = 64;
constexpr int kFrac = 13;

inline u128 width_mask(int k) {
  return k >= 128 ? ~u128(0) : ((u128(1) << k) - 1);
}

// Element of Z_{2^k} with the width carried alongside the value.
class RingElem {
 public:
  RingElem() = default;
  RingElem(u128 v, int width) : v_(v & width_mask(width)), k_(width) {
    if (width < 1 || width > 127) throw std::invalid_argument("ring width out of range");
  }
  static RingElem of(u64 v) { return RingElem(v, kEll); }

  u128 value() const { return v_; }
  u64 low() const { return static_cast<u64>(v_); }
  int width() const { return k_; }

  friend RingElem operator+(const RingElem& a, const RingElem& b) { return {a.v_ + b.v_, same(a, b)}; }
  friend RingElem operator-(const RingElem& a, const RingElem& b) { return {a.v_ - b.v_, same(a, b)}; }
  friend RingElem operator*(const RingElem& a, const RingElem& b) { return {a.v_ * b.v_, same(a, b)}; }
  RingElem operator-() const { return {u128(0) - v_, k_}; }
  friend bool operator==(const RingElem& a, const RingElem& b) { return a.k_ == b.k_ && a.v_ == b.v_; }

 private:
  static int same(const RingElem& a, const RingElem& b) {
    if (a.k_ != b.k_)
      throw std::invalid_argument("mixed ring widths " + std::to_string(a.k_) + " and " + std::to_string(b.k_));
    return a.k_;
  }
  u128 v_ = 0;
  int k_ = kEll;
};

RingElem add(const RingElem& a, const RingElem& b);
RingElem sub(const RingElem& a, const RingElem& b);
RingElem mul(const RingElem& a, const RingElem& b);

struct FixedPoint {
  RingElem raw;
  int frac_bits = kFrac;
};

FixedPoint fp_encode(double x, int frac_bits = kFrac);
double fp_decode(const FixedPoint& f);
u64 fp_encode_raw(double x, int frac_bits = kFrac);
double fp_decode_raw(u64 raw, int frac_bits = kFrac);

// Arithmetic (sign-preserving) shift of a two's complement ring value.
inline u64 asr(u64 v, int d) { return static_cast<u64>(static_cast<i64>(v) >> d); }

int msb(const RingElem& a);
std::vector<int> bit_decompose(const RingElem& a);

// Minimal c with c^2 = e mod 2^k; e must be an odd quadratic residue.
u128 smallest_sqrt_mod2k(u128 e, int k);
u128 inverse_mod2k(u128 a, int k);

// Compile-time ring descriptors used on the hot paths of the engine.
struct Z64 {
  using word = u64;
  static constexpr int bits = 64;
  static constexpr bool boolean = false;
  static word add(word a, word b) { return a + b; }
  static word sub(word a, word b) { return a - b; }
  static word mul(word a, word b) { return a * b; }
  static word neg(word a) { return word(0) - a; }
  static word one() { return 1; }
  static word norm(word a) { return a; }
};

struct Z66 {
  using word = u128;
  static constexpr int bits = 66;
  static constexpr bool boolean = false;
  static constexpr word kMask = (word(1) << 66) - 1;
  static word add(word a, word b) { return (a + b) & kMask; }
  static word sub(word a, word b) { return (a - b) & kMask; }
  static word mul(word a, word b) { return (a * b) & kMask; }
  static word neg(word a) { return (word(0) - a) & kMask; }
  static word one() { return 1; }
  static word norm(word a) { return a & kMask; }
};

// 64 independent Z_2 lanes packed in a word: XOR is addition, AND is multiplication.
struct B64 {
  using word = u64;
  static constexpr int bits = 64;
  static constexpr bool boolean = true;
  static word add(word a, word b) { return a ^ b; }
  static word sub(word a, word b) { return a ^ b; }
  static word mul(word a, word b) { return a & b; }
  static word neg(word a) { return a; }
  static word one() { return ~word(0); }
  static word norm(word a) { return a; }
};

}  // namespace hmpc
