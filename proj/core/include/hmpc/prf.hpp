#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hmpc/ring.hpp"
#include "hmpc/share.hpp"

namespace hmpc {

using Key128 = std::array<std::uint8_t, 16>;
using Digest = std::array<std::uint8_t, 32>;

Digest sha256(const void* data, std::size_t len);
Digest sha256(const std::vector<std::uint8_t>& data);

// Incremental SHA-256 for transcripts and hash-consistency checks.
class Hasher {
 public:
  Hasher();
  ~Hasher();
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;
  void update(const void* data, std::size_t len);
  template <class T>
  void update_pod(const T& v) { update(&v, sizeof(T)); }
  Digest finish();

 private:
  void* ctx_;
};

Key128 derive_key(std::uint64_t seed, const std::string& family, std::uint64_t id);

// AES-128 in counter mode, one keystream per (key, label).
class PrfStream {
 public:
  PrfStream(const Key128& key, std::uint64_t label);
  ~PrfStream();
  PrfStream(PrfStream&& o) noexcept;
  PrfStream& operator=(PrfStream&&) = delete;
  PrfStream(const PrfStream&) = delete;

  void fill(void* out, std::size_t bytes);
  std::uint64_t next64();
  u128 next128();
  // Uniform element of Z_{2^width}, width in [1, 127].
  u128 sample(int width);

 private:
  void refill();
  void* ctx_ = nullptr;
  std::array<std::uint8_t, 4096> buf_{};
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
  std::size_t chunk_ = 64;
};

// Labels name a protocol step; every holder of a key derives the same stream for the same label.
enum class Purpose : std::uint8_t {
  lambda = 1,
  input_mask,
  zero,
  dsbits_u,
  dsbits_zero,
  mask_r,
  gamma_mask,
  theta,
  commit,
  misc,
};

inline std::uint64_t make_label(Purpose p, std::uint64_t id, std::uint32_t sub = 0) {
  return (static_cast<std::uint64_t>(p) << 56) ^ (static_cast<std::uint64_t>(sub) << 40) ^ id;
}

// Per-party key material: ring-neighbour pair keys, (t+1)- and (t+2)-subset keys, and one all-party key.
// Every family uses its own derivation tag so keysets never coincide.
class KeyStore {
 public:
  KeyStore(const SubsetIndex& idx, int party, std::uint64_t seed);

  int party() const { return party_; }
  const Key128& subset_key(int j) const;
  const Key128& wide_key(std::uint32_t mask) const;
  const Key128& pair_key(int other) const;
  const Key128& all_key() const { return all_; }
  std::uint64_t seed() const { return seed_; }

 private:
  int party_;
  std::uint64_t seed_;
  const SubsetIndex* idx_;
  std::vector<Key128> subset_;  // by local slot
  std::map<std::uint32_t, Key128> wide_;
  std::map<int, Key128> pair_;
  Key128 all_{};
};

}  // namespace hmpc
