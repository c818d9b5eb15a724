#include "hmpc/prf.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <stdexcept>

namespace hmpc {

Digest sha256(const void* data, std::size_t len) {
  Digest d{};
  unsigned int out_len = 0;
  if (EVP_Digest(data, len, d.data(), &out_len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  return d;
}

Digest sha256(const std::vector<std::uint8_t>& data) { return sha256(data.data(), data.size()); }

Hasher::Hasher() : ctx_(EVP_MD_CTX_new()) {
  if (!ctx_ || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 init failed");
}

Hasher::~Hasher() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void Hasher::update(const void* data, std::size_t len) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data, len);
}

Digest Hasher::finish() {
  Digest d{};
  unsigned int out_len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), d.data(), &out_len);
  EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr);
  return d;
}

Key128 derive_key(std::uint64_t seed, const std::string& family, std::uint64_t id) {
  std::vector<std::uint8_t> buf(8 + family.size() + 8);
  std::memcpy(buf.data(), &seed, 8);
  std::memcpy(buf.data() + 8, family.data(), family.size());
  std::memcpy(buf.data() + 8 + family.size(), &id, 8);
  Digest d = sha256(buf);
  Key128 k{};
  std::memcpy(k.data(), d.data(), 16);
  return k;
}

PrfStream::PrfStream(const Key128& key, std::uint64_t label) {
  auto* c = EVP_CIPHER_CTX_new();
  if (!c) throw std::runtime_error("cipher context allocation failed");
  std::uint8_t iv[16] = {};
  std::memcpy(iv, &label, 8);
  if (EVP_EncryptInit_ex(c, EVP_aes_128_ctr(), nullptr, key.data(), iv) != 1) {
    EVP_CIPHER_CTX_free(c);
    throw std::runtime_error("aes-ctr init failed");
  }
  ctx_ = c;
}

PrfStream::~PrfStream() {
  if (ctx_) EVP_CIPHER_CTX_free(static_cast<EVP_CIPHER_CTX*>(ctx_));
}

PrfStream::PrfStream(PrfStream&& o) noexcept
    : ctx_(o.ctx_), buf_(o.buf_), pos_(o.pos_), end_(o.end_), chunk_(o.chunk_) {
  o.ctx_ = nullptr;
}

void PrfStream::refill() {
  static const std::array<std::uint8_t, 4096> zeros{};
  int out_len = 0;
  EVP_EncryptUpdate(static_cast<EVP_CIPHER_CTX*>(ctx_), buf_.data(), &out_len, zeros.data(), static_cast<int>(chunk_));
  end_ = chunk_;
  pos_ = 0;
  chunk_ = std::min(buf_.size(), chunk_ * 2);
}

void PrfStream::fill(void* out, std::size_t bytes) {
  auto* p = static_cast<std::uint8_t*>(out);
  while (bytes > 0) {
    if (pos_ == end_) {
      // Large requests go straight through the cipher.
      if (bytes >= 256) {
        std::size_t chunk = bytes - bytes % 16;
        std::memset(p, 0, chunk);
        int out_len = 0;
        EVP_EncryptUpdate(static_cast<EVP_CIPHER_CTX*>(ctx_), p, &out_len, p, static_cast<int>(chunk));
        p += chunk;
        bytes -= chunk;
        continue;
      }
      refill();
    }
    std::size_t take = std::min(bytes, end_ - pos_);
    std::memcpy(p, buf_.data() + pos_, take);
    pos_ += take;
    p += take;
    bytes -= take;
  }
}

std::uint64_t PrfStream::next64() {
  std::uint64_t v;
  fill(&v, 8);
  return v;
}

u128 PrfStream::next128() {
  u128 v;
  fill(&v, 16);
  return v;
}

u128 PrfStream::sample(int width) {
  if (width <= 64) return next64() & static_cast<std::uint64_t>(width_mask(width));
  return next128() & width_mask(width);
}

KeyStore::KeyStore(const SubsetIndex& idx, int party, std::uint64_t seed)
    : party_(party), seed_(seed), idx_(&idx) {
  const PartySet& ps = idx.parties();
  for (int j : idx.held(party)) subset_.push_back(derive_key(seed, "subset", idx.mask(j)));
  // (t+2)-subsets containing this party
  for (std::uint32_t m = 0; m <= ps.all_mask(); ++m)
    if (std::popcount(m) == ps.h() + 1 && ((m >> party) & 1)) wide_[m] = derive_key(seed, "wide", m);
  int next = (party + 1) % ps.n, prev = (party + ps.n - 1) % ps.n;
  auto pair_id = [&](int a, int b) { return static_cast<std::uint64_t>(std::min(a, b)) * 64 + std::max(a, b); };
  pair_[next] = derive_key(seed, "pair", pair_id(party, next));
  pair_[prev] = derive_key(seed, "pair", pair_id(party, prev));
  all_ = derive_key(seed, "all", 0);
}

const Key128& KeyStore::subset_key(int j) const {
  int a = idx_->slot(party_, j);
  if (a < 0) throw std::invalid_argument("party does not hold the key of subset " + std::to_string(j));
  return subset_[a];
}

const Key128& KeyStore::wide_key(std::uint32_t mask) const {
  auto it = wide_.find(mask);
  if (it == wide_.end()) throw std::invalid_argument("party does not hold the requested wide subset key");
  return it->second;
}

const Key128& KeyStore::pair_key(int other) const {
  auto it = pair_.find(other);
  if (it == pair_.end()) throw std::invalid_argument("no pairwise key with party " + std::to_string(other));
  return it->second;
}

}  // namespace hmpc
