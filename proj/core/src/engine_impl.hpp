#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "hmpc/engine.hpp"
#include "hmpc/prf.hpp"
#include "hmpc/randomness.hpp"
#include "hmpc/share.hpp"

namespace hmpc::detail {

using Words = std::vector<u64>;
using Words128 = std::vector<u128>;

inline u64 lanes_mask(int lanes) { return lanes >= 64 ? ~u64(0) : ((u64(1) << lanes) - 1); }

inline void put_vec(Writer& w, const u64* v, std::size_t len, int bits) {
  if (bits == 64) {
    w.put_words(v, len);
    return;
  }
  const u64 mask = lanes_mask(bits);
  for (std::size_t e = 0; e < len; ++e) w.put(v[e] & mask, bits);
}

inline void get_vec(Reader& r, u64* v, std::size_t len, int bits) {
  if (bits == 64) {
    r.get_words(v, len);
    return;
  }
  for (std::size_t e = 0; e < len; ++e) v[e] = r.get(bits);
}

// Additive share of sum_k x_k*y_k per output element; x, y slot-major with the given slot strides.
template <class R>
void mul_acc(const SubsetIndex& idx, int party, const u64* x, std::size_t xs, const u64* y, std::size_t ys,
             std::size_t cnt, u64* out, std::vector<u64>& scratch) {
  const auto& plan = idx.mul_plan(party);
  scratch.resize(cnt);
  for (std::size_t a = 0; a < plan.size(); ++a) {
    if (plan[a].empty()) continue;
    u64* ysum = scratch.data();
    const u64* y0 = y + plan[a][0] * ys;
    std::copy(y0, y0 + cnt, ysum);
    for (std::size_t k = 1; k < plan[a].size(); ++k) {
      const u64* yb = y + plan[a][k] * ys;
      for (std::size_t e = 0; e < cnt; ++e) ysum[e] = R::add(ysum[e], yb[e]);
    }
    const u64* xa = x + a * xs;
    for (std::size_t e = 0; e < cnt; ++e) out[e] = R::add(out[e], R::mul(xa[e], ysum[e]));
  }
}

template <class R>
void slots_sum(const std::vector<int>& slots, const u64* x, std::size_t stride, std::size_t len, u64* out) {
  std::fill(out, out + len, u64(0));
  for (int a : slots) {
    const u64* xa = x + a * stride;
    for (std::size_t e = 0; e < len; ++e) out[e] = R::add(out[e], xa[e]);
  }
}

enum class Fk : std::uint8_t { lam, term, val };
struct Factor {
  Fk kind = Fk::lam;
  int id = -1;  // wire id, or term index of the same gate
};

// One product correlation of a gate.
struct Job {
  int gate = -1;
  int term = -1;
  Factor x, y;
  int stage = 1;
  bool reveal = false;
  bool full = false;  // carries the output mask r
};

struct WireState {
  Words lam;        // slot-major RSS of the mask, g * len
  Words lamE;       // E-additive share of the mask
  Words m;          // masked value
  bool lam_ok = false;
  bool m_ok = false;
  int uses = 0;
  bool needE = false;
};

struct GateState {
  std::vector<Words> T;     // per product term: E-additive share (semi: additive until aggregated)
  std::vector<Words> Trss;  // per product term: RSS (malicious, and revealed pairs)
  Words r;                  // RSS of the full mask r of a truncating product
  Words rd;                 // RSS of the truncated mask r^d
  Words extra_r, extra_lb;  // bit injection: E-additive shares of r and of the selector mask bit
  Words p;                  // reconstructed z - r, or the opened value
};

class Engine {
 public:
  Engine(const Circuit& c, int n, int me, Endpoint& ep, const EngineOptions& o, FaultInjector* f);
  PartyResult run(const std::map<int, Words>& inputs);

  const Circuit& C;
  int n, me;
  PartySet ps;
  SubsetIndex idx;
  KeyStore ks;
  Comm comm;
  EngineOptions opt;
  int g, king;
  bool mal, inE, is_king;

  std::vector<WireState> W;
  std::vector<GateState> G;
  std::vector<int> level;      // per gate
  std::vector<int> wlevel;     // per wire
  int max_main = 0, max_nested = 0;
  std::vector<std::vector<int>> inter_main, inter_nested, lin_main, lin_nested;
  std::vector<std::size_t> ds_off;  // per gate, bit offset in the doubly-shared bit batch
  std::size_t ds_total = 0;

  // malicious bookkeeping
  Words128 ds_c;      // public square roots
  Words128 ds_a2;     // RSS of a^2, g * ds_total
  Digest agree_digest{};

  // setup
  void analyze();
  static bool is_product(Op op);
  int k_of(const Gate& gt) const;
  int term_index(int k, unsigned S) const;
  std::vector<int> lam_inputs(const Gate& gt) const;

  // mask storage
  const u64* lam(int w);
  void materialize(int w);
  void release(int w);
  void set_lam(int w, Words&& v);
  const u64* lamE_of(int w);
  Words zbuf;
  Words zero_rss(int w) const { return Words(std::size_t(g) * C.wire(w).len, 0); }
  std::size_t len(int w) const { return C.wire(w).len; }
  bool boolean(int w) const { return C.wire(w).boolean; }
  u64 wmask(int w) const { return lanes_mask(C.wire(w).lanes); }
  int wbits(int w) const { return C.wire(w).boolean ? C.wire(w).lanes : 64; }

  // preprocessing
  void stage_bits();
  void stage_trgen_dealer();
  void propagate();
  void pipeline(bool nested);
  const u64* factor_rss(const Job& j, const Factor& f, std::size_t& stride, Words& tmp);
  std::vector<Job> make_jobs(int gi) const;
  void product_additive(const Job& j, u64* out);
  Words r_rss(int gi);
  std::uint64_t modeled_bits(int bits, std::size_t elems) const { return std::uint64_t(3) * ps.t * bits * elems; }

  // online
  void inputs_round(const std::map<int, Words>& inputs);
  void eval_linear(int gi);
  void zeta(int gi, Words& out);
  void finalize(int gi);
  void levels(bool nested);
  void d_replay();
  std::vector<Words> outputs_semi();

  // malicious
  struct DealerJob {
    const u64* x;
    const u64* y;
    std::size_t xs, ys;  // slot strides
    std::size_t len, nf;
    bool bcast;
  };
  std::vector<Words> dealer_mul(bool boolean_ring, const std::vector<DealerJob>& jobs);
  Words128 dealer_mul66(const Words128& a, std::size_t len);
  void dealer_status(Reader& r);
  void agree();
  void verify();
  template <class R>
  std::vector<typename R::word> rec_robust(const std::vector<typename R::word>& rss, std::size_t len, Phase p,
                                           const std::string& tag);
  std::vector<Words> outputs_abort();
  std::vector<Words> outputs_fair();
  void fair_commit();
  std::vector<std::array<std::uint8_t, 32>> fair_commits;  // per (output, subset)
};

}  // namespace hmpc::detail
