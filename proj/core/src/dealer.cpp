#include <stdexcept>

#include "engine_impl.hpp"

namespace hmpc {

namespace {

struct DealerLink {
  Endpoint& ep;
  int n;
  std::vector<std::uint16_t> sseq, rseq;

  void abort_all() {
    for (int p = 0; p < n; ++p) {
      Frame f;
      f.kind = FrameKind::abort;
      try {
        ep.send(p, std::move(f));
      } catch (const std::exception&) {
      }
    }
  }
  void reply(int p, Writer& w) {
    Frame f;
    f.phase = Phase::prep;
    f.seq = sseq[p]++;
    f.payload = std::move(w.bytes());
    ep.send(p, std::move(f));
  }
};

template <class R>
typename R::word get_word(Reader& r) {
  if constexpr (R::bits == 66) {
    u128 lo = r.get(64);
    u128 hi = r.get(64);
    return lo | (hi << 64);
  } else {
    return r.get(64);
  }
}

template <class R>
void put_word(Writer& w, typename R::word v) {
  if constexpr (R::bits == 66) {
    w.put(static_cast<u64>(v), 64);
    w.put(static_cast<u64>(v >> 64), 64);
  } else {
    w.put(v, 64);
  }
}

template <class R>
typename R::word draw(PrfStream& rng) {
  if constexpr (R::bits == 66) return R::norm(rng.next128());
  else return rng.next64();
}

// Reads one slot-major RSS vector from every party and returns the shared values (q * len), or false on mismatch.
template <class R>
bool read_rss(const SubsetIndex& idx, std::vector<Reader>& req, std::size_t len, std::vector<typename R::word>& full) {
  using Wd = typename R::word;
  const int n = idx.parties().n, q = idx.q(), g = idx.g();
  full.assign(std::size_t(q) * len, Wd{});
  std::vector<char> seen(q, 0);
  bool ok = true;
  for (int p = 0; p < n; ++p) {
    for (int a = 0; a < g; ++a) {
      int j = idx.held(p)[a];
      for (std::size_t e = 0; e < len; ++e) {
        Wd v = R::norm(get_word<R>(req[p]));
        if (!seen[j]) full[j * len + e] = v;
        else if (full[j * len + e] != v) ok = false;
      }
      seen[j] = 1;
    }
  }
  return ok;
}

template <class R>
void share_out(const SubsetIndex& idx, PrfStream& rng, const std::vector<typename R::word>& val,
               std::vector<Writer>& out) {
  using Wd = typename R::word;
  const int n = idx.parties().n, q = idx.q();
  const std::size_t len = val.size();
  std::vector<Wd> sh(std::size_t(q) * len);
  for (std::size_t e = 0; e < len; ++e) {
    Wd acc{};
    for (int j = 1; j < q; ++j) {
      Wd v = draw<R>(rng);
      sh[j * len + e] = v;
      acc = R::add(acc, v);
    }
    sh[e] = R::sub(R::norm(val[e]), acc);
  }
  for (int p = 0; p < n; ++p)
    for (int j : idx.held(p))
      for (std::size_t e = 0; e < len; ++e) put_word<R>(out[p], sh[j * len + e]);
}

template <class R>
bool serve_products(const SubsetIndex& idx, std::vector<Reader>& req, PrfStream& rng, std::vector<Writer>& out) {
  using Wd = typename R::word;
  const int n = idx.parties().n, q = idx.q();
  std::uint64_t count = req[0].get(32);
  for (int p = 1; p < n; ++p)
    if (req[p].get(32) != count) return false;
  for (std::uint64_t j = 0; j < count; ++j) {
    std::size_t len = req[0].get(32), nf = req[0].get(32);
    const auto shape = req[0].get(8);
    const bool bcast = shape == 1, square = shape == 2;
    for (int p = 1; p < n; ++p) {
      std::size_t l2 = req[p].get(32), nf2 = req[p].get(32);
      if (l2 != len || nf2 != nf || req[p].get(8) != shape) return false;
    }
    const std::size_t xl = bcast ? nf : len * nf, yl = len * nf;
    std::vector<Wd> X, Y;
    if (!read_rss<R>(idx, req, xl, X)) return false;
    if (square) Y = X;
    else if (!read_rss<R>(idx, req, yl, Y)) return false;
    std::vector<Wd> x(xl, Wd{}), y(yl, Wd{});
    for (int s = 0; s < q; ++s) {
      for (std::size_t e = 0; e < xl; ++e) x[e] = R::add(x[e], X[s * xl + e]);
      for (std::size_t e = 0; e < yl; ++e) y[e] = R::add(y[e], Y[s * yl + e]);
    }
    std::vector<Wd> z(len, Wd{});
    for (std::size_t e = 0; e < len; ++e)
      for (std::size_t k = 0; k < nf; ++k)
        z[e] = R::add(z[e], R::mul(x[bcast ? k : e * nf + k], y[e * nf + k]));
    share_out<R>(idx, rng, z, out);
  }
  return true;
}

bool serve_trgen(const SubsetIndex& idx, std::vector<Reader>& req, PrfStream& rng, std::vector<Writer>& out) {
  const int n = idx.parties().n;
  std::uint64_t count = req[0].get(32);
  for (int p = 1; p < n; ++p)
    if (req[p].get(32) != count) return false;
  for (std::uint64_t j = 0; j < count; ++j) {
    std::size_t len = req[0].get(32);
    int d = static_cast<int>(req[0].get(8));
    for (int p = 1; p < n; ++p)
      if (req[p].get(32) != len || static_cast<int>(req[p].get(8)) != d) return false;
    std::vector<u64> r(len), rd(len);
    for (std::size_t e = 0; e < len; ++e) {
      r[e] = rng.next64();
      rd[e] = asr(r[e], d);
    }
    share_out<Z64>(idx, rng, r, out);
    share_out<Z64>(idx, rng, rd, out);
  }
  return true;
}

}  // namespace

void run_dealer(int n, Endpoint& ep, std::uint64_t seed) {
  PartySet ps(n);
  SubsetIndex idx(ps);
  DealerLink link{ep, n, std::vector<std::uint16_t>(n, 0), std::vector<std::uint16_t>(n, 0)};
  PrfStream rng(derive_key(seed, "dealer", 0), 0);
  int done = 0;
  std::vector<char> finished(n, 0);
  try {
    while (done < n) {
      std::vector<Reader> req(n);
      std::vector<int> from;
      for (int p = 0; p < n; ++p) {
        if (finished[p]) continue;
        Frame f = ep.recv(p);
        if (f.kind != FrameKind::data) {
          link.abort_all();
          return;
        }
        if (f.seq != link.rseq[p]++) throw TransportError("dealer: out-of-order frame");
        req[p] = Reader(std::move(f.payload));
        from.push_back(p);
      }
      int op = static_cast<int>(req[from[0]].get(8));
      bool ok = true;
      for (std::size_t i = 1; i < from.size(); ++i) ok = ok && static_cast<int>(req[from[i]].get(8)) == op;
      if (!ok) {
        link.abort_all();
        return;
      }
      if (op == 0) {
        for (int p : from) finished[p] = 1, ++done;
        continue;
      }
      if (static_cast<int>(from.size()) != n) {
        link.abort_all();
        return;
      }
      std::vector<Writer> out(n);
      for (auto& w : out) w.put(0, 8);
      if (op == 1) {
        int ring = static_cast<int>(req[0].get(8));
        for (int p = 1; p < n; ++p) ok = ok && static_cast<int>(req[p].get(8)) == ring;
        if (ok) {
          if (ring == 0) ok = serve_products<Z64>(idx, req, rng, out);
          else if (ring == 1) ok = serve_products<B64>(idx, req, rng, out);
          else ok = serve_products<Z66>(idx, req, rng, out);
        }
      } else if (op == 2) {
        ok = serve_trgen(idx, req, rng, out);
      } else {
        ok = false;
      }
      if (!ok) {
        for (int p = 0; p < n; ++p) {
          Writer w;
          w.put(1, 8);
          link.reply(p, w);
        }
        continue;
      }
      for (int p = 0; p < n; ++p) link.reply(p, out[p]);
    }
  } catch (const std::exception&) {
    link.abort_all();
  }
}

}  // namespace hmpc
