#include "hmpc/gadgets.hpp"

#include <stdexcept>

namespace hmpc {

namespace {

constexpr std::uint64_t kTop = std::uint64_t(1) << 63;

std::vector<std::uint32_t> iota_step(std::uint32_t start, std::uint32_t count, std::uint32_t step) {
  std::vector<std::uint32_t> v(count);
  for (std::uint32_t i = 0; i < count; ++i) v[i] = start + i * step;
  return v;
}

}  // namespace

int bit2a(Circuit& c, int b) {
  const Wire& w = c.wire(b);
  if (w.lanes != 1) throw std::invalid_argument("bit2a: expects a single-lane Boolean wire");
  auto [ra, rb] = c.dsbits(w.len, 1);
  int z = c.open_b(c.bxor(b, rb));
  int za = c.bitpub(z);
  int p = c.mul(za, ra);
  return c.sub(c.add(za, ra), c.cmul(p, 2));
}

int bit_inject(Circuit& c, int b, int v) {
  int lb;
  {
    NestedScope ns(c);
    lb = bit2a(c, c.rss_in_b(b));
  }
  return c.inject(b, v, lb);
}

int a2b(Circuit& c, int x) {
  std::uint32_t len = c.wire(x).len;
  auto [ra, rb] = c.dsbits(len, 64);
  int y = c.mbits(c.open(c.add(x, ra)));
  int nr = c.bnot(rb);
  int g = c.band(y, nr);
  int p = c.bxor(y, nr);
  int G = c.bxor(g, c.bandc(p, 1));
  int P = c.bandc(p, ~std::uint64_t(1));
  for (int k = 1; k < 64; k *= 2) {
    int t = c.band(P, c.bshl(G, k));
    if (k < 32) P = c.band(P, c.bshl(P, k));
    G = c.bxor(G, t);
  }
  return c.bxorc(c.bxor(p, c.bshl(G, 1)), 1);
}

int b2a(Circuit& c, int bits) {
  int lanes = c.wire(bits).lanes;
  int a = bit2a(c, c.unpack(bits));
  std::vector<std::uint64_t> w(lanes);
  for (int i = 0; i < lanes; ++i) w[i] = std::uint64_t(1) << i;
  return c.wsum(a, std::move(w));
}

int maskbits(Circuit& c, int v) {
  NestedScope ns(c);
  return a2b(c, c.rss_in(v));
}

int msb(Circuit& c, int v) {
  int s = c.bnot(maskbits(c, v));
  int a = c.mbits(v);
  int g = c.band(a, s);
  int p = c.bxor(a, s);
  int G = c.bandc(c.bxor(g, c.bandc(p, 1)), ~kTop);
  int P = c.bxorc(c.bandc(p, ~kTop & ~std::uint64_t(1)), kTop);
  for (int s1 : {1, 4, 16}) {
    int p1 = c.bshl(P, s1), p2 = c.bshl(P, 2 * s1);
    int t1 = c.band(P, c.bshl(G, s1));
    int t2 = c.band3(P, p1, c.bshl(G, 2 * s1));
    int t3 = c.band4(P, p1, p2, c.bshl(G, 3 * s1));
    if (s1 < 16) P = c.band4(P, p1, p2, c.bshl(P, 3 * s1));
    G = c.bxor(c.bxor(G, t1), c.bxor(t2, t3));
  }
  return c.relane(c.bxor(c.bshr(p, 63), c.bshr(G, 63)), 1);
}

int lt(Circuit& c, int x, int y) { return msb(c, c.sub(x, y)); }

int eq(Circuit& c, int x, int y) {
  int v = c.sub(x, y);
  int f = c.bnot(c.bxor(c.mbits(v), maskbits(c, v)));
  for (int s : {1, 4, 16}) f = c.band4(f, c.bshr(f, s), c.bshr(f, 2 * s), c.bshr(f, 3 * s));
  return c.relane(f, 1);
}

int relu(Circuit& c, int v) { return bit_inject(c, c.bnot(msb(c, v)), v); }

int select(Circuit& c, int b, int x, int y) { return c.add(bit_inject(c, b, c.sub(y, x)), x); }

PoolResult pool(Circuit& c, int v, bool take_max, bool with_index, bool with_onehot) {
  std::uint32_t m = c.wire(v).len;
  PoolResult res;
  int cur = v;
  int idx = -1;
  if (with_index) {
    std::vector<std::uint64_t> ids(m);
    for (std::uint32_t i = 0; i < m; ++i) ids[i] = i;
    idx = c.constant(std::move(ids));
  }
  // node -> leaves currently represented by it
  std::vector<std::vector<std::uint32_t>> leaves(m);
  for (std::uint32_t i = 0; i < m; ++i) leaves[i] = {i};
  std::vector<int> factors;
  while (c.wire(cur).len > 1) {
    std::uint32_t len = c.wire(cur).len, pairs = len / 2;
    int L = c.gather(cur, iota_step(0, pairs, 2));
    int R = c.gather(cur, iota_step(1, pairs, 2));
    int b = take_max ? lt(c, L, R) : lt(c, R, L);
    int d = c.sub(R, L);
    int sel;
    if (with_index) {
      int di = c.sub(c.gather(idx, iota_step(1, pairs, 2)), c.gather(idx, iota_step(0, pairs, 2)));
      int both = bit_inject(c, c.concat({b, b}), c.concat({d, di}));
      sel = c.add(c.gather(both, iota_step(0, pairs, 1)), L);
      int nidx = c.add(c.gather(both, iota_step(pairs, pairs, 1)), c.gather(idx, iota_step(0, pairs, 2)));
      idx = len % 2 ? c.concat({nidx, c.gather(idx, {len - 1})}) : nidx;
    } else {
      sel = c.add(bit_inject(c, b, d), L);
    }
    if (with_onehot) {
      // per leaf: the comparison bit of its pair, complemented on the left side; 1 when passed through
      int ext = c.concat({b, c.constant_b({0}, 1)});
      std::vector<std::uint32_t> pick(m, pairs);
      std::vector<std::uint64_t> flip(m, 1);
      for (std::uint32_t k = 0; k < pairs; ++k) {
        for (auto leaf : leaves[2 * k]) pick[leaf] = k, flip[leaf] = 1;
        for (auto leaf : leaves[2 * k + 1]) pick[leaf] = k, flip[leaf] = 0;
      }
      factors.push_back(c.bxor(c.gather(ext, pick), c.constant_b(flip, 1)));
      std::vector<std::vector<std::uint32_t>> next(pairs);
      for (std::uint32_t k = 0; k < pairs; ++k) {
        next[k] = leaves[2 * k];
        next[k].insert(next[k].end(), leaves[2 * k + 1].begin(), leaves[2 * k + 1].end());
      }
      if (len % 2) next.push_back(leaves[len - 1]);
      leaves = std::move(next);
    }
    cur = len % 2 ? c.concat({sel, c.gather(cur, {len - 1})}) : sel;
  }
  res.value = cur;
  res.index = idx;
  if (with_onehot) {
    if (factors.empty()) {
      res.onehot = c.constant_b({1}, 1);
    } else {
      while (factors.size() > 1) {
        std::vector<int> next;
        std::size_t i = 0;
        for (; i + 4 <= factors.size(); i += 4)
          next.push_back(c.band4(factors[i], factors[i + 1], factors[i + 2], factors[i + 3]));
        std::size_t rest = factors.size() - i;
        if (rest == 3) next.push_back(c.band3(factors[i], factors[i + 1], factors[i + 2]));
        if (rest == 2) next.push_back(c.band(factors[i], factors[i + 1]));
        if (rest == 1) next.push_back(factors[i]);
        factors = std::move(next);
      }
      res.onehot = factors[0];
    }
  }
  return res;
}

int matmul(Circuit& c, int A, int B, std::uint32_t a, std::uint32_t b, std::uint32_t cols, int trunc) {
  if (c.wire(A).len != a * b || c.wire(B).len != b * cols) throw std::invalid_argument("matmul: dimension mismatch");
  std::vector<std::uint32_t> xi, yi;
  xi.reserve(std::size_t(a) * cols * b);
  yi.reserve(std::size_t(a) * cols * b);
  for (std::uint32_t i = 0; i < a; ++i)
    for (std::uint32_t j = 0; j < cols; ++j)
      for (std::uint32_t k = 0; k < b; ++k) {
        xi.push_back(i * b + k);
        yi.push_back(k * cols + j);
      }
  return c.dotp(c.gather(A, std::move(xi)), c.gather(B, std::move(yi)), b, trunc);
}

GadgetCounts comparison_counts(bool equality) {
  Circuit c;
  int x = c.input(0, 1), y = c.input(0, 1);
  std::size_t before = c.gates().size();
  int out = equality ? eq(c, x, y) : lt(c, x, y);
  (void)out;
  GadgetCounts k;
  std::vector<std::size_t> depth(c.wires().size(), 0);
  for (std::size_t gi = before; gi < c.gates().size(); ++gi) {
    const Gate& g = c.gates()[gi];
    if (g.nested || g.out < 0) continue;
    std::size_t d = 0;
    for (int w : g.in)
      if (w >= 0) d = std::max(d, depth[w]);
    for (int w : g.ins) d = std::max(d, depth[w]);
    if (g.op == Op::band || g.op == Op::band3 || g.op == Op::band4) {
      ++d;
      std::size_t lanes_used = 64;
      (g.op == Op::band ? k.and2 : g.op == Op::band3 ? k.and3 : k.and4) += lanes_used;
    }
    depth[g.out] = d;
    k.depth = std::max(k.depth, d);
  }
  return k;
}

}  // namespace hmpc
