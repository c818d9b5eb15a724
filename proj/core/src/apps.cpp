#include "hmpc/apps.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

#include "hmpc/gadgets.hpp"
#include "hmpc/prf.hpp"

namespace hmpc {

PartyInputs Program::inputs(int n) const {
  PartyInputs in(n);
  for (const auto& f : feeds) {
    if (f.owner < 0 || f.owner >= n) throw std::invalid_argument("input owner outside the party set");
    in[f.owner][f.wire] = f.values;
  }
  return in;
}

namespace {

int feed(Program& p, int owner, std::vector<u64> values) {
  int w = p.circuit.input(owner, static_cast<std::uint32_t>(values.size()));
  p.feeds.push_back({w, owner, std::move(values)});
  return w;
}

std::vector<std::uint32_t> tile(std::uint32_t period, std::uint32_t count) {
  std::vector<std::uint32_t> v(count);
  for (std::uint32_t i = 0; i < count; ++i) v[i] = i % period;
  return v;
}

std::vector<std::uint32_t> repeat_each(std::uint32_t len, std::uint32_t times) {
  std::vector<std::uint32_t> v;
  v.reserve(std::size_t(len) * times);
  for (std::uint32_t i = 0; i < len; ++i)
    for (std::uint32_t k = 0; k < times; ++k) v.push_back(i);
  return v;
}

}  // namespace

const char* bench_name(BenchKind k) {
  switch (k) {
    case BenchKind::mult: return "mult";
    case BenchKind::mult3: return "mult3";
    case BenchKind::mult4: return "mult4";
    case BenchKind::dotp: return "dotp";
    case BenchKind::dsbits: return "dsbits";
  }
  return "?";
}

BenchKind parse_bench(const std::string& s) {
  for (auto k : {BenchKind::mult, BenchKind::mult3, BenchKind::mult4, BenchKind::dotp, BenchKind::dsbits})
    if (s == bench_name(k)) return k;
  throw std::invalid_argument("unknown benchmark circuit: " + s);
}

Circuit bench_circuit(const BenchShape& s) {
  if (s.depth < 1) throw std::invalid_argument("depth must be at least 1");
  if (s.gates == 0) throw std::invalid_argument("gate count must be positive");
  Circuit c;
  if (s.kind == BenchKind::dsbits) {
    c.dsbits(static_cast<std::uint32_t>(s.gates), 1);
    return c;
  }
  if (s.gates % s.depth != 0) throw std::invalid_argument("gate count must divide evenly across the levels");
  if (s.trunc && s.kind != BenchKind::mult && s.kind != BenchKind::dotp)
    throw std::invalid_argument("truncation applies to mult and dotp only");
  const auto w = static_cast<std::uint32_t>(s.gates / s.depth);
  int z = c.rand_in(w);
  int x = c.rand_in(s.kind == BenchKind::dotp ? w * s.nf : w);
  int y = s.kind == BenchKind::mult3 || s.kind == BenchKind::mult4 ? c.rand_in(w) : -1;
  int u = s.kind == BenchKind::mult4 ? c.rand_in(w) : -1;
  const auto rep = s.kind == BenchKind::dotp ? repeat_each(w, s.nf) : std::vector<std::uint32_t>{};
  for (int d = 0; d < s.depth; ++d) {
    switch (s.kind) {
      case BenchKind::mult: z = c.mul(z, x, s.trunc); break;
      case BenchKind::mult3: z = c.mul3(z, x, y); break;
      case BenchKind::mult4: z = c.mul4(z, x, y, u); break;
      case BenchKind::dotp: z = c.dotp(c.gather(z, rep), x, s.nf, s.trunc); break;
      case BenchKind::dsbits: break;
    }
  }
  return c;
}

BioInstance random_bio(std::size_t m, std::size_t nf, std::uint64_t seed, int frac_bits) {
  if (m == 0 || nf == 0) throw std::invalid_argument("biometric database must be non-empty");
  std::mt19937_64 rng(seed);
  BioInstance b;
  b.frac_bits = frac_bits;
  auto draw = [&] {
    if (frac_bits == 0) return static_cast<u64>(rng() % 256);
    std::uniform_real_distribution<double> d(-4.0, 4.0);
    return fp_encode_raw(d(rng), frac_bits);
  };
  b.db.assign(m, std::vector<u64>(nf));
  for (auto& s : b.db)
    for (auto& v : s) v = draw();
  b.query.resize(nf);
  for (auto& v : b.query) v = draw();
  return b;
}

BioProgram build_bio(const BioInstance& inst) {
  const std::size_t m = inst.db.size();
  if (m == 0) throw std::invalid_argument("biometric database must be non-empty");
  const std::size_t nf = inst.query.size();
  std::vector<u64> flat;
  flat.reserve(m * nf);
  for (const auto& s : inst.db) {
    if (s.size() != nf) throw std::invalid_argument("biometric sample length mismatch");
    flat.insert(flat.end(), s.begin(), s.end());
  }
  BioProgram bp;
  bp.m = m, bp.nf = nf;
  Program& p = bp.prog;
  Circuit& c = p.circuit;
  int db = feed(p, 0, std::move(flat));
  int q = feed(p, 1, inst.query);
  const auto total = static_cast<std::uint32_t>(m * nf);
  int z = c.sub(db, c.gather(q, tile(static_cast<std::uint32_t>(nf), total)));
  int dist = c.dotp(z, z, static_cast<std::uint32_t>(nf), inst.frac_bits);
  auto best = pool(c, dist, false, true, true);
  c.output(dist);
  c.output(best.value);
  c.output(best.index);
  c.output_b(best.onehot);
  return bp;
}

SsqInstance random_ssq(std::size_t m, std::size_t blocks, int block_len, int variants, std::uint64_t seed) {
  if (m == 0 || blocks == 0 || block_len < 2 || variants < 1) throw std::invalid_argument("invalid ssq shape");
  static const char kBases[] = "ACGT";
  std::mt19937_64 rng(seed);
  auto base = [&] { return kBases[rng() % 4]; };
  auto mutate = [&](std::string s) {
    int edits = 1 + static_cast<int>(rng() % 3);
    for (int e = 0; e < edits; ++e) {
      if (rng() % 2) {
        s[rng() % s.size()] = base();
      } else {
        s.erase(rng() % s.size(), 1);
        s.insert(s.begin() + static_cast<long>(rng() % (s.size() + 1)), base());
      }
    }
    return s;
  };
  std::vector<std::vector<std::string>> var(blocks);
  for (auto& v : var) {
    std::string ref(block_len, 'A');
    for (auto& ch : ref) ch = base();
    v.push_back(ref);
    for (int k = 1; k < variants; ++k) v.push_back(mutate(ref));
  }
  std::vector<double> weights(variants);
  for (int k = 0; k < variants; ++k) weights[k] = 1.0 / (k + 1);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  SsqInstance inst;
  inst.block_len = block_len;
  inst.db.resize(m);
  for (auto& s : inst.db)
    for (std::size_t i = 0; i < blocks; ++i) s += var[i][pick(rng)];
  for (std::size_t i = 0; i < blocks; ++i) inst.query += rng() % 10 ? var[i][pick(rng)] : mutate(var[i][0]);
  return inst;
}

std::size_t SsqLuts::columns() const {
  std::size_t k = 0;
  for (const auto& b : keys) k += b.size();
  return k;
}

u64 block_id(const std::string& block) {
  Digest d = sha256(block.data(), block.size());
  u64 v;
  std::memcpy(&v, d.data(), sizeof v);
  return v;
}

int wagner_fischer(const std::string& a, const std::string& b) {
  const std::size_t cols = b.size() + 1;
  std::vector<int> D((a.size() + 1) * cols);
  for (std::size_t i = 0; i <= a.size(); ++i) D[i * cols] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) D[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j) {
      int sub = D[(i - 1) * cols + j - 1] + (a[i - 1] != b[j - 1]);
      D[i * cols + j] = std::min({D[(i - 1) * cols + j] + 1, D[i * cols + j - 1] + 1, sub});
    }
  return D.back();
}

SsqLuts build_luts(const SsqInstance& inst) {
  if (inst.db.empty()) throw std::invalid_argument("ssq: empty database");
  const std::size_t L = inst.query.size(), bl = static_cast<std::size_t>(inst.block_len);
  if (bl == 0 || L % bl != 0) throw std::invalid_argument("ssq: query is not a whole number of blocks");
  for (const auto& s : inst.db)
    if (s.size() != L) throw std::invalid_argument("ssq: sequence length differs from the query");
  SsqLuts out;
  out.blocks = L / bl;
  std::vector<std::vector<std::string>> key_str(out.blocks);
  out.keys.resize(out.blocks);
  for (std::size_t i = 0; i < out.blocks; ++i) {
    for (const auto& s : inst.db) {
      std::string b = s.substr(i * bl, bl);
      if (std::find(key_str[i].begin(), key_str[i].end(), b) == key_str[i].end()) key_str[i].push_back(b);
    }
    for (const auto& k : key_str[i]) out.keys[i].push_back(block_id(k));
    out.query_ids.push_back(block_id(inst.query.substr(i * bl, bl)));
  }
  for (const auto& s : inst.db) {
    std::vector<u64> row;
    row.reserve(out.columns());
    for (std::size_t i = 0; i < out.blocks; ++i) {
      std::string b = s.substr(i * bl, bl);
      for (const auto& k : key_str[i]) row.push_back(static_cast<u64>(wagner_fischer(b, k)));
    }
    out.lut.push_back(std::move(row));
  }
  return out;
}

SsqProgram build_ssq(const SsqLuts& luts) {
  const std::size_t m = luts.lut.size(), K = luts.columns();
  if (m == 0) throw std::invalid_argument("ssq: empty database");
  if (luts.keys.size() != luts.blocks || luts.query_ids.size() != luts.blocks)
    throw std::invalid_argument("ssq: block count mismatch");
  std::vector<u64> keys, flat;
  std::vector<std::uint32_t> col_block;
  for (std::size_t i = 0; i < luts.blocks; ++i) {
    keys.insert(keys.end(), luts.keys[i].begin(), luts.keys[i].end());
    col_block.insert(col_block.end(), luts.keys[i].size(), static_cast<std::uint32_t>(i));
  }
  flat.reserve(m * K);
  for (const auto& row : luts.lut) {
    if (row.size() != K) throw std::invalid_argument("ssq: lookup table dimension mismatch");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  SsqProgram sp;
  sp.m = m, sp.columns = K;
  Program& p = sp.prog;
  Circuit& c = p.circuit;
  int kw = feed(p, 0, std::move(keys));
  int lw = feed(p, 0, std::move(flat));
  int q = feed(p, 1, luts.query_ids);
  int match = bit2a(c, eq(c, kw, c.gather(q, std::move(col_block))));
  int dist = c.dotp(match, lw, static_cast<std::uint32_t>(K), 0, true);
  auto best = pool(c, dist, false, true);
  c.output(dist);
  c.output(best.value);
  c.output(best.index);
  return sp;
}

oracle::Mlp random_mlp(const std::vector<std::size_t>& dims, std::uint64_t seed) {
  if (dims.size() < 2) throw std::invalid_argument("network needs at least one layer");
  std::mt19937_64 rng(seed);
  oracle::Mlp net;
  net.dims = dims;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    std::uniform_real_distribution<double> w(-scale, scale), b(-0.1, 0.1);
    std::vector<double> W(dims[l] * dims[l + 1]), B(dims[l + 1]);
    for (auto& v : W) v = w(rng);
    for (auto& v : B) v = b(rng);
    net.weights.push_back(std::move(W));
    net.biases.push_back(std::move(B));
  }
  return net;
}

std::vector<std::vector<double>> random_mlp_inputs(std::size_t count, std::size_t width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<std::vector<double>> xs(count, std::vector<double>(width));
  for (auto& x : xs)
    for (auto& v : x) v = d(rng);
  return xs;
}

Nn1Program build_nn1(const oracle::Mlp& net, const std::vector<std::vector<double>>& batch, int frac_bits) {
  const std::size_t layers = net.weights.size();
  if (layers == 0 || net.dims.size() != layers + 1 || net.biases.size() != layers)
    throw std::invalid_argument("network shape mismatch");
  if (batch.empty()) throw std::invalid_argument("empty input batch");
  const auto B = static_cast<std::uint32_t>(batch.size());
  Nn1Program np;
  np.batch = B, np.classes = net.dims.back();
  Program& p = np.prog;
  Circuit& c = p.circuit;
  std::vector<u64> xs;
  for (const auto& x : batch) {
    if (x.size() != net.dims[0]) throw std::invalid_argument("input width mismatch");
    for (double v : x) xs.push_back(fp_encode_raw(v, frac_bits));
  }
  int cur = feed(p, 1, std::move(xs));
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<std::uint32_t>(net.dims[l]), out = static_cast<std::uint32_t>(net.dims[l + 1]);
    if (net.weights[l].size() != std::size_t(in) * out || net.biases[l].size() != out)
      throw std::invalid_argument("layer shape mismatch");
    std::vector<u64> wt(std::size_t(in) * out), bias(out);
    for (std::uint32_t o = 0; o < out; ++o)
      for (std::uint32_t i = 0; i < in; ++i) wt[std::size_t(i) * out + o] = fp_encode_raw(net.weights[l][o * in + i], frac_bits);
    for (std::uint32_t o = 0; o < out; ++o) bias[o] = fp_encode_raw(net.biases[l][o], frac_bits);
    int W = feed(p, 0, std::move(wt));
    int b = feed(p, 0, std::move(bias));
    cur = c.add(matmul(c, cur, W, B, in, out, frac_bits), c.gather(b, tile(out, B * out)));
    if (l + 1 < layers) cur = relu(c, cur);
  }
  c.output(cur);
  return np;
}

namespace {

void compare_pool(AppCheck& r, const std::vector<u64>& want, const oracle::PoolValue& best, const Outputs& out) {
  if (out.size() < 3 || out[0].size() != want.size() || out[1].size() != 1 || out[2].size() != 1)
    throw std::invalid_argument("unexpected output shape");
  for (std::size_t i = 0; i < want.size(); ++i) {
    ++r.compared;
    if (out[0][i] != want[i]) ++r.mismatched;
  }
  r.compared += 2;
  r.best_value = out[1][0];
  r.best_index = static_cast<std::size_t>(out[2][0]);
  if (r.best_value != best.value) ++r.mismatched;
  if (r.best_index != best.index) ++r.mismatched;
}

}  // namespace

AppCheck check_bio(const BioInstance& inst, const Outputs& out) {
  AppCheck r;
  if (inst.frac_bits == 0) {
    auto ref = oracle::biometric(inst.db, inst.query);
    compare_pool(r, ref.distances, ref.best, out);
    if (out.size() > 3) {
      for (std::size_t i = 0; i < out[3].size(); ++i) {
        ++r.compared;
        if (out[3][i] != (i == ref.best.index ? 1u : 0u)) ++r.mismatched;
      }
    }
    return r;
  }
  // fixed point: each distance carries one truncation of its dot product
  const long double bound = static_cast<long double>(inst.query.size()) + 1;
  const long double scale = std::ldexp(1.0L, inst.frac_bits);
  for (std::size_t s = 0; s < inst.db.size(); ++s) {
    long double ideal = 0;
    for (std::size_t k = 0; k < inst.query.size(); ++k) {
      long double d = static_cast<long double>(static_cast<i64>(inst.db[s][k] - inst.query[k]));
      ideal += d * d / scale;
    }
    ++r.compared;
    if (std::fabs(static_cast<long double>(static_cast<i64>(out[0][s])) - ideal) > bound) ++r.mismatched;
  }
  r.best_value = out[1][0];
  r.best_index = static_cast<std::size_t>(out[2][0]);
  ++r.compared;
  if (r.best_index >= inst.db.size() || out[0][r.best_index] != r.best_value) ++r.mismatched;
  return r;
}

oracle::SsqResult ssq_from_luts(const SsqLuts& luts) {
  oracle::SsqResult res;
  for (const auto& row : luts.lut) {
    u64 d = 0;
    std::size_t col = 0;
    for (std::size_t i = 0; i < luts.blocks; ++i) {
      for (std::size_t j = 0; j < luts.keys[i].size(); ++j)
        if (luts.keys[i][j] == luts.query_ids[i]) d += row[col + j];
      col += luts.keys[i].size();
    }
    res.distances.push_back(d);
  }
  res.best = oracle::minpool(res.distances);
  return res;
}

AppCheck check_ssq(const SsqLuts& luts, const Outputs& out) {
  AppCheck r;
  auto ref = ssq_from_luts(luts);
  compare_pool(r, ref.distances, ref.best, out);
  return r;
}

AppCheck check_nn1(const oracle::Mlp& net, const std::vector<std::vector<double>>& batch, const Outputs& out,
                   int frac_bits) {
  AppCheck r;
  const std::size_t classes = net.dims.back();
  if (out.empty() || out[0].size() != batch.size() * classes) throw std::invalid_argument("unexpected output shape");
  for (std::size_t b = 0; b < batch.size(); ++b) {
    std::vector<double> logits(classes);
    auto fixed = oracle::mlp_fixed(net, batch[b], frac_bits);
    for (std::size_t k = 0; k < classes; ++k) {
      const u64 v = out[0][b * classes + k];
      logits[k] = fp_decode_raw(v, frac_bits);
      ++r.compared;
      if (!fixed[k].admits(v)) ++r.mismatched;
    }
    if (oracle::argmax(logits) == oracle::argmax(oracle::mlp_float(net, batch[b]))) ++r.agree;
  }
  return r;
}

}  // namespace hmpc
