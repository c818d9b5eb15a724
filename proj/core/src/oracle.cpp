#include "hmpc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace hmpc {

using nlohmann::json;

const char* plain_kind_name(PlainKind k) {
  switch (k) {
    case PlainKind::add: return "add";
    case PlainKind::sub: return "sub";
    case PlainKind::cmul: return "cmul";
    case PlainKind::mul: return "mul";
    case PlainKind::mul3: return "mul3";
    case PlainKind::mul4: return "mul4";
    case PlainKind::dotp: return "dotp";
    case PlainKind::trunc_mul: return "trunc_mul";
  }
  return "?";
}

PlainKind plain_kind_from(const std::string& s) {
  for (auto k : {PlainKind::add, PlainKind::sub, PlainKind::cmul, PlainKind::mul, PlainKind::mul3, PlainKind::mul4,
                 PlainKind::dotp, PlainKind::trunc_mul})
    if (s == plain_kind_name(k)) return k;
  throw std::invalid_argument("unknown gate kind '" + s + "'");
}

std::string plain_to_json(const PlainCircuit& c) {
  json j;
  j["n_wires"] = c.n_wires;
  j["frac_bits"] = c.frac_bits;
  j["inputs"] = json::array();
  for (const auto& in : c.inputs) j["inputs"].push_back({{"wire", in.wire}, {"owner", in.owner}});
  j["gates"] = json::array();
  for (const auto& g : c.gates) {
    json x = {{"kind", plain_kind_name(g.kind)}, {"out", g.out}, {"in", g.in}};
    if (g.kind == PlainKind::cmul) x["c"] = g.c;
    j["gates"].push_back(x);
  }
  j["outputs"] = c.outputs;
  return j.dump();
}

PlainCircuit plain_from_json(const std::string& text) {
  json j = json::parse(text);
  PlainCircuit c;
  c.n_wires = j.at("n_wires").get<int>();
  c.frac_bits = j.value("frac_bits", kFrac);
  for (const auto& x : j.at("inputs")) c.inputs.push_back({x.at("wire").get<int>(), x.value("owner", 0)});
  for (const auto& x : j.at("gates")) {
    PlainGate g;
    g.kind = plain_kind_from(x.at("kind").get<std::string>());
    g.out = x.at("out").get<int>();
    g.in = x.at("in").get<std::vector<int>>();
    g.c = x.value("c", std::uint64_t(0));
    c.gates.push_back(std::move(g));
  }
  c.outputs = j.at("outputs").get<std::vector<int>>();
  validate(c);
  return c;
}

void validate(const PlainCircuit& c) {
  std::vector<char> defined(c.n_wires, 0);
  auto def = [&](int w) {
    if (w < 0 || w >= c.n_wires) throw std::invalid_argument("wire id out of range: " + std::to_string(w));
    if (defined[w]) throw std::invalid_argument("wire defined twice: " + std::to_string(w));
    defined[w] = 1;
  };
  auto use = [&](int w) {
    if (w < 0 || w >= c.n_wires || !defined[w]) throw std::invalid_argument("wire used before definition: " + std::to_string(w));
  };
  for (const auto& in : c.inputs) {
    if (in.owner < 0) throw std::invalid_argument("negative input owner");
    def(in.wire);
  }
  for (const auto& g : c.gates) {
    std::size_t need = 0;
    switch (g.kind) {
      case PlainKind::cmul: need = 1; break;
      case PlainKind::add:
      case PlainKind::sub:
      case PlainKind::mul:
      case PlainKind::trunc_mul: need = 2; break;
      case PlainKind::mul3: need = 3; break;
      case PlainKind::mul4: need = 4; break;
      case PlainKind::dotp:
        if (g.in.empty() || g.in.size() % 2) throw std::invalid_argument("dotp needs 2*nf inputs");
        need = g.in.size();
        break;
    }
    if (g.in.size() != need) throw std::invalid_argument(std::string("wrong fan-in for ") + plain_kind_name(g.kind));
    for (int w : g.in) use(w);
    def(g.out);
  }
  for (int w : c.outputs) use(w);
}

PlainCircuit random_plain_circuit(std::uint64_t seed, int n_parties, int n_inputs, int n_gates, int n_outputs) {
  std::mt19937_64 rng(seed);
  PlainCircuit c;
  c.n_wires = n_inputs + n_gates;
  for (int i = 0; i < n_inputs; ++i) c.inputs.push_back({i, static_cast<int>(rng() % n_parties)});
  const PlainKind kinds[] = {PlainKind::add, PlainKind::sub, PlainKind::cmul, PlainKind::mul,
                             PlainKind::mul3, PlainKind::mul4, PlainKind::dotp};
  for (int i = 0; i < n_gates; ++i) {
    int avail = n_inputs + i;
    auto pick = [&] { return static_cast<int>(rng() % avail); };
    PlainGate g;
    g.kind = kinds[rng() % 7];
    g.out = avail;
    switch (g.kind) {
      case PlainKind::cmul: g.in = {pick()}; g.c = rng(); break;
      case PlainKind::mul3: g.in = {pick(), pick(), pick()}; break;
      case PlainKind::mul4: g.in = {pick(), pick(), pick(), pick()}; break;
      case PlainKind::dotp: {
        int nf = 1 + static_cast<int>(rng() % 4);
        for (int k = 0; k < 2 * nf; ++k) g.in.push_back(pick());
        break;
      }
      default: g.in = {pick(), pick()}; break;
    }
    c.gates.push_back(std::move(g));
  }
  for (int i = 0; i < n_outputs && i < c.n_wires; ++i) c.outputs.push_back(c.n_wires - 1 - i);
  return c;
}

namespace oracle {

namespace {

bool mul_ok(i128 a, i128 b, i128& out) { return !__builtin_mul_overflow(a, b, &out); }

bool shift_ok(i128 a, int s, i128& out) {
  if (s >= 126) return a == 0 ? (out = 0, true) : false;
  i128 lim = i128(1) << (126 - s);
  if (a >= lim || a <= -lim) return false;
  out = a * (i128(1) << s);
  return true;
}

ShadowValue sv_input(u64 raw) {
  ShadowValue v;
  v.ring = raw;
  v.num = static_cast<i64>(raw);
  return v;
}

ShadowValue sv_add(const ShadowValue& a, const ShadowValue& b, bool subtract) {
  ShadowValue r;
  r.ring = subtract ? a.ring - b.ring : a.ring + b.ring;
  r.k = a.k + b.k;
  r.err = a.err + b.err;
  r.exp = std::max(a.exp, b.exp);
  i128 x, y;
  r.tracked = a.tracked && b.tracked && shift_ok(a.num, r.exp - a.exp, x) && shift_ok(b.num, r.exp - b.exp, y) &&
              !(subtract ? __builtin_sub_overflow(x, y, &r.num) : __builtin_add_overflow(x, y, &r.num));
  return r;
}

ShadowValue sv_cmul(const ShadowValue& a, u64 c) {
  ShadowValue r = a;
  r.ring = a.ring * c;
  i128 cc = static_cast<i64>(c);
  r.tracked = a.tracked && mul_ok(a.num, cc, r.num);
  r.err = a.err * std::fabs(static_cast<long double>(static_cast<i64>(c)));
  return r;
}

ShadowValue sv_mul(const ShadowValue& a, const ShadowValue& b, int trunc) {
  ShadowValue r;
  r.ring = a.ring * b.ring;
  r.exp = a.exp + b.exp + trunc;
  r.k = a.k + b.k + (trunc ? 1 : 0);
  r.tracked = a.tracked && b.tracked && mul_ok(a.num, b.num, r.num) && r.exp < 120;
  long double x = std::fabs(a.ideal()), y = std::fabs(b.ideal());
  r.err = (x * b.err + y * a.err + a.err * b.err) / std::ldexp(1.0L, trunc) + (trunc ? 1 : 0);
  if (trunc) r.ring = static_cast<u64>(static_cast<i64>(std::floor(r.ideal())));
  return r;
}

// Sum of products with a single truncation at the end.
ShadowValue sv_dot(const std::vector<ShadowValue>& x, const std::vector<ShadowValue>& y, int trunc) {
  ShadowValue acc;
  acc.exp = -1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ShadowValue p = sv_mul(x[i], y[i], 0);
    acc = acc.exp < 0 ? p : sv_add(acc, p, false);
  }
  if (trunc) {
    acc.exp += trunc;
    acc.err = acc.err / std::ldexp(1.0L, trunc) + 1;
    acc.k += 1;
    acc.tracked = acc.tracked && acc.exp < 120;
    acc.ring = static_cast<u64>(static_cast<i64>(std::floor(acc.ideal())));
  }
  return acc;
}

}  // namespace

long double ShadowValue::ideal() const { return std::ldexp(static_cast<long double>(num), -exp); }

bool ShadowValue::admits(u64 engine_ring) const {
  if (k == 0) return engine_ring == ring;
  if (!tracked) return false;
  i128 scaled;
  if (exp < 62 && shift_ok(static_cast<i64>(engine_ring), exp, scaled)) {
    i128 diff = scaled - num;
    if (diff < 0) diff = -diff;
    return static_cast<long double>(diff) <= err * std::ldexp(1.0L, exp);
  }
  return std::fabs(static_cast<long double>(static_cast<i64>(engine_ring)) - ideal()) <= err;
}

std::vector<ShadowValue> eval_circuit_plain(const PlainCircuit& c, const std::vector<u64>& inputs) {
  validate(c);
  if (inputs.size() != c.inputs.size()) throw std::invalid_argument("input count mismatch");
  std::vector<ShadowValue> w(c.n_wires);
  for (std::size_t i = 0; i < inputs.size(); ++i) w[c.inputs[i].wire] = sv_input(inputs[i]);
  for (const auto& g : c.gates) {
    const auto& in = g.in;
    switch (g.kind) {
      case PlainKind::add: w[g.out] = sv_add(w[in[0]], w[in[1]], false); break;
      case PlainKind::sub: w[g.out] = sv_add(w[in[0]], w[in[1]], true); break;
      case PlainKind::cmul: w[g.out] = sv_cmul(w[in[0]], g.c); break;
      case PlainKind::mul: w[g.out] = sv_mul(w[in[0]], w[in[1]], 0); break;
      case PlainKind::trunc_mul: w[g.out] = sv_mul(w[in[0]], w[in[1]], c.frac_bits); break;
      case PlainKind::mul3: w[g.out] = sv_mul(sv_mul(w[in[0]], w[in[1]], 0), w[in[2]], 0); break;
      case PlainKind::mul4:
        w[g.out] = sv_mul(sv_mul(w[in[0]], w[in[1]], 0), sv_mul(w[in[2]], w[in[3]], 0), 0);
        break;
      case PlainKind::dotp: {
        std::size_t nf = in.size() / 2;
        std::vector<ShadowValue> x, y;
        for (std::size_t k = 0; k < nf; ++k) x.push_back(w[in[k]]), y.push_back(w[in[nf + k]]);
        w[g.out] = sv_dot(x, y, 0);
        break;
      }
    }
  }
  std::vector<ShadowValue> out;
  for (int o : c.outputs) out.push_back(w[o]);
  return out;
}

namespace {

PoolValue pool(const std::vector<u64>& v, bool take_max) {
  if (v.empty()) throw std::invalid_argument("pool of an empty vector");
  PoolValue best{v[0], 0};
  for (std::size_t i = 1; i < v.size(); ++i) {
    i64 x = static_cast<i64>(v[i]), b = static_cast<i64>(best.value);
    if (take_max ? x > b : x < b) best = {v[i], i};
  }
  return best;
}

}  // namespace

PoolValue maxpool(const std::vector<u64>& v) { return pool(v, true); }
PoolValue minpool(const std::vector<u64>& v) { return pool(v, false); }

std::vector<ShadowValue> matmul(const std::vector<u64>& A, const std::vector<u64>& B, std::size_t a, std::size_t b,
                                std::size_t c, int trunc) {
  if (A.size() != a * b || B.size() != b * c) throw std::invalid_argument("matmul: dimension mismatch");
  std::vector<ShadowValue> out;
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      std::vector<ShadowValue> x, y;
      for (std::size_t k = 0; k < b; ++k) x.push_back(sv_input(A[i * b + k])), y.push_back(sv_input(B[k * c + j]));
      out.push_back(sv_dot(x, y, trunc));
    }
  return out;
}

u64 euclid_sq(const std::vector<u64>& x, const std::vector<u64>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("euclid: length mismatch");
  u64 s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return s;
}

BioResult biometric(const std::vector<std::vector<u64>>& db, const std::vector<u64>& query) {
  BioResult r;
  for (const auto& s : db) r.distances.push_back(euclid_sq(s, query));
  r.best = minpool(r.distances);
  return r;
}

int edit_distance(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

SsqResult ssq(const std::vector<std::string>& db, const std::string& query, int block_len) {
  if (db.empty()) throw std::invalid_argument("ssq: empty database");
  std::size_t blocks = query.size() / block_len;
  SsqResult r;
  for (const auto& s : db) {
    if (s.size() != query.size()) throw std::invalid_argument("ssq: length mismatch");
    u64 d = 0;
    for (std::size_t i = 0; i < blocks; ++i) {
      std::string qb = query.substr(i * block_len, block_len);
      bool present = false;
      for (const auto& other : db) present = present || other.compare(i * block_len, block_len, qb) == 0;
      if (present) d += static_cast<u64>(edit_distance(s.substr(i * block_len, block_len), qb));
    }
    r.distances.push_back(d);
  }
  r.best = minpool(r.distances);
  return r;
}

std::vector<double> mlp_float(const Mlp& net, const std::vector<double>& x) {
  std::vector<double> cur = x;
  std::size_t layers = net.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    std::size_t in = net.dims[l], out = net.dims[l + 1];
    std::vector<double> nxt(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = net.biases[l][o];
      for (std::size_t i = 0; i < in; ++i) s += net.weights[l][o * in + i] * cur[i];
      nxt[o] = (l + 1 < layers) ? std::max(0.0, s) : s;
    }
    cur = std::move(nxt);
  }
  return cur;
}

std::vector<ShadowValue> mlp_fixed(const Mlp& net, const std::vector<double>& x, int frac_bits) {
  std::vector<ShadowValue> cur;
  for (double v : x) cur.push_back(sv_input(fp_encode_raw(v, frac_bits)));
  std::size_t layers = net.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    std::size_t in = net.dims[l], out = net.dims[l + 1];
    std::vector<ShadowValue> nxt;
    for (std::size_t o = 0; o < out; ++o) {
      std::vector<ShadowValue> w;
      for (std::size_t i = 0; i < in; ++i) w.push_back(sv_input(fp_encode_raw(net.weights[l][o * in + i], frac_bits)));
      ShadowValue s = sv_add(sv_dot(w, cur, frac_bits), sv_input(fp_encode_raw(net.biases[l][o], frac_bits)), false);
      if (l + 1 < layers && s.num < 0) {
        // relu is 1-Lipschitz, so the bound carries over; the clamped ideal value is zero
        s.num = 0;
        s.exp = 0;
      }
      nxt.push_back(s);
    }
    cur = std::move(nxt);
  }
  return cur;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace oracle
}  // namespace hmpc
