#include "hmpc/circuit.hpp"

#include <stdexcept>

namespace hmpc {

const char* op_name(Op op) {
  switch (op) {
    case Op::input: return "input";
    case Op::rand_in: return "rand_in";
    case Op::constant: return "constant";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::neg: return "neg";
    case Op::cmul: return "cmul";
    case Op::addc: return "addc";
    case Op::wsum: return "wsum";
    case Op::mul: return "mul";
    case Op::mul3: return "mul3";
    case Op::mul4: return "mul4";
    case Op::dotp: return "dotp";
    case Op::inject: return "inject";
    case Op::open: return "open";
    case Op::output: return "output";
    case Op::rss_in: return "rss_in";
    case Op::bitpub: return "bitpub";
    case Op::input_b: return "input_b";
    case Op::constant_b: return "constant_b";
    case Op::bxor: return "bxor";
    case Op::bxorc: return "bxorc";
    case Op::bandc: return "bandc";
    case Op::band: return "band";
    case Op::band3: return "band3";
    case Op::band4: return "band4";
    case Op::bshl: return "bshl";
    case Op::bshr: return "bshr";
    case Op::unpack: return "unpack";
    case Op::mbits: return "mbits";
    case Op::open_b: return "open_b";
    case Op::output_b: return "output_b";
    case Op::rss_in_b: return "rss_in_b";
    case Op::dsbits: return "dsbits";
    case Op::gather: return "gather";
    case Op::concat: return "concat";
  }
  return "?";
}

bool op_interactive(Op op) {
  switch (op) {
    case Op::mul:
    case Op::mul3:
    case Op::mul4:
    case Op::dotp:
    case Op::inject:
    case Op::open:
    case Op::band:
    case Op::band3:
    case Op::band4:
    case Op::open_b:
      return true;
    default:
      return false;
  }
}

std::uint64_t Circuit::lane_mask(int w) const {
  int l = wire(w).lanes;
  return l >= 64 ? ~std::uint64_t(0) : ((std::uint64_t(1) << l) - 1);
}

int Circuit::new_wire(bool boolean, std::uint32_t len, int lanes, bool pub) {
  if (len == 0) throw std::invalid_argument("wire length must be positive");
  if (lanes < 1 || lanes > 64) throw std::invalid_argument("lane count out of range");
  Wire w;
  w.boolean = boolean;
  w.len = len;
  w.lanes = boolean ? lanes : 64;
  w.pub = pub;
  w.nested = nested_;
  w.producer = static_cast<int>(gates_.size());
  wires_.push_back(w);
  return static_cast<int>(wires_.size()) - 1;
}

Gate& Circuit::emit(Op op) {
  Gate g;
  g.op = op;
  g.nested = nested_;
  gates_.push_back(std::move(g));
  return gates_.back();
}

const Wire& Circuit::need(int w, bool boolean) const {
  if (w < 0 || w >= static_cast<int>(wires_.size())) throw std::out_of_range("unknown wire");
  const Wire& x = wires_[w];
  if (x.boolean != boolean)
    throw std::invalid_argument(std::string("expected ") + (boolean ? "Boolean" : "arithmetic") + " wire");
  if (nested_ && !x.nested) throw std::invalid_argument("nested gates may only read nested wires");
  return x;
}

int Circuit::same_len(std::initializer_list<int> ws) const {
  std::uint32_t len = wires_.at(*ws.begin()).len;
  for (int w : ws)
    if (wires_.at(w).len != len) throw std::invalid_argument("operand length mismatch");
  return static_cast<int>(len);
}

int Circuit::input(int owner, std::uint32_t len) {
  int o = new_wire(false, len, 64, false);
  Gate& g = emit(Op::input);
  g.out = o;
  g.owner = owner;
  return o;
}

int Circuit::rand_in(std::uint32_t len) {
  int o = new_wire(false, len, 64, false);
  emit(Op::rand_in).out = o;
  return o;
}

int Circuit::constant(std::vector<std::uint64_t> vals) {
  int o = new_wire(false, static_cast<std::uint32_t>(vals.size()), 64, true);
  Gate& g = emit(Op::constant);
  g.out = o;
  g.cvals = std::move(vals);
  return o;
}

int Circuit::constant(std::uint64_t v, std::uint32_t len) { return constant(std::vector<std::uint64_t>(len, v)); }

namespace {

bool both_pub(const Wire& a, const Wire& b) { return a.pub && b.pub; }

}  // namespace

int Circuit::add(int a, int b) {
  need(a, false), need(b, false);
  int len = same_len({a, b});
  int o = new_wire(false, len, 64, both_pub(wires_[a], wires_[b]));
  Gate& g = emit(Op::add);
  g.out = o, g.in[0] = a, g.in[1] = b;
  return o;
}

int Circuit::sub(int a, int b) {
  need(a, false), need(b, false);
  int len = same_len({a, b});
  int o = new_wire(false, len, 64, both_pub(wires_[a], wires_[b]));
  Gate& g = emit(Op::sub);
  g.out = o, g.in[0] = a, g.in[1] = b;
  return o;
}

int Circuit::neg(int a) {
  const Wire& x = need(a, false);
  int o = new_wire(false, x.len, 64, x.pub);
  Gate& g = emit(Op::neg);
  g.out = o, g.in[0] = a;
  return o;
}

int Circuit::cmul(int a, std::uint64_t c) {
  const Wire& x = need(a, false);
  int o = new_wire(false, x.len, 64, x.pub);
  Gate& g = emit(Op::cmul);
  g.out = o, g.in[0] = a, g.k = c;
  return o;
}

int Circuit::addc(int a, std::uint64_t c) {
  const Wire& x = need(a, false);
  int o = new_wire(false, x.len, 64, x.pub);
  Gate& g = emit(Op::addc);
  g.out = o, g.in[0] = a, g.k = c;
  return o;
}

int Circuit::wsum(int a, std::vector<std::uint64_t> coeffs) {
  const Wire& x = need(a, false);
  if (coeffs.empty() || x.len % coeffs.size() != 0) throw std::invalid_argument("wsum: group size does not divide length");
  int o = new_wire(false, static_cast<std::uint32_t>(x.len / coeffs.size()), 64, x.pub);
  Gate& g = emit(Op::wsum);
  g.out = o, g.in[0] = a;
  g.cvals = std::move(coeffs);
  return o;
}

int Circuit::mul(int a, int b, int trunc) {
  need(a, false), need(b, false);
  int len = same_len({a, b});
  if (trunc < 0 || trunc >= 63) throw std::invalid_argument("truncation amount out of range");
  int o = new_wire(false, len, 64, false);
  Gate& g = emit(Op::mul);
  g.out = o, g.in[0] = a, g.in[1] = b, g.trunc = trunc;
  return o;
}

int Circuit::mul3(int a, int b, int c) {
  need(a, false), need(b, false), need(c, false);
  int len = same_len({a, b, c});
  int o = new_wire(false, len, 64, false);
  Gate& g = emit(Op::mul3);
  g.out = o, g.in[0] = a, g.in[1] = b, g.in[2] = c;
  return o;
}

int Circuit::mul4(int a, int b, int c, int d) {
  need(a, false), need(b, false), need(c, false), need(d, false);
  int len = same_len({a, b, c, d});
  int o = new_wire(false, len, 64, false);
  Gate& g = emit(Op::mul4);
  g.out = o, g.in[0] = a, g.in[1] = b, g.in[2] = c, g.in[3] = d;
  return o;
}

int Circuit::dotp(int x, int y, std::uint32_t nf, int trunc, bool bcast) {
  const Wire& wx = need(x, false);
  const Wire& wy = need(y, false);
  if (nf == 0 || wy.len % nf != 0) throw std::invalid_argument("dotp: inner length does not divide operand");
  if (bcast ? wx.len != nf : wx.len != wy.len) throw std::invalid_argument("dotp: operand length mismatch");
  if (trunc < 0 || trunc >= 63) throw std::invalid_argument("truncation amount out of range");
  int o = new_wire(false, wy.len / nf, 64, false);
  Gate& g = emit(Op::dotp);
  g.out = o, g.in[0] = x, g.in[1] = y, g.nf = nf, g.trunc = trunc, g.bcast = bcast;
  return o;
}

int Circuit::inject(int b, int v, int lam_b) {
  const Wire& wb = need(b, true);
  need(v, false);
  if (wb.lanes != 1 || wb.pub) throw std::invalid_argument("inject: selector must be a secret single-lane Boolean wire");
  const Wire& wl = wires_.at(lam_b);
  if (wl.boolean || !wl.nested) throw std::invalid_argument("inject: mask bit must come from a nested arithmetic wire");
  int len = same_len({b, v, lam_b});
  int o = new_wire(false, len, 64, false);
  Gate& g = emit(Op::inject);
  g.out = o, g.in[0] = b, g.in[1] = v, g.in[2] = lam_b;
  return o;
}

int Circuit::open(int a) {
  const Wire& x = need(a, false);
  int o = new_wire(false, x.len, 64, true);
  Gate& g = emit(Op::open);
  g.out = o, g.in[0] = a;
  return o;
}

void Circuit::output(int a) {
  need(a, false);
  Gate& g = emit(Op::output);
  g.in[0] = a;
  outputs_.push_back(a);
}

int Circuit::rss_in(int src) {
  const Wire& x = wires_.at(src);
  if (x.boolean || x.pub) throw std::invalid_argument("rss_in: needs a secret arithmetic wire");
  int o = new_wire(false, x.len, 64, false);
  Gate& g = emit(Op::rss_in);
  g.out = o, g.in[0] = src;
  return o;
}

int Circuit::bitpub(int b) {
  const Wire& x = need(b, true);
  if (!x.pub || x.lanes != 1) throw std::invalid_argument("bitpub: needs a public single-lane Boolean wire");
  int o = new_wire(false, x.len, 64, true);
  Gate& g = emit(Op::bitpub);
  g.out = o, g.in[0] = b;
  return o;
}

int Circuit::input_b(int owner, std::uint32_t len, int lanes) {
  int o = new_wire(true, len, lanes, false);
  Gate& g = emit(Op::input_b);
  g.out = o, g.owner = owner, g.k = static_cast<std::uint64_t>(lanes);
  return o;
}

int Circuit::constant_b(std::vector<std::uint64_t> words, int lanes) {
  int o = new_wire(true, static_cast<std::uint32_t>(words.size()), lanes, true);
  std::uint64_t mask = lane_mask(o);
  for (auto& w : words) w &= mask;
  Gate& g = emit(Op::constant_b);
  g.out = o;
  g.cvals = std::move(words);
  return o;
}

int Circuit::bxor(int a, int b) {
  need(a, true), need(b, true);
  int len = same_len({a, b});
  if (wires_[a].lanes != wires_[b].lanes) throw std::invalid_argument("lane count mismatch");
  int o = new_wire(true, len, wires_[a].lanes, both_pub(wires_[a], wires_[b]));
  Gate& g = emit(Op::bxor);
  g.out = o, g.in[0] = a, g.in[1] = b;
  return o;
}

int Circuit::bxorc(int a, std::uint64_t c) {
  const Wire& x = need(a, true);
  int o = new_wire(true, x.len, x.lanes, x.pub);
  Gate& g = emit(Op::bxorc);
  g.out = o, g.in[0] = a, g.k = c & lane_mask(a);
  return o;
}

int Circuit::bnot(int a) { return bxorc(a, ~std::uint64_t(0)); }

int Circuit::bandc(int a, std::uint64_t c) {
  const Wire& x = need(a, true);
  int o = new_wire(true, x.len, x.lanes, x.pub);
  Gate& g = emit(Op::bandc);
  g.out = o, g.in[0] = a, g.k = c & lane_mask(a);
  return o;
}

int Circuit::band(int a, int b) {
  need(a, true), need(b, true);
  int len = same_len({a, b});
  if (wires_[a].lanes != wires_[b].lanes) throw std::invalid_argument("lane count mismatch");
  int o = new_wire(true, len, wires_[a].lanes, false);
  Gate& g = emit(Op::band);
  g.out = o, g.in[0] = a, g.in[1] = b;
  return o;
}

int Circuit::band3(int a, int b, int c) {
  need(a, true), need(b, true), need(c, true);
  int len = same_len({a, b, c});
  int o = new_wire(true, len, wires_[a].lanes, false);
  Gate& g = emit(Op::band3);
  g.out = o, g.in[0] = a, g.in[1] = b, g.in[2] = c;
  return o;
}

int Circuit::band4(int a, int b, int c, int d) {
  need(a, true), need(b, true), need(c, true), need(d, true);
  int len = same_len({a, b, c, d});
  int o = new_wire(true, len, wires_[a].lanes, false);
  Gate& g = emit(Op::band4);
  g.out = o, g.in[0] = a, g.in[1] = b, g.in[2] = c, g.in[3] = d;
  return o;
}

int Circuit::bshl(int a, int s) {
  const Wire& x = need(a, true);
  if (s < 0 || s >= 64) throw std::invalid_argument("shift out of range");
  int o = new_wire(true, x.len, x.lanes, x.pub);
  Gate& g = emit(Op::bshl);
  g.out = o, g.in[0] = a, g.k = static_cast<std::uint64_t>(s);
  return o;
}

int Circuit::bshr(int a, int s) {
  const Wire& x = need(a, true);
  if (s < 0 || s >= 64) throw std::invalid_argument("shift out of range");
  int o = new_wire(true, x.len, x.lanes, x.pub);
  Gate& g = emit(Op::bshr);
  g.out = o, g.in[0] = a, g.k = static_cast<std::uint64_t>(s);
  return o;
}

int Circuit::unpack(int a) {
  const Wire& x = need(a, true);
  int o = new_wire(true, x.len * static_cast<std::uint32_t>(x.lanes), 1, x.pub);
  Gate& g = emit(Op::unpack);
  g.out = o, g.in[0] = a;
  return o;
}

int Circuit::relane(int a, int lanes) {
  const Wire& x = need(a, true);
  int o = new_wire(true, x.len, lanes, x.pub);
  Gate& g = emit(Op::bandc);
  g.out = o, g.in[0] = a, g.k = lane_mask(o);
  return o;
}

int Circuit::mbits(int a) {
  const Wire& x = need(a, false);
  int o = new_wire(true, x.len, 64, true);
  Gate& g = emit(Op::mbits);
  g.out = o, g.in[0] = a;
  return o;
}

int Circuit::open_b(int a) {
  const Wire& x = need(a, true);
  int o = new_wire(true, x.len, x.lanes, true);
  Gate& g = emit(Op::open_b);
  g.out = o, g.in[0] = a;
  return o;
}

void Circuit::output_b(int a) {
  need(a, true);
  Gate& g = emit(Op::output_b);
  g.in[0] = a;
  outputs_.push_back(a);
}

int Circuit::rss_in_b(int src) {
  const Wire& x = wires_.at(src);
  if (!x.boolean || x.pub) throw std::invalid_argument("rss_in_b: needs a secret Boolean wire");
  int o = new_wire(true, x.len, x.lanes, false);
  Gate& g = emit(Op::rss_in_b);
  g.out = o, g.in[0] = src;
  return o;
}

std::pair<int, int> Circuit::dsbits(std::uint32_t len, int lanes) {
  int a = new_wire(false, len, 64, false);
  int b = new_wire(true, len, lanes, false);
  Gate& g = emit(Op::dsbits);
  g.out = a, g.out2 = b, g.k = static_cast<std::uint64_t>(lanes);
  wires_[b].producer = wires_[a].producer;
  return {a, b};
}

int Circuit::gather(int a, std::vector<std::uint32_t> idx) {
  const Wire& x = wires_.at(a);
  for (auto i : idx)
    if (i >= x.len) throw std::out_of_range("gather index out of range");
  int o = new_wire(x.boolean, static_cast<std::uint32_t>(idx.size()), x.lanes, x.pub);
  Gate& g = emit(Op::gather);
  g.out = o, g.in[0] = a;
  g.idx = std::move(idx);
  return o;
}

int Circuit::concat(std::vector<int> parts) {
  if (parts.empty()) throw std::invalid_argument("concat of nothing");
  const Wire& f = wires_.at(parts[0]);
  std::uint32_t len = 0;
  bool pub = true;
  for (int p : parts) {
    const Wire& x = wires_.at(p);
    if (x.boolean != f.boolean || x.lanes != f.lanes) throw std::invalid_argument("concat: mixed wire kinds");
    len += x.len;
    pub = pub && x.pub;
  }
  int o = new_wire(f.boolean, len, f.lanes, pub);
  Gate& g = emit(Op::concat);
  g.out = o;
  g.ins = std::move(parts);
  return o;
}

Circuit::Stats Circuit::stats() const {
  Stats s;
  s.gates = gates_.size();
  for (const auto& g : gates_) {
    if (g.nested) ++s.nested;
    std::size_t len = g.out >= 0 ? wires_[g.out].len : 0;
    switch (g.op) {
      case Op::mul: ++s.mul, s.mul_elems += len; break;
      case Op::mul3: ++s.mul3, s.mul_elems += len; break;
      case Op::mul4: ++s.mul4, s.mul_elems += len; break;
      case Op::dotp: ++s.dotp, s.mul_elems += len; break;
      case Op::band: ++s.band, s.and_elems += len; break;
      case Op::band3: ++s.band3, s.and_elems += len; break;
      case Op::band4: ++s.band4, s.and_elems += len; break;
      case Op::inject: ++s.inject; break;
      case Op::open:
      case Op::open_b: ++s.open; break;
      case Op::dsbits: ++s.dsbits; break;
      default: break;
    }
  }
  return s;
}

}  // namespace hmpc
