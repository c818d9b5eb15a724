#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hmpc/ring.hpp"

namespace hmpc {

// Vectorized circuit over masked sharings. Arithmetic wires hold len elements of Z_2^64;
// Boolean wires hold len words whose low `lanes` bits are independent Z_2 lanes.
enum class Op : std::uint8_t {
  input,
  rand_in,
  constant,
  add,
  sub,
  neg,
  cmul,
  addc,
  wsum,
  mul,
  mul3,
  mul4,
  dotp,
  inject,
  open,
  output,
  rss_in,
  bitpub,
  input_b,
  constant_b,
  bxor,
  bxorc,
  bandc,
  band,
  band3,
  band4,
  bshl,
  bshr,
  unpack,
  mbits,
  open_b,
  output_b,
  rss_in_b,
  dsbits,
  gather,
  concat,
};

const char* op_name(Op op);
bool op_interactive(Op op);

struct Wire {
  bool boolean = false;
  std::uint32_t len = 0;
  int lanes = 64;           // Boolean wires only
  bool pub = false;         // statically zero mask
  bool nested = false;      // produced during preprocessing
  int producer = -1;
};

struct Gate {
  Op op;
  bool nested = false;
  int out = -1;
  int out2 = -1;            // second output (dsbits Boolean part)
  int in[4] = {-1, -1, -1, -1};
  int owner = -1;
  std::uint64_t k = 0;      // constant, shift amount or lane count
  int trunc = 0;            // fractional bits removed after a product
  std::uint32_t nf = 0;     // dotp inner length
  bool bcast = false;       // dotp: first operand shared by every output
  std::vector<std::uint32_t> idx;
  std::vector<int> ins;
  std::vector<std::uint64_t> cvals;
};

class Circuit {
 public:
  // arithmetic
  int input(int owner, std::uint32_t len);
  int rand_in(std::uint32_t len);
  int constant(std::vector<std::uint64_t> vals);
  int constant(std::uint64_t v, std::uint32_t len);
  int add(int a, int b);
  int sub(int a, int b);
  int neg(int a);
  int cmul(int a, std::uint64_t c);
  int addc(int a, std::uint64_t c);
  int wsum(int a, std::vector<std::uint64_t> coeffs);
  int mul(int a, int b, int trunc = 0);
  int mul3(int a, int b, int c);
  int mul4(int a, int b, int c, int d);
  int dotp(int x, int y, std::uint32_t nf, int trunc = 0, bool bcast = false);
  // lam_b: nested arithmetic wire carrying the selector mask bit as a ring element
  int inject(int b, int v, int lam_b);
  int open(int a);
  void output(int a);
  int rss_in(int src);
  int bitpub(int b);
  // Boolean
  int input_b(int owner, std::uint32_t len, int lanes = 64);
  int constant_b(std::vector<std::uint64_t> words, int lanes = 64);
  int bxor(int a, int b);
  int bxorc(int a, std::uint64_t c);
  int bnot(int a);
  int bandc(int a, std::uint64_t c);
  int band(int a, int b);
  int band3(int a, int b, int c);
  int band4(int a, int b, int c, int d);
  int bshl(int a, int s);
  int bshr(int a, int s);
  int unpack(int a);
  int relane(int a, int lanes);
  int mbits(int a);
  int open_b(int a);
  void output_b(int a);
  int rss_in_b(int src);
  // shared
  std::pair<int, int> dsbits(std::uint32_t len, int lanes);
  int gather(int a, std::vector<std::uint32_t> idx);
  int concat(std::vector<int> parts);

  // Gates created while nesting is on are evaluated inside the preprocessing phase.
  void set_nested(bool on) { nested_ = on; }
  bool nested() const { return nested_; }

  const std::vector<Wire>& wires() const { return wires_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const Wire& wire(int w) const { return wires_.at(w); }
  const std::vector<int>& outputs() const { return outputs_; }
  std::uint64_t lane_mask(int w) const;

  struct Stats {
    std::size_t gates = 0, mul = 0, mul3 = 0, mul4 = 0, dotp = 0, band = 0, band3 = 0, band4 = 0;
    std::size_t inject = 0, open = 0, dsbits = 0, nested = 0;
    std::size_t mul_elems = 0, and_elems = 0;
  };
  Stats stats() const;

 private:
  int new_wire(bool boolean, std::uint32_t len, int lanes, bool pub);
  Gate& emit(Op op);
  const Wire& need(int w, bool boolean) const;
  int same_len(std::initializer_list<int> ws) const;

  std::vector<Wire> wires_;
  std::vector<Gate> gates_;
  std::vector<int> outputs_;
  bool nested_ = false;
};

class NestedScope {
 public:
  explicit NestedScope(Circuit& c) : c_(c), prev_(c.nested()) { c.set_nested(true); }
  ~NestedScope() { c_.set_nested(prev_); }

 private:
  Circuit& c_;
  bool prev_;
};

}  // namespace hmpc
