#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmpc/ring.hpp"

namespace hmpc {

// Scalar circuit description shared by the oracle and the engine front end.
enum class PlainKind : std::uint8_t { add, sub, cmul, mul, mul3, mul4, dotp, trunc_mul };

struct PlainGate {
  PlainKind kind = PlainKind::add;
  int out = -1;
  std::vector<int> in;  // dotp: x_1..x_nf followed by y_1..y_nf
  std::uint64_t c = 0;  // cmul scalar
};

struct PlainInput {
  int wire = -1;
  int owner = 0;
};

struct PlainCircuit {
  int n_wires = 0;
  int frac_bits = kFrac;
  std::vector<PlainInput> inputs;
  std::vector<PlainGate> gates;
  std::vector<int> outputs;
};

const char* plain_kind_name(PlainKind k);
PlainKind plain_kind_from(const std::string& s);
std::string plain_to_json(const PlainCircuit& c);
PlainCircuit plain_from_json(const std::string& text);
void validate(const PlainCircuit& c);

// Random mixed circuit; every wire after the inputs is produced exactly once.
PlainCircuit random_plain_circuit(std::uint64_t seed, int n_parties, int n_inputs, int n_gates, int n_outputs);

namespace oracle {

// Exact ideal value (num / 2^exp, in raw fixed-point units) next to the ring value,
// with an error bound in raw units and the number of truncations on the lineage.
struct ShadowValue {
  u64 ring = 0;
  i128 num = 0;
  int exp = 0;
  bool tracked = true;   // false once the ideal value overflowed
  long double err = 0;
  int k = 0;

  long double ideal() const;
  bool admits(u64 engine_ring) const;
};

std::vector<ShadowValue> eval_circuit_plain(const PlainCircuit& c, const std::vector<u64>& inputs);

// Gadget-level references over Z_2^64.
inline u64 bit2a(int b) { return static_cast<u64>(b & 1); }
inline u64 a2b(u64 x) { return x; }
inline u64 b2a(u64 bits) { return bits; }
inline u64 inject(int b, u64 v) { return b ? v : 0; }
inline int msb(u64 v) { return static_cast<int>(v >> 63); }
inline int lt(u64 x, u64 y) { return msb(x - y); }
inline int eq(u64 x, u64 y) { return x == y ? 1 : 0; }
inline u64 relu(u64 v) { return msb(v) ? 0 : v; }
inline int lt_signed(i64 x, i64 y) { return x < y ? 1 : 0; }
// Comparison and equality over Z_{2^width}.
inline int lt_ring(u64 x, u64 y, int width) { return static_cast<int>(((x - y) >> (width - 1)) & 1); }
inline int eq_ring(u64 x, u64 y, int width) {
  u64 mask = width >= 64 ? ~u64(0) : ((u64(1) << width) - 1);
  return ((x ^ y) & mask) == 0 ? 1 : 0;
}

struct PoolValue {
  u64 value = 0;
  std::size_t index = 0;
};
// Signed comparison; on ties the lower index wins.
PoolValue maxpool(const std::vector<u64>& v);
PoolValue minpool(const std::vector<u64>& v);

// Exact (untruncated) products of row-major matrices as ideal values with one truncation by d.
std::vector<ShadowValue> matmul(const std::vector<u64>& A, const std::vector<u64>& B, std::size_t a, std::size_t b,
                                std::size_t c, int trunc);

// Applications.
u64 euclid_sq(const std::vector<u64>& x, const std::vector<u64>& y);
struct BioResult {
  std::vector<u64> distances;
  PoolValue best;
};
BioResult biometric(const std::vector<std::vector<u64>>& db, const std::vector<u64>& query);

int edit_distance(const std::string& a, const std::string& b);
struct SsqResult {
  std::vector<u64> distances;
  PoolValue best;
};
// Block-wise distances of the query against each database sequence; a block contributes only when the
// query block occurs among the database blocks at that position.
SsqResult ssq(const std::vector<std::string>& db, const std::string& query, int block_len);

struct Mlp {
  std::vector<std::size_t> dims;             // layer widths, input first
  std::vector<std::vector<double>> weights;  // row-major out x in
  std::vector<std::vector<double>> biases;
};
std::vector<double> mlp_float(const Mlp& net, const std::vector<double>& x);
// Ideal logits for the fixed-point encodings of the model and input, with truncation error bounds.
std::vector<ShadowValue> mlp_fixed(const Mlp& net, const std::vector<double>& x, int frac_bits);
std::size_t argmax(const std::vector<double>& v);

}  // namespace oracle
}  // namespace hmpc
