#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmpc/circuit.hpp"
#include "hmpc/oracle.hpp"
#include "hmpc/runner.hpp"

namespace hmpc {

struct Feed {
  int wire = -1;
  int owner = 0;
  std::vector<u64> values;
};

// A circuit together with the private inputs of each owner.
struct Program {
  Circuit circuit;
  std::vector<Feed> feeds;
  PartyInputs inputs(int n) const;
};

// Synthetic circuits: width = gates / depth parallel products per level, chained through the levels.
enum class BenchKind { mult, mult3, mult4, dotp, dsbits };
const char* bench_name(BenchKind k);
BenchKind parse_bench(const std::string& s);

struct BenchShape {
  BenchKind kind = BenchKind::mult;
  std::size_t gates = 1000;
  int depth = 1;
  std::uint32_t nf = 1;  // dotp inner length
  int trunc = 0;         // fractional bits removed by each mult or dotp
};
Circuit bench_circuit(const BenchShape& s);

// Biometric matching: squared Euclidean distance of the query to every sample, then the minimum.
struct BioInstance {
  std::vector<std::vector<u64>> db;
  std::vector<u64> query;
  int frac_bits = 0;  // 0: integer features
};
BioInstance random_bio(std::size_t m, std::size_t nf, std::uint64_t seed, int frac_bits = 0);
struct BioProgram {
  Program prog;
  std::size_t m = 0, nf = 0;
  // output order: distances, minimum, argmin index, one-hot argmin (Boolean)
};
BioProgram build_bio(const BioInstance& inst);

// Similar sequence query over lookup tables prepared by the database owner.
struct SsqInstance {
  std::vector<std::string> db;
  std::string query;
  int block_len = 8;
};
// Sequences drawn from a few variants per block of a common reference, as aligned data tends to look.
SsqInstance random_ssq(std::size_t m, std::size_t blocks, int block_len, int variants, std::uint64_t seed);

struct SsqLuts {
  std::size_t blocks = 0;
  std::vector<std::vector<u64>> keys;  // per block: ids of the distinct database blocks at that position
  std::vector<std::vector<u64>> lut;   // per sequence: flattened (block, key) edit distances
  std::vector<u64> query_ids;
  std::size_t columns() const;
};
u64 block_id(const std::string& block);
int wagner_fischer(const std::string& a, const std::string& b);
SsqLuts build_luts(const SsqInstance& inst);

struct SsqProgram {
  Program prog;
  std::size_t m = 0, columns = 0;
  // output order: distances, minimum, argmin index
};
SsqProgram build_ssq(const SsqLuts& luts);

// Fully connected network with relu between layers, evaluated on a batch of inputs.
oracle::Mlp random_mlp(const std::vector<std::size_t>& dims, std::uint64_t seed);
std::vector<std::vector<double>> random_mlp_inputs(std::size_t count, std::size_t width, std::uint64_t seed);
struct Nn1Program {
  Program prog;
  std::size_t batch = 0, classes = 0;
  // output order: logits, batch x classes row-major
};
Nn1Program build_nn1(const oracle::Mlp& net, const std::vector<std::vector<double>>& batch, int frac_bits = kFrac);

// Engine outputs against the plaintext references.
struct AppCheck {
  std::size_t compared = 0;
  std::size_t mismatched = 0;
  std::size_t agree = 0;  // nn1: argmax agreement with the floating-point network
  u64 best_value = 0;
  std::size_t best_index = 0;
  bool ok() const { return compared > 0 && mismatched == 0; }
};
using Outputs = std::vector<std::vector<u64>>;
AppCheck check_bio(const BioInstance& inst, const Outputs& out);
// Distances computed in the clear from the tables alone.
oracle::SsqResult ssq_from_luts(const SsqLuts& luts);
AppCheck check_ssq(const SsqLuts& luts, const Outputs& out);
AppCheck check_nn1(const oracle::Mlp& net, const std::vector<std::vector<double>>& batch, const Outputs& out,
                   int frac_bits = kFrac);

}  // namespace hmpc
