#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmpc/engine.hpp"

namespace hmpc {

// Engine versus oracle comparisons over in-memory runs.
struct CheckResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t mismatches = 0;
  std::size_t aborts = 0;
  std::string first_failure;
  double wall_s = 0;
  bool ok() const { return cases > 0 && mismatches == 0 && aborts == 0; }
};

// `count` random mixed circuits, one run each.
CheckResult check_random_circuits(int n, Mode mode, int count, std::uint64_t seed, int gates = 30);

// bit2a, a2b, b2a, bit_inject, compare, equals, relu, select, max/min pooling and matmul on `count` inputs each.
std::vector<CheckResult> check_gadgets(int n, Mode mode, std::size_t count, std::uint64_t seed);

// compare and equals on every pair of an 8-bit ring embedded in the top byte of Z_2^64.
// Pairs are evaluated in runs of `batch`.
std::vector<CheckResult> check_mini_ring(int n, Mode mode, int width = 8, std::size_t batch = 4096);

}  // namespace hmpc
