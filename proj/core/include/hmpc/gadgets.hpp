#pragma once

#include <cstdint>
#include <vector>

#include "hmpc/circuit.hpp"

namespace hmpc {

// Circuit compositions over the gate set. Boolean results of comparisons are single-lane wires.
int bit2a(Circuit& c, int b);
int bit_inject(Circuit& c, int b, int v);
int a2b(Circuit& c, int x);
int b2a(Circuit& c, int bits);
int maskbits(Circuit& c, int v);
int msb(Circuit& c, int v);
int lt(Circuit& c, int x, int y);
int eq(Circuit& c, int x, int y);
int relu(Circuit& c, int v);
int select(Circuit& c, int b, int x, int y);

struct PoolResult {
  int value = -1;
  int index = -1;   // arithmetic index of the winner
  int onehot = -1;  // single-lane Boolean indicator per input element
};
PoolResult pool(Circuit& c, int v, bool take_max, bool with_index = false, bool with_onehot = false);

// Row-major a x b times b x c.
int matmul(Circuit& c, int A, int B, std::uint32_t a, std::uint32_t b, std::uint32_t cols, int trunc = 0);

struct GadgetCounts {
  std::size_t and2 = 0, and3 = 0, and4 = 0, depth = 0;
};
// AND-gate counts of a single-element instance of the named comparison gadget.
GadgetCounts comparison_counts(bool equality);

}  // namespace hmpc
