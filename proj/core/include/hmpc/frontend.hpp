#pragma once

#include <cstdint>
#include <vector>

#include "hmpc/circuit.hpp"
#include "hmpc/oracle.hpp"
#include "hmpc/runner.hpp"

namespace hmpc {

struct CompiledPlain {
  Circuit circuit;
  std::vector<int> wire_of;  // plain wire -> circuit wire
};

// One length-1 circuit wire per plain wire.
CompiledPlain compile_plain(const PlainCircuit& pc);
PartyInputs plain_inputs(const CompiledPlain& cp, const PlainCircuit& pc, int n, const std::vector<u64>& values);

}  // namespace hmpc
