#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hmpc/engine.hpp"

namespace hmpc {

using PartyInputs = std::vector<std::map<int, std::vector<std::uint64_t>>>;

struct RunOutcome {
  std::vector<PartyResult> parties;
  double wall_s = 0;
  bool all_ok() const;
  bool any_ok() const;
  // Outputs of the lowest-numbered party that finished; throws if none did.
  const std::vector<std::vector<std::uint64_t>>& outputs() const;
  Meter merged_meter() const;
};

// All parties (and the dealer, when needed) as threads over an in-memory network.
RunOutcome run_mem(const Circuit& c, int n, const EngineOptions& o, const PartyInputs& inputs,
                   FaultInjector* faults = nullptr);

// Same, over loopback TCP sockets starting at base_port.
RunOutcome run_tcp_local(const Circuit& c, int n, const EngineOptions& o, const PartyInputs& inputs, int base_port,
                         FaultInjector* faults = nullptr);

}  // namespace hmpc
