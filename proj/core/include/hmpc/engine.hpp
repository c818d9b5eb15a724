#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hmpc/circuit.hpp"
#include "hmpc/transport.hpp"

namespace hmpc {

enum class Mode { semi, malicious };
enum class TrGen { dsbits, dealer };

const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);

struct EngineOptions {
  Mode mode = Mode::semi;
  std::uint64_t seed = 1;
  int kappa = 40;
  bool fair = false;              // malicious outputs via commitments and an alive-bit broadcast
  TrGen trgen = TrGen::dsbits;
};

// Does the run need the dealer endpoint (id n)?
bool needs_dealer(const Circuit& c, const EngineOptions& o);

struct PartyResult {
  int party = -1;
  bool ok = true;
  std::string abort_phase, abort_tag, abort_reason;
  std::vector<int> suspects;
  bool have_outputs = false;
  std::vector<std::vector<std::uint64_t>> outputs;  // in Circuit::outputs() order
  Meter meter;
  double prep_s = 0, online_s = 0, verify_s = 0;
};

// Runs one party to completion. inputs maps wire ids of this party's input gates to their values.
PartyResult run_party(const Circuit& c, int n, int party, Endpoint& ep, const EngineOptions& o,
                      const std::map<int, std::vector<std::uint64_t>>& inputs, FaultInjector* faults = nullptr);

// Serves product and truncation-pair requests until every party has finished.
void run_dealer(int n, Endpoint& ep, std::uint64_t seed);

}  // namespace hmpc
