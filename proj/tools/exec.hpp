#pragma once

#include <string>
#include <vector>

#include "hmpc/engine.hpp"
#include "hmpc/runner.hpp"

namespace hmpc::cli {

struct NetOptions {
  std::string net = "mem";  // mem | tcp
  int base_port = 47100;
  std::string roster;       // JSON {"parties": [{"host": .., "port": ..}, ...]}, dealer last
  int party = -1;           // run a single party (n = the dealer)
  std::vector<std::string> cheats;
};

// Runs every party in-process (mem), as forked processes over loopback TCP (tcp), or only the selected party.
RunOutcome execute(const Circuit& c, int n, const EngineOptions& o, const PartyInputs& inputs, const NetOptions& net);

std::string party_result_json(const PartyResult& r);
PartyResult party_result_from_json(const std::string& text);

}  // namespace hmpc::cli
