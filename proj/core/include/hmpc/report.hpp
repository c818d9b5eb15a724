#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hmpc/engine.hpp"
#include "hmpc/runner.hpp"

namespace hmpc {

struct PhaseSummary {
  std::uint64_t bytes = 0;  // measured payload bytes, all parties
  std::uint64_t bits = 0;
  std::uint64_t modeled_bits = 0;
  std::uint64_t rounds = 0;
  std::uint64_t messages = 0;
  double wall_s = 0;  // slowest party
  std::vector<std::uint64_t> party_bytes;
  std::uint64_t modeled_bytes() const { return (modeled_bits + 7) / 8; }
};

struct Report {
  std::string name;
  int n = 0;
  Mode mode = Mode::semi;
  std::string net = "mem";
  std::uint64_t seed = 0;
  int kappa = 0;
  std::vector<std::pair<std::string, std::string>> params;
  PhaseSummary phases[kPhases];
  std::vector<std::pair<std::string, MeterCell>> tags;  // "phase/tag" -> merged cell
  std::uint64_t dealer_bytes = 0;
  bool ok = true;
  std::string verdict;
  std::vector<std::pair<std::string, std::string>> results;
  double wall_s = 0;

  const PhaseSummary& phase(Phase p) const { return phases[static_cast<int>(p)]; }
};

Report make_report(const std::string& name, int n, const EngineOptions& o, const std::string& net,
                   const RunOutcome& out);
// JSON with MB = 10^6 bytes next to the binary MiB view; timing fields are omitted when not wanted.
std::string report_json(const Report& r, bool timing = true);
std::string report_table(const Report& r);

}  // namespace hmpc
