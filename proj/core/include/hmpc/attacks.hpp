#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmpc/transport.hpp"

namespace hmpc {

// Fault classes against the malicious protocol; the sender of every faulty message is the corrupt party.
enum class FaultClass { zeta_share, king_to_one, king_to_d, robust_copy };
const char* fault_class_name(FaultClass f);
FaultClass parse_fault_class(const std::string& s);
constexpr FaultClass kFaultClasses[] = {FaultClass::zeta_share, FaultClass::king_to_one, FaultClass::king_to_d,
                                        FaultClass::robust_copy};

struct SoundnessTally {
  FaultClass cls = FaultClass::zeta_share;
  int trials = 0;
  int fired = 0;         // trials in which the fault was actually injected
  int all_aborted = 0;   // every honest party aborted
  int none_aborted = 0;  // no honest party aborted
};

// Runs `trials` seeded fault injections of one class (n = 5 by default). additive_value = 0 draws a random
// nonzero value per trial; otherwise that value is added to one element of the chosen message.
SoundnessTally soundness_trials(FaultClass cls, int n, int kappa, int trials, std::uint64_t seed,
                                std::uint64_t additive_value = 0);

// Scripted adversarial schedules against fair output reconstruction.
struct FairSchedule {
  std::string name;
  std::vector<int> corrupt;
  std::vector<FaultRule> rules;
};
std::vector<FairSchedule> fair_schedules(int n);

struct FairOutcome {
  std::string name;
  int honest_with_output = 0;
  int honest_without_output = 0;
  bool split = false;  // honest parties disagree on whether, or what, they learned
};
FairOutcome run_fair_schedule(const FairSchedule& s, int n, std::uint64_t seed);

}  // namespace hmpc
