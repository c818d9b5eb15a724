#include "hmpc/attacks.hpp"

#include <random>
#include <stdexcept>

#include "hmpc/runner.hpp"

namespace hmpc {

const char* fault_class_name(FaultClass f) {
  switch (f) {
    case FaultClass::zeta_share: return "zeta-share";
    case FaultClass::king_to_one: return "king-to-one";
    case FaultClass::king_to_d: return "king-to-d";
    case FaultClass::robust_copy: return "robust-copy";
  }
  return "?";
}

FaultClass parse_fault_class(const std::string& s) {
  for (auto f : kFaultClasses)
    if (s == fault_class_name(f)) return f;
  throw std::invalid_argument("unknown fault class: " + s);
}

namespace {

constexpr int kWidth = 64;
constexpr int kLevels = 4;

struct Target {
  Circuit c;
  PartyInputs in;
};

// Arithmetic chain of kLevels products plus a Boolean AND in the first level.
Target target(int n, std::uint64_t seed) {
  Target t;
  int x = t.c.input(0, kWidth), y = t.c.input(1, kWidth);
  int z = x;
  for (int d = 0; d < kLevels; ++d) z = t.c.mul(z, y);
  int a = t.c.input_b(0, kWidth), b = t.c.input_b(1, kWidth);
  t.c.output(z);
  t.c.output_b(t.c.band(a, b));
  std::mt19937_64 rng(seed);
  auto draw = [&] {
    std::vector<u64> v(kWidth);
    for (auto& e : v) e = rng();
    return v;
  };
  t.in.resize(n);
  t.in[0][x] = draw();
  t.in[1][y] = draw();
  t.in[0][a] = draw();
  t.in[1][b] = draw();
  return t;
}

FaultRule draw_rule(FaultClass cls, int n, std::mt19937_64& rng, std::uint64_t additive) {
  const int t = (n - 1) / 2, king = t;
  FaultRule r;
  r.action = FaultRule::Action::add;
  r.value = additive;
  while (r.value == 0) r.value = rng();
  switch (cls) {
    case FaultClass::zeta_share:
      r.from = static_cast<int>(rng() % king);
      r.to = king;
      r.phase = static_cast<int>(Phase::online);
      r.tag = "eval";
      r.nth = static_cast<int>(rng() % kLevels);
      r.offset = rng() % kWidth;
      break;
    case FaultClass::king_to_one:
      r.from = king;
      r.to = static_cast<int>(rng() % king);
      r.phase = static_cast<int>(Phase::online);
      r.tag = "eval";
      r.nth = static_cast<int>(rng() % kLevels);
      r.offset = rng() % kWidth;
      break;
    case FaultClass::king_to_d:
      r.from = king;
      r.to = king + 1 + static_cast<int>(rng() % t);
      r.phase = static_cast<int>(Phase::online);
      r.tag = "dbatch";
      r.nth = 0;
      r.offset = rng() % (kLevels * kWidth);
      break;
    case FaultClass::robust_copy:
      r.from = static_cast<int>(rng() % n);
      r.to = static_cast<int>((r.from + 1 + rng() % (n - 1)) % n);
      r.phase = static_cast<int>(Phase::verify);
      r.tag = "vrec";
      r.nth = static_cast<int>(rng() % 2);
      r.action = FaultRule::Action::flip_bit;
      r.offset = rng() % 256;
      break;
  }
  return r;
}

}  // namespace

SoundnessTally soundness_trials(FaultClass cls, int n, int kappa, int trials, std::uint64_t seed,
                                std::uint64_t additive_value) {
  SoundnessTally tally;
  tally.cls = cls;
  std::mt19937_64 rng(seed ^ (0x5eedull << 32) ^ static_cast<std::uint64_t>(cls));
  for (int k = 0; k < trials; ++k) {
    const std::uint64_t run_seed = seed * 1000003 + k;
    Target tg = target(n, run_seed);
    EngineOptions o;
    o.mode = Mode::malicious;
    o.kappa = kappa;
    o.seed = run_seed;
    RunOutcome out;
    FaultRule rule;
    bool fired = false;
    // redraw until the rule matches a message that exists in this run
    for (int attempt = 0; attempt < 16 && !fired; ++attempt) {
      rule = draw_rule(cls, n, rng, additive_value);
      FaultInjector f;
      f.add(rule);
      out = run_mem(tg.c, n, o, tg.in, &f);
      fired = f.fired() > 0;
    }
    ++tally.trials;
    if (!fired) continue;
    ++tally.fired;
    int aborted = 0, honest = 0;
    for (const auto& p : out.parties) {
      if (p.party == rule.from) continue;
      ++honest;
      aborted += p.ok ? 0 : 1;
    }
    if (aborted == honest) ++tally.all_aborted;
    if (aborted == 0) ++tally.none_aborted;
  }
  return tally;
}

namespace {

FaultRule rule(int from, int to, const std::string& tag, FaultRule::Action a, int nth = -1, std::uint64_t offset = 0) {
  FaultRule r;
  r.from = from;
  r.to = to;
  r.tag = tag;
  r.action = a;
  r.nth = nth;
  r.offset = offset;
  return r;
}

}  // namespace

std::vector<FairSchedule> fair_schedules(int n) {
  if (n < 5) throw std::invalid_argument("fairness schedules need at least five parties");
  const int t = (n - 1) / 2, king = t, last = n - 1, d0 = t + 1;
  using A = FaultRule::Action;
  std::vector<FairSchedule> s;
  s.push_back({"no-faults", {}, {}});
  s.push_back({"withhold-opening-from-one", {last}, {rule(last, 0, "open", A::drop)}});
  std::vector<int> ds;
  std::vector<FaultRule> all_open;
  for (int p = d0; p < d0 + t; ++p) ds.push_back(p), all_open.push_back(rule(p, -1, "open", A::drop));
  s.push_back({"t-parties-withhold-openings", ds, all_open});
  s.push_back({"garbled-opening", {1}, {rule(1, -1, "open", A::flip_bit, -1, 3)}});
  s.push_back({"silent-alive", {last}, {rule(last, -1, "alive", A::drop)}});
  {
    FairSchedule f{"alive-to-one-honest", {last}, {}};
    for (int p = 1; p < last; ++p) f.rules.push_back(rule(last, p, "alive", A::drop, 0));
    f.rules.push_back(rule(last, -1, "alive", A::drop, 1));
    for (int p = 0; p < last; ++p) f.rules.push_back(rule(last, p, "alive", A::drop, 2));
    s.push_back(f);
  }
  {
    // the corrupt pair relays a chain to one honest party only in the final round
    FairSchedule f{"late-relay", {d0, last}, {}};
    for (int p = 0; p < n; ++p)
      if (p != d0) f.rules.push_back(rule(last, p, "alive", A::drop));
    for (int p = 0; p < n; ++p)
      if (p != last) {
        if (p != 0) f.rules.push_back(rule(d0, p, "alive", A::drop));
        else
          for (int k = 0; k < t; ++k) f.rules.push_back(rule(d0, p, "alive", A::drop, k));
      }
    s.push_back(f);
  }
  s.push_back({"forged-alive-signature", {1}, {rule(1, -1, "alive", A::flip_bit, -1, 60)}});
  s.push_back({"king-drops-d-batch", {king}, {rule(king, d0, "dbatch", A::drop)}});
  s.push_back({"corrupt-verification-copy", {0}, {rule(0, -1, "vrec", A::flip_bit, 0, 5)}});
  s.push_back({"withhold-commitment", {last}, {rule(last, 0, "commit", A::drop)}});
  s.push_back({"alive-then-garble", {1, last},
               {rule(1, 0, "alive", A::drop, 0), rule(1, -1, "open", A::flip_bit, -1, 70),
                rule(last, -1, "open", A::drop)}});
  return s;
}

FairOutcome run_fair_schedule(const FairSchedule& s, int n, std::uint64_t seed) {
  Target tg = target(n, seed);
  EngineOptions o;
  o.mode = Mode::malicious;
  o.fair = true;
  o.seed = seed;
  FaultInjector f;
  for (const auto& r : s.rules) f.add(r);
  RunOutcome out = run_mem(tg.c, n, o, tg.in, &f);
  FairOutcome res;
  res.name = s.name;
  const std::vector<std::vector<u64>>* first = nullptr;
  for (const auto& p : out.parties) {
    bool corrupt = false;
    for (int c : s.corrupt) corrupt = corrupt || c == p.party;
    if (corrupt) continue;
    if (p.ok && p.have_outputs) {
      ++res.honest_with_output;
      if (!first) first = &p.outputs;
      else if (*first != p.outputs) res.split = true;
    } else {
      ++res.honest_without_output;
    }
  }
  if (res.honest_with_output && res.honest_without_output) res.split = true;
  return res;
}

}  // namespace hmpc
