#include "hmpc/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace hmpc {

Report make_report(const std::string& name, int n, const EngineOptions& o, const std::string& net,
                   const RunOutcome& out) {
  Report r;
  r.name = name;
  r.n = n;
  r.mode = o.mode;
  r.net = net;
  r.seed = o.seed;
  r.kappa = o.mode == Mode::malicious ? o.kappa : 0;
  r.wall_s = out.wall_s;
  Meter merged = out.merged_meter();
  for (int ph = 0; ph < kPhases; ++ph) {
    auto& s = r.phases[ph];
    MeterCell t = merged.total(static_cast<Phase>(ph));
    s.bytes = t.bytes, s.bits = t.bits, s.modeled_bits = t.modeled_bits, s.rounds = t.rounds, s.messages = t.messages;
    for (const auto& p : out.parties) {
      s.party_bytes.push_back(p.meter.total(static_cast<Phase>(ph)).bytes);
      double w = ph == 0 ? p.prep_s : ph == 1 ? p.online_s : p.verify_s;
      s.wall_s = std::max(s.wall_s, w);
    }
  }
  for (const auto& [k, c] : merged.cells())
    r.tags.emplace_back(std::string(phase_name(static_cast<Phase>(k.first))) + "/" + k.second, c);
  for (const auto& p : out.parties) r.dealer_bytes += p.meter.dealer_bytes();
  r.ok = out.all_ok();
  if (r.ok) {
    r.verdict = "ok";
  } else {
    for (const auto& p : out.parties)
      if (!p.ok) {
        r.verdict = "abort(" + p.abort_phase + "/" + p.abort_tag + ": " + p.abort_reason;
        if (!p.suspects.empty()) {
          r.verdict += "; suspects";
          for (int s : p.suspects) r.verdict += " " + std::to_string(s);
        }
        r.verdict += ")";
        break;
      }
  }
  return r;
}

std::string report_json(const Report& r, bool timing) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["name"] = r.name;
  j["n"] = r.n;
  j["t"] = (r.n - 1) / 2;
  j["mode"] = mode_name(r.mode);
  j["net"] = r.net;
  j["seed"] = r.seed;
  if (r.mode == Mode::malicious) j["kappa"] = r.kappa;
  for (const auto& [k, v] : r.params) j["params"][k] = v;
  for (int ph = 0; ph < kPhases; ++ph) {
    const auto& s = r.phases[ph];
    ordered_json p;
    p["bytes"] = s.bytes;
    p["bits"] = s.bits;
    p["MB"] = static_cast<double>(s.bytes) / 1e6;
    p["MiB"] = static_cast<double>(s.bytes) / (1024.0 * 1024.0);
    p["modeled_bytes"] = s.modeled_bytes();
    p["modeled_MB"] = static_cast<double>(s.modeled_bytes()) / 1e6;
    p["modeled_MiB"] = static_cast<double>(s.modeled_bytes()) / (1024.0 * 1024.0);
    p["rounds"] = s.rounds;
    p["messages"] = s.messages;
    p["party_bytes"] = s.party_bytes;
    if (timing) p["wall_s"] = s.wall_s;
    j["phases"][phase_name(static_cast<Phase>(ph))] = p;
  }
  for (const auto& [k, c] : r.tags)
    j["tags"][k] = {{"bytes", c.bytes}, {"modeled_bytes", (c.modeled_bits + 7) / 8}, {"rounds", c.rounds}};
  j["dealer_bytes"] = r.dealer_bytes;
  j["verdict"] = r.verdict;
  for (const auto& [k, v] : r.results) j["results"][k] = v;
  if (timing) j["wall_s"] = r.wall_s;
  return j.dump(2);
}

std::string report_table(const Report& r) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%s  n=%d t=%d mode=%s net=%s seed=%llu", r.name.c_str(), r.n, (r.n - 1) / 2,
                mode_name(r.mode), r.net.c_str(), static_cast<unsigned long long>(r.seed));
  os << line;
  if (r.mode == Mode::malicious) os << " kappa=" << r.kappa;
  os << "\n";
  for (const auto& [k, v] : r.params) os << "  " << k << " = " << v << "\n";
  std::snprintf(line, sizeof line, "  %-13s %14s %10s %10s %14s %10s %7s %9s\n", "phase", "bytes", "MB", "MiB",
                "modeled B", "modeled MB", "rounds", "wall s");
  os << line;
  for (int ph = 0; ph < kPhases; ++ph) {
    const auto& s = r.phases[ph];
    std::snprintf(line, sizeof line, "  %-13s %14llu %10.4f %10.4f %14llu %10.4f %7llu %9.3f\n",
                  phase_name(static_cast<Phase>(ph)), static_cast<unsigned long long>(s.bytes), s.bytes / 1e6,
                  s.bytes / (1024.0 * 1024.0), static_cast<unsigned long long>(s.modeled_bytes()),
                  s.modeled_bytes() / 1e6, static_cast<unsigned long long>(s.rounds), s.wall_s);
    os << line;
  }
  if (r.dealer_bytes) os << "  dealer traffic (unmetered): " << r.dealer_bytes << " B\n";
  for (const auto& [k, v] : r.results) os << "  " << k << ": " << v << "\n";
  std::snprintf(line, sizeof line, "  verdict: %s   wall %.3f s\n", r.verdict.c_str(), r.wall_s);
  os << line;
  return os.str();
}

}  // namespace hmpc
