#include "exec.hpp"

#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "json.hpp"

namespace hmpc::cli {

namespace {

using nlohmann::json;

void add_faults(FaultInjector& f, const NetOptions& net) {
  for (const auto& c : net.cheats) f.add(parse_fault_rule(c));
}

std::vector<RosterEntry> roster_for(int n, const NetOptions& net) {
  auto r = net.roster.empty() ? local_roster(n + 1, net.base_port) : load_roster(net.roster);
  if (static_cast<int>(r.size()) != n + 1)
    throw std::invalid_argument("roster must list n parties followed by the dealer");
  return r;
}

PartyResult failed(int party, const std::string& why) {
  PartyResult r;
  r.party = party;
  r.ok = false;
  r.abort_phase = "transport";
  r.abort_reason = why;
  return r;
}

// Runs endpoint `id` of a TCP roster: a party, or the dealer when id == n.
PartyResult run_endpoint(const Circuit& c, int n, int id, const EngineOptions& o, const PartyInputs& inputs,
                         const std::vector<RosterEntry>& roster, FaultInjector* faults) {
  TcpEndpoint ep(id, roster);
  if (id == n) {
    if (needs_dealer(c, o)) run_dealer(n, ep, o.seed);
    PartyResult r;
    r.party = n;
    return r;
  }
  return run_party(c, n, id, ep, o, inputs[id], faults);
}

void write_all(int fd, const std::string& s) {
  std::size_t off = 0;
  while (off < s.size()) {
    ssize_t k = ::write(fd, s.data() + off, s.size() - off);
    if (k < 0) {
      if (errno == EINTR) continue;
      return;
    }
    off += static_cast<std::size_t>(k);
  }
}

RunOutcome run_forked(const Circuit& c, int n, const EngineOptions& o, const PartyInputs& inputs,
                      const NetOptions& net) {
  const auto roster = roster_for(n, net);
  auto t0 = std::chrono::steady_clock::now();
  std::vector<pid_t> pids(n + 1, -1);
  std::vector<int> fds(n + 1, -1);
  for (int i = 0; i <= n; ++i) {
    int p[2];
    if (::pipe(p) != 0) throw std::runtime_error("pipe failed");
    pid_t pid = ::fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
      ::close(p[0]);
      for (int k = 0; k < i; ++k) ::close(fds[k]);
      std::string text;
      try {
        FaultInjector f;
        add_faults(f, net);
        text = party_result_json(run_endpoint(c, n, i, o, inputs, roster, net.cheats.empty() ? nullptr : &f));
      } catch (const std::exception& e) {
        text = party_result_json(failed(i, e.what()));
      }
      write_all(p[1], text);
      ::close(p[1]);
      ::_exit(0);
    }
    ::close(p[1]);
    pids[i] = pid;
    fds[i] = p[0];
  }
  // read every pipe concurrently so no child blocks on a full pipe
  std::vector<std::string> text(n + 1);
  std::vector<pollfd> pf;
  for (int i = 0; i <= n; ++i) pf.push_back({fds[i], POLLIN, 0});
  int open = n + 1;
  char buf[1 << 16];
  while (open > 0) {
    if (::poll(pf.data(), pf.size(), -1) < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("poll failed");
    }
    for (int i = 0; i <= n; ++i) {
      if (pf[i].fd < 0 || !(pf[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      ssize_t k = ::read(pf[i].fd, buf, sizeof buf);
      if (k > 0) {
        text[i].append(buf, static_cast<std::size_t>(k));
      } else if (k == 0 || errno != EINTR) {
        ::close(pf[i].fd);
        pf[i].fd = -1;
        --open;
      }
    }
  }
  for (pid_t pid : pids) ::waitpid(pid, nullptr, 0);
  RunOutcome out;
  for (int i = 0; i < n; ++i) {
    try {
      out.parties.push_back(party_result_from_json(text[i]));
    } catch (const std::exception&) {
      out.parties.push_back(failed(i, "party process ended without a result"));
    }
  }
  out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

RunOutcome execute(const Circuit& c, int n, const EngineOptions& o, const PartyInputs& inputs, const NetOptions& net) {
  FaultInjector faults;
  add_faults(faults, net);
  FaultInjector* fp = net.cheats.empty() ? nullptr : &faults;
  if (net.party >= 0) {
    if (net.party > n) throw std::invalid_argument("--party must be in [0, n]");
    auto t0 = std::chrono::steady_clock::now();
    RunOutcome out;
    PartyResult r = run_endpoint(c, n, net.party, o, inputs, roster_for(n, net), fp);
    if (net.party < n) out.parties.push_back(std::move(r));
    out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }
  if (net.net == "mem") return run_mem(c, n, o, inputs, fp);
  if (net.net == "tcp") return run_forked(c, n, o, inputs, net);
  throw std::invalid_argument("unknown network " + net.net);
}

std::string party_result_json(const PartyResult& r) {
  json j;
  j["party"] = r.party;
  j["ok"] = r.ok;
  j["abort"] = {r.abort_phase, r.abort_tag, r.abort_reason};
  j["suspects"] = r.suspects;
  j["have_outputs"] = r.have_outputs;
  j["outputs"] = r.outputs;
  j["times"] = {r.prep_s, r.online_s, r.verify_s};
  json cells = json::array();
  for (const auto& [k, c] : r.meter.cells())
    cells.push_back({k.first, k.second, c.bits, c.bytes, c.messages, c.rounds, c.modeled_bits});
  j["meter"] = cells;
  j["dealer_bytes"] = r.meter.dealer_bytes();
  return j.dump();
}

PartyResult party_result_from_json(const std::string& text) {
  json j = json::parse(text);
  PartyResult r;
  r.party = j.at("party");
  r.ok = j.at("ok");
  r.abort_phase = j["abort"][0];
  r.abort_tag = j["abort"][1];
  r.abort_reason = j["abort"][2];
  r.suspects = j["suspects"].get<std::vector<int>>();
  r.have_outputs = j["have_outputs"];
  r.outputs = j["outputs"].get<std::vector<std::vector<std::uint64_t>>>();
  r.prep_s = j["times"][0], r.online_s = j["times"][1], r.verify_s = j["times"][2];
  for (const auto& c : j["meter"]) {
    MeterCell m;
    m.bits = c[2], m.bytes = c[3], m.messages = c[4], m.rounds = c[5], m.modeled_bits = c[6];
    r.meter.add(static_cast<Phase>(c[0].get<int>()), c[1].get<std::string>(), m);
  }
  r.meter.dealer(j["dealer_bytes"]);
  return r;
}

}  // namespace hmpc::cli
