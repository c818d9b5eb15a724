#include "hmpc/runner.hpp"

#include <chrono>
#include <memory>
#include <stdexcept>
#include <thread>

namespace hmpc {

bool RunOutcome::all_ok() const {
  for (const auto& p : parties)
    if (!p.ok) return false;
  return !parties.empty();
}

bool RunOutcome::any_ok() const {
  for (const auto& p : parties)
    if (p.ok) return true;
  return false;
}

const std::vector<std::vector<std::uint64_t>>& RunOutcome::outputs() const {
  for (const auto& p : parties)
    if (p.ok && p.have_outputs) return p.outputs;
  throw std::runtime_error("no party produced outputs");
}

Meter RunOutcome::merged_meter() const {
  Meter m;
  for (const auto& p : parties) m.merge(p.meter);
  return m;
}

namespace {

template <class EndpointOf>
RunOutcome run_threads(const Circuit& c, int n, const EngineOptions& o, const PartyInputs& inputs,
                       FaultInjector* faults, EndpointOf&& endpoint_of) {
  if (static_cast<int>(inputs.size()) != n) throw std::invalid_argument("one input map per party is required");
  RunOutcome out;
  out.parties.resize(n);
  const bool dealer = needs_dealer(c, o);
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::thread> th;
  std::exception_ptr dealer_err;
  if (dealer)
    th.emplace_back([&] {
      try {
        run_dealer(n, endpoint_of(n), o.seed);
      } catch (...) {
        dealer_err = std::current_exception();
      }
    });
  std::vector<std::exception_ptr> errs(n);
  for (int i = 0; i < n; ++i)
    th.emplace_back([&, i] {
      try {
        out.parties[i] = run_party(c, n, i, endpoint_of(i), o, inputs[i], faults);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    });
  for (auto& t : th) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

RunOutcome run_mem(const Circuit& c, int n, const EngineOptions& o, const PartyInputs& inputs, FaultInjector* faults) {
  MemNetwork net(n + 1);
  return run_threads(c, n, o, inputs, faults, [&](int i) -> Endpoint& { return net.endpoint(i); });
}

RunOutcome run_tcp_local(const Circuit& c, int n, const EngineOptions& o, const PartyInputs& inputs, int base_port,
                         FaultInjector* faults) {
  auto roster = local_roster(n + 1, base_port);
  const bool dealer = needs_dealer(c, o);
  std::vector<std::unique_ptr<TcpEndpoint>> eps(n + 1);
  std::vector<std::thread> th;
  std::vector<std::exception_ptr> errs(n + 1);
  for (int i = 0; i <= n; ++i)
    th.emplace_back([&, i] {
      try {
        eps[i] = std::make_unique<TcpEndpoint>(i, roster);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    });
  for (auto& t : th) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  (void)dealer;
  return run_threads(c, n, o, inputs, faults, [&](int i) -> Endpoint& { return *eps[i]; });
}

}  // namespace hmpc
