#include "doctest.h"
#include "hmpc/apps.hpp"
#include "hmpc/report.hpp"
#include "json.hpp"

using namespace hmpc;

TEST_CASE("report json states decimal and binary megabytes") {
  BenchShape s;
  s.gates = 1000;
  EngineOptions o;
  RunOutcome out = run_mem(bench_circuit(s), 5, o, PartyInputs(5));
  Report r = make_report("mult", 5, o, "mem", out);
  auto j = nlohmann::json::parse(report_json(r));
  CHECK(j["phases"]["online"]["bytes"] == 32000);
  CHECK(j["phases"]["online"]["MB"].get<double>() == doctest::Approx(0.032));
  CHECK(j["phases"]["online"]["MiB"].get<double>() == doctest::Approx(32000.0 / 1048576));
  CHECK(j["verdict"] == "ok");
  std::uint64_t sum = 0;
  for (auto b : j["phases"]["online"]["party_bytes"]) sum += b.get<std::uint64_t>();
  CHECK(sum == 32000);
  CHECK(report_table(r).find("verdict: ok") != std::string::npos);
}

TEST_CASE("aborts are reported with phase and reason") {
  BenchShape s;
  s.gates = 10;
  EngineOptions o;
  o.mode = Mode::malicious;
  FaultInjector f;
  f.add(parse_fault_rule("from=0,to=2,tag=eval,nth=0,action=add,offset=0,value=1"));
  RunOutcome out = run_mem(bench_circuit(s), 5, o, PartyInputs(5), &f);
  Report r = make_report("mult", 5, o, "mem", out);
  CHECK_FALSE(r.ok);
  CHECK(r.verdict.rfind("abort(verification", 0) == 0);
}
