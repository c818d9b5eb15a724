#include <random>
#include <thread>

#include "doctest.h"
#include "hmpc/transport.hpp"

using namespace hmpc;

TEST_CASE("writer and reader round-trip packed fields") {
  Writer w;
  w.put(5, 3);
  w.put(0xabcdef, 24);
  w.put128((u128(3) << 64) | 7, 66);
  w.put(1, 1);
  CHECK(w.bits() == 94);
  CHECK(w.bytes().size() == 12);
  Reader r(w.bytes());
  CHECK(r.get(3) == 5);
  CHECK(r.get(24) == 0xabcdef);
  CHECK(r.get128(66) == ((u128(3) << 64) | 7));
  CHECK(r.get(1) == 1);
}

TEST_CASE("meter totals equal the sum of sent payloads") {
  const int n = 3;
  MemNetwork net(n);
  std::mt19937_64 rng(7);
  std::vector<std::vector<std::size_t>> sizes(n, std::vector<std::size_t>(1000));
  for (auto& row : sizes)
    for (auto& s : row) s = rng() % 64;
  std::vector<Meter> meters(n);
  std::vector<std::thread> th;
  for (int i = 0; i < n; ++i)
    th.emplace_back([&, i] {
      Comm c(net.endpoint(i), n);
      for (std::size_t k = 0; k < sizes[i].size(); ++k) {
        Round r = c.round(Phase::online, "x");
        const int to = (i + 1) % n, from = (i + n - 1) % n;
        for (std::size_t b = 0; b < sizes[i][k]; ++b) r.to(to).put(b, 8);
        if (sizes[i][k] == 0) r.to(to);
        r.expect(from);
        r.run();
      }
      meters[i] = c.meter();
    });
  for (auto& t : th) t.join();
  for (int i = 0; i < n; ++i) {
    std::uint64_t want = 0;
    for (auto s : sizes[i]) want += s;
    CHECK(meters[i].total(Phase::online).bytes == want);
    CHECK(meters[i].total(Phase::online).rounds == 1000);
  }
}

TEST_CASE("a barrier without messages still counts one round") {
  MemNetwork net(2);
  Comm c(net.endpoint(0), 2);
  Round r = c.round(Phase::prep, "idle");
  r.run();
  CHECK(c.meter().total(Phase::prep).rounds == 1);
  CHECK(c.meter().total(Phase::prep).bytes == 0);
}

TEST_CASE("merged meters take the longest round count per tag") {
  Meter a, b;
  a.round(Phase::online, "eval");
  a.round(Phase::online, "eval");
  b.round(Phase::online, "eval");
  a.sent(Phase::online, "eval", 64, 8);
  b.sent(Phase::online, "eval", 64, 8);
  Meter m;
  m.merge(a);
  m.merge(b);
  CHECK(m.total(Phase::online).rounds == 2);
  CHECK(m.total(Phase::online).bytes == 16);
}

TEST_CASE("fault rules parse and apply") {
  FaultRule r = parse_fault_rule("from=1,to=2,phase=online,tag=eval,nth=0,action=add,offset=1,value=5");
  CHECK(r.from == 1);
  CHECK(r.to == 2);
  CHECK(r.phase == 1);
  CHECK(r.action == FaultRule::Action::add);
  FaultInjector f;
  f.add(r);
  std::vector<std::uint8_t> payload(16, 0);
  CHECK(f.apply(1, 2, Phase::online, "eval", payload, 128));
  CHECK(payload[8] == 5);
  CHECK(f.fired() == 1);
  std::vector<std::uint8_t> again(16, 0);
  f.apply(1, 2, Phase::online, "eval", again, 128);
  CHECK(again[8] == 0);
  CHECK_THROWS(parse_fault_rule("colour=blue"));
}

TEST_CASE("dropped messages surface as an abort when read") {
  MemNetwork net(2, std::chrono::milliseconds(200));
  FaultInjector f;
  f.add(parse_fault_rule("from=0,to=1,tag=x,nth=-1,action=drop"));
  std::thread sender([&] {
    Comm c(net.endpoint(0), 2, &f);
    Round r = c.round(Phase::online, "x");
    r.to(1).put(1, 8);
    r.run();
  });
  Comm c(net.endpoint(1), 2);
  Round r = c.round(Phase::online, "x");
  r.expect(0);
  r.run();
  CHECK_FALSE(r.has(0));
  CHECK_THROWS_AS(r.from(0), AbortError);
  sender.join();
}

TEST_CASE("loopback tcp echo") {
  auto roster = local_roster(2, 47900 + static_cast<int>(std::random_device{}() % 500));
  std::unique_ptr<TcpEndpoint> a, b;
  std::thread ta([&] { a = std::make_unique<TcpEndpoint>(0, roster); });
  std::thread tb([&] { b = std::make_unique<TcpEndpoint>(1, roster); });
  ta.join();
  tb.join();
  Comm ca(*a, 2), cb(*b, 2);
  std::thread echo([&] {
    Round r = cb.round(Phase::online, "ping");
    r.expect(0);
    r.run();
    u64 v = r.from(0).get(64);
    Round back = cb.round(Phase::online, "pong");
    back.to(0).put(v + 1, 64);
    back.run();
  });
  Round r = ca.round(Phase::online, "ping");
  r.to(1).put(41, 64);
  r.run();
  Round back = ca.round(Phase::online, "pong");
  back.expect(1);
  back.run();
  CHECK(back.from(1).get(64) == 42);
  echo.join();
  CHECK(ca.meter().total(Phase::online).bytes == 8);
}
