#include <random>

#include "doctest.h"
#include "hmpc/checks.hpp"
#include "hmpc/gadgets.hpp"
#include "hmpc/oracle.hpp"
#include "hmpc/runner.hpp"

using namespace hmpc;

namespace {

std::vector<std::vector<u64>> eval(Circuit& c, const PartyInputs& in, Mode mode = Mode::semi, int n = 5) {
  EngineOptions o;
  o.mode = mode;
  RunOutcome out = run_mem(c, n, o, in);
  REQUIRE(out.all_ok());
  return out.outputs();
}

}  // namespace

TEST_CASE("edge cases of the conversions") {
  Circuit c;
  PartyInputs in(5);
  int b = c.input_b(0, 2, 1);
  in[0][b] = {0, 1};
  int v = c.input(1, 2);
  in[1][v] = {77, 77};
  int x = c.input(0, 3);
  in[0][x] = {0, u64(1) << 63, u64(0) - 1};
  int w = c.input_b(1, 2, 64);
  in[1][w] = {0, u64(1) << 17};
  c.output(bit2a(c, b));
  c.output(bit_inject(c, b, v));
  c.output_b(a2b(c, x));
  c.output(b2a(c, w));
  c.output_b(msb(c, x));
  auto r = eval(c, in);
  CHECK(r[0] == std::vector<u64>{0, 1});
  CHECK(r[1] == std::vector<u64>{0, 77});
  CHECK(r[2] == std::vector<u64>{0, u64(1) << 63, u64(0) - 1});
  CHECK(r[3] == std::vector<u64>{0, u64(1) << 17});
  CHECK(r[4] == std::vector<u64>{0, 1, 1});
}

TEST_CASE("comparison edge cases") {
  Circuit c;
  PartyInputs in(5);
  int x = c.input(0, 3), y = c.input(1, 3);
  in[0][x] = {5, 4, 9};
  in[1][y] = {5, 5, 2};
  c.output_b(lt(c, x, y));
  c.output_b(eq(c, x, y));
  int s = c.input(0, 3);
  in[0][s] = {3, u64(0) - 1, fp_encode_raw(-2.5)};
  c.output(relu(c, s));
  auto r = eval(c, in);
  CHECK(r[0] == std::vector<u64>{0, 1, 0});
  CHECK(r[1] == std::vector<u64>{1, 0, 0});
  CHECK(r[2] == std::vector<u64>{3, 0, 0});
}

TEST_CASE("max pooling over {1,7,3,5}") {
  auto want = oracle::maxpool({1, 7, 3, 5});
  CHECK(want.value == 7);
  CHECK(want.index == 1);
  Circuit c;
  PartyInputs in(5);
  int v = c.input(2, 4);
  in[2][v] = {1, 7, 3, 5};
  auto p = pool(c, v, true, true, true);
  c.output(p.value);
  c.output(p.index);
  c.output_b(p.onehot);
  auto r = eval(c, in, Mode::malicious);
  CHECK(r[0][0] == 7);
  CHECK(r[1][0] == 1);
  CHECK(r[2] == std::vector<u64>{0, 1, 0, 0});
}

TEST_CASE("min pooling ties go to the lowest index") {
  Circuit c;
  PartyInputs in(5);
  int v = c.input(0, 5);
  in[0][v] = {9, 4, 8, 4, 4};
  auto p = pool(c, v, false, true);
  c.output(p.value);
  c.output(p.index);
  auto r = eval(c, in);
  CHECK(r[0][0] == 4);
  CHECK(r[1][0] == 1);
}

TEST_CASE("identity matrix times M") {
  Circuit c;
  PartyInputs in(5);
  int I = c.input(0, 4), M = c.input(1, 4);
  in[0][I] = {fp_encode_raw(1), 0, 0, fp_encode_raw(1)};
  in[1][M] = {fp_encode_raw(0.5), fp_encode_raw(-1.25), fp_encode_raw(3), fp_encode_raw(2)};
  c.output(matmul(c, I, M, 2, 2, 2, kFrac));
  auto r = eval(c, in);
  const double want[] = {0.5, -1.25, 3, 2};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(fp_decode_raw(r[0][i]) - want[i]) <= 1.0 / (1 << kFrac));
}

TEST_CASE("gadget suite against the oracle") {
  for (Mode mode : {Mode::semi, Mode::malicious})
    for (const auto& r : check_gadgets(5, mode, 60, 11)) {
      CAPTURE(r.name);
      CAPTURE(r.first_failure);
      CHECK(r.ok());
    }
}

TEST_CASE("exhaustive 4-bit mini ring") {
  for (const auto& r : check_mini_ring(5, Mode::semi, 4)) {
    CAPTURE(r.first_failure);
    CHECK(r.ok());
    CHECK(r.cases == 256);
  }
}

TEST_CASE("mini-ring oracle") {
  CHECK(oracle::lt_ring(3, 200, 8) == 0);
  CHECK(oracle::lt_ring(200, 3, 8) == 1);
  CHECK(oracle::lt_ring(127, 128, 8) == 1);
  CHECK(oracle::eq_ring(0x1ff, 0xff, 8) == 1);
}
