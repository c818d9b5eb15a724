#include "doctest.h"
#include "hmpc/apps.hpp"

using namespace hmpc;

namespace {

Outputs run(const Program& p, int n = 5, Mode mode = Mode::semi) {
  EngineOptions o;
  o.mode = mode;
  RunOutcome out = run_mem(p.circuit, n, o, p.inputs(n));
  REQUIRE(out.all_ok());
  return out.outputs();
}

}  // namespace

TEST_CASE("wagner-fischer distances") {
  CHECK(wagner_fischer("kitten", "sitting") == 3);
  CHECK(oracle::edit_distance("kitten", "sitting") == 3);
  CHECK(wagner_fischer("", "abc") == 3);
  CHECK(wagner_fischer("ACGT", "ACGT") == 0);
}

TEST_CASE("euclidean distance basics") {
  BioInstance inst;
  inst.db = {{1, 2, 3, 4}, {1, 2, 3, 5}};
  inst.query = {1, 2, 3, 4};
  auto bp = build_bio(inst);
  auto r = run(bp.prog);
  CHECK(r[0] == std::vector<u64>{0, 1});
  CHECK(r[1][0] == 0);
  CHECK(r[2][0] == 0);
  CHECK(check_bio(inst, r).ok());
}

TEST_CASE("single sample database") {
  BioInstance inst;
  inst.db = {{10, 0, 0, 0}};
  inst.query = {7, 0, 0, 4};
  auto r = run(build_bio(inst).prog);
  CHECK(r[1][0] == 25);
  CHECK(r[2][0] == 0);
}

TEST_CASE("random 16-sample biometric database") {
  auto inst = random_bio(16, 4, 16);
  auto ref = oracle::biometric(inst.db, inst.query);
  CHECK(ref.best.value == 5017);
  CHECK(ref.best.index == 15);
  CHECK(ref.distances[0] == 15849);
  for (Mode mode : {Mode::semi, Mode::malicious}) {
    auto r = run(build_bio(inst).prog, 5, mode);
    CHECK(check_bio(inst, r).ok());
    CHECK(r[2][0] == 15);
  }
}

TEST_CASE("fixed-point biometric distances stay within the truncation bound") {
  auto inst = random_bio(8, 4, 3, kFrac);
  auto r = run(build_bio(inst).prog);
  CHECK(check_bio(inst, r).ok());
}

TEST_CASE("ssq on an asymmetric pair") {
  SsqInstance inst;
  inst.db = {"ACGTACGTAAAA", "ACGAACGTTTTT"};
  inst.query = "ACGTACGTTTTA";
  inst.block_len = 4;
  auto ref = oracle::ssq(inst.db, inst.query, 4);
  CHECK(ref.distances == std::vector<u64>{0, 1});
  auto luts = build_luts(inst);
  CHECK(ssq_from_luts(luts).distances == ref.distances);
  auto r = run(build_ssq(luts).prog);
  CHECK(r[0] == ref.distances);
  CHECK(r[2][0] == 0);
}

TEST_CASE("ssq special cases") {
  SsqInstance inst;
  inst.block_len = 2;
  inst.db = {"AAGG", "ACGT", "AAGG"};
  SUBCASE("an identical sequence wins with distance zero") {
    inst.query = "ACGT";
    auto r = run(build_ssq(build_luts(inst)).prog);
    CHECK(r[1][0] == 0);
    CHECK(r[2][0] == 1);
  }
  SUBCASE("no block matches") {
    inst.query = "TTTT";
    auto r = run(build_ssq(build_luts(inst)).prog);
    CHECK(r[0] == std::vector<u64>{0, 0, 0});
    CHECK(r[2][0] == 0);
  }
  SUBCASE("all-equal distances pick the lowest index") {
    inst.db = {"AAGG", "AAGG"};
    inst.query = "AAGG";
    auto r = run(build_ssq(build_luts(inst)).prog);
    CHECK(r[2][0] == 0);
  }
}

TEST_CASE("random ssq instance with eight sequences") {
  auto inst = random_ssq(8, 4, 8, 3, 8);
  auto luts = build_luts(inst);
  CHECK(ssq_from_luts(luts).distances == oracle::ssq(inst.db, inst.query, inst.block_len).distances);
  for (Mode mode : {Mode::semi, Mode::malicious}) CHECK(check_ssq(luts, run(build_ssq(luts).prog, 5, mode)).ok());
}

TEST_CASE("one-layer toy network") {
  oracle::Mlp net;
  net.dims = {2, 2};
  net.weights = {{1.0, 0.5, 0.0, 1.0}};
  net.biases = {{0.25, -0.5}};
  auto fixed = oracle::mlp_fixed(net, {1.5, 2.0}, kFrac);
  CHECK(fixed[0].ring == 22528);
  CHECK(fixed[1].ring == 12288);
  auto np = build_nn1(net, {{1.5, 2.0}});
  auto r = run(np.prog);
  CHECK(check_nn1(net, {{1.5, 2.0}}, r).ok());
}

TEST_CASE("zero weights pass the biases through relu") {
  oracle::Mlp net;
  net.dims = {2, 2, 2};
  net.weights = {{0, 0, 0, 0}, {1, 0, 0, 1}};
  net.biases = {{0.5, -0.5}, {0, 0}};
  auto r = run(build_nn1(net, {{0.3, 0.7}}).prog);
  CHECK(std::abs(fp_decode_raw(r[0][0]) - 0.5) <= 2.0 / (1 << kFrac));
  CHECK(std::abs(fp_decode_raw(r[0][1])) <= 2.0 / (1 << kFrac));
}

TEST_CASE("nn1 logits on a small batch") {
  auto net = random_mlp({16, 8, 8, 10}, 3);
  auto xs = random_mlp_inputs(10, 16, 4);
  auto chk = check_nn1(net, xs, run(build_nn1(net, xs).prog, 5, Mode::malicious));
  CHECK(chk.ok());
  CHECK(chk.agree >= 9);
}
