#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "exec.hpp"
#include "hmpc/apps.hpp"
#include "hmpc/attacks.hpp"
#include "hmpc/checks.hpp"
#include "hmpc/report.hpp"

using namespace hmpc;

namespace {

struct Common {
  int n = 5;
  std::string mode = "semi";
  std::uint64_t seed = 1;
  std::string seed_file;
  int kappa = 40;
  bool fair = false;
  std::string trgen = "dsbits";
  std::string json_out;
  bool quiet = false;
  cli::NetOptions net;
};

void add_common(CLI::App* app, Common& c, bool with_net = true) {
  app->add_option("--n", c.n, "number of parties (odd, >= 3)")->check(CLI::Range(3, 63));
  app->add_option("--mode", c.mode, "semi | malicious")->check(CLI::IsMember({"semi", "malicious"}));
  app->add_option("--seed", c.seed, "master seed for all keys and randomness");
  app->add_option("--seed-file", c.seed_file, "file holding the master seed")->check(CLI::ExistingFile);
  app->add_option("--kappa", c.kappa, "verification repetitions (malicious)")->check(CLI::Range(1, 4096));
  if (!with_net) return;
  app->add_flag("--fair", c.fair, "fair output reconstruction (malicious)");
  app->add_option("--trgen", c.trgen, "truncation pairs from dsbits or the dealer")
      ->check(CLI::IsMember({"dsbits", "dealer"}));
  app->add_option("--net", c.net.net, "mem | tcp")->check(CLI::IsMember({"mem", "tcp"}));
  app->add_option("--port", c.net.base_port, "first loopback port for --net tcp");
  app->add_option("--roster", c.net.roster, "JSON roster of n parties and the dealer")->check(CLI::ExistingFile);
  app->add_option("--party", c.net.party, "run only this party (n = dealer) against --roster");
  app->add_option("--cheat", c.net.cheats, "fault rule, e.g. from=0,to=2,tag=eval,nth=0,action=add,offset=3,value=1");
  app->add_option("--json", c.json_out, "write the JSON report to this file (- for stdout)");
  app->add_flag("--quiet", c.quiet, "suppress the table");
}

EngineOptions engine_options(Common& c) {
  if (c.n % 2 == 0) throw CLI::ValidationError("--n", "must be odd");
  if (!c.seed_file.empty()) {
    std::ifstream in(c.seed_file);
    std::string s;
    in >> s;
    c.seed = std::stoull(s, nullptr, 0);
  }
  EngineOptions o;
  o.mode = parse_mode(c.mode);
  o.seed = c.seed;
  o.kappa = c.kappa;
  o.fair = c.fair;
  o.trgen = c.trgen == "dealer" ? TrGen::dealer : TrGen::dsbits;
  return o;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(split(line));
  }
  return rows;
}

u64 parse_value(const std::string& s, int frac_bits) {
  if (frac_bits > 0) return fp_encode_raw(std::stod(s), frac_bits);
  if (!s.empty() && s[0] == '-') return static_cast<u64>(std::stoll(s, nullptr, 0));
  return std::stoull(s, nullptr, 0);
}

std::vector<u64> parse_row(const std::vector<std::string>& cells, int frac_bits) {
  std::vector<u64> v;
  for (const auto& c : cells) v.push_back(parse_value(c, frac_bits));
  return v;
}

// A query given either as a file or as a comma-separated literal.
std::vector<std::string> query_cells(const std::string& q) {
  if (std::filesystem::exists(q)) {
    auto rows = read_csv(q);
    if (rows.empty()) throw std::runtime_error("empty query file " + q);
    return rows[0];
  }
  return split(q);
}

std::string decode(u64 v, int frac_bits) {
  if (frac_bits == 0) return std::to_string(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", fp_decode_raw(v, frac_bits));
  return buf;
}

int emit(Report& r, const Common& c) {
  if (!c.quiet) std::cout << report_table(r);
  if (!c.json_out.empty()) {
    if (c.json_out == "-") {
      std::cout << report_json(r) << "\n";
    } else {
      std::ofstream(c.json_out) << report_json(r) << "\n";
    }
  }
  return r.ok ? 0 : 2;
}

int finish_single(const RunOutcome& out, const Common& c) {
  if (out.parties.empty()) {
    if (!c.quiet) std::cout << "dealer finished\n";
    return 0;
  }
  return -1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hmpc: honest-majority MPC engine over Z_2^64"};
  app.require_subcommand(1);

  Common bc;
  BenchShape shape;
  std::string kind = "mult";
  auto* bench = app.add_subcommand("bench", "synthetic circuits with a communication report");
  bench->add_option("kind", kind, "mult | mult3 | mult4 | dotp | dsbits")
      ->check(CLI::IsMember({"mult", "mult3", "mult4", "dotp", "dsbits"}));
  bench->add_option("--gates", shape.gates, "gates in total")->check(CLI::PositiveNumber);
  bench->add_option("--depth", shape.depth, "levels; gates are spread equally")->check(CLI::PositiveNumber);
  bench->add_option("--nf", shape.nf, "dot product length")->check(CLI::PositiveNumber);
  bench->add_option("--trunc", shape.trunc, "fractional bits truncated per product")->check(CLI::Range(0, 62));
  add_common(bench, bc);

  Common rc;
  std::string app_name = "bio";
  std::size_t m = 16, nf = 4, blocks = 4, batch = 100;
  int frac = 0, block_len = 8, variants = 6;
  std::string db_csv, query, keys_csv, lut_csv, dims = "16,8,8,10";
  auto* run = app.add_subcommand("run", "applications: bio, ssq, nn1");
  run->add_option("app", app_name, "bio | ssq | nn1")->check(CLI::IsMember({"bio", "ssq", "nn1"}));
  run->add_option("--m", m, "database size (random instances)")->check(CLI::PositiveNumber);
  run->add_option("--nf", nf, "bio: features per sample")->check(CLI::PositiveNumber);
  run->add_option("--frac", frac, "bio: fixed-point fractional bits (0 = integer features)")->check(CLI::Range(0, 20));
  run->add_option("--db", db_csv, "bio: CSV with one sample per row")->check(CLI::ExistingFile);
  run->add_option("--query", query, "bio: CSV file or comma-separated literal; ssq: CSV of query block ids");
  run->add_option("--blocks", blocks, "ssq: blocks per sequence")->check(CLI::PositiveNumber);
  run->add_option("--block-len", block_len, "ssq: characters per block")->check(CLI::Range(2, 1 << 16));
  run->add_option("--variants", variants, "ssq: variants per block in random instances")->check(CLI::PositiveNumber);
  run->add_option("--keys", keys_csv, "ssq: CSV of block ids per block (from `hmpc lut`)")->check(CLI::ExistingFile);
  run->add_option("--lut", lut_csv, "ssq: CSV with one table row per sequence")->check(CLI::ExistingFile);
  run->add_option("--batch", batch, "nn1: inputs per run")->check(CLI::PositiveNumber);
  run->add_option("--dims", dims, "nn1: layer widths");
  add_common(run, rc);

  std::string seq_file, lut_query, out_dir = ".";
  int lut_block_len = 8;
  auto* lut = app.add_subcommand("lut", "prepare ssq lookup tables from plaintext sequences (data-owner side)");
  lut->add_option("--sequences", seq_file, "file with one sequence per line")->required()->check(CLI::ExistingFile);
  lut->add_option("--query", lut_query, "query sequence")->required();
  lut->add_option("--block-len", lut_block_len, "characters per block")->check(CLI::Range(2, 1 << 16));
  lut->add_option("--out", out_dir, "directory for keys.csv, lut.csv and query.csv");

  Common cc;
  std::string what = "oracle";
  int circuits = 100, gadget_inputs = 1000, mini_width = 8, gates = 30;
  auto* check = app.add_subcommand("check", "compare engine outputs with the plaintext oracle");
  check->add_option("what", what, "oracle")->check(CLI::IsMember({"oracle"}));
  check->add_option("--circuits", circuits, "random circuits")->check(CLI::NonNegativeNumber);
  check->add_option("--circuit-gates", gates, "gates per random circuit")->check(CLI::PositiveNumber);
  check->add_option("--gadget-inputs", gadget_inputs, "inputs per gadget (0 skips)")->check(CLI::NonNegativeNumber);
  check->add_option("--mini-ring", mini_width, "exhaustive compare/equals over this ring width (0 skips)")
      ->check(CLI::Range(0, 12));
  add_common(check, cc, false);

  Common ac;
  std::string suite = "suite";
  int trials = 100;
  std::uint64_t additive = 0;
  auto* attack = app.add_subcommand("attack", "fault-injection soundness and fairness schedules");
  attack->add_option("what", suite, "suite")->check(CLI::IsMember({"suite"}));
  attack->add_option("--trials", trials, "trials per fault class")->check(CLI::PositiveNumber);
  attack->add_option("--additive", additive, "fixed additive error (0 draws one per trial)");
  add_common(attack, ac, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) {
      EngineOptions o = engine_options(bc);
      shape.kind = parse_bench(kind);
      Circuit c = bench_circuit(shape);
      RunOutcome out = cli::execute(c, bc.n, o, PartyInputs(bc.n), bc.net);
      if (int rc0 = finish_single(out, bc); rc0 >= 0) return rc0;
      Report r = make_report(std::string("bench-") + kind, bc.n, o, bc.net.party >= 0 ? "tcp" : bc.net.net, out);
      r.params = {{"gates", std::to_string(shape.gates)}, {"depth", std::to_string(shape.depth)},
                  {"nf", std::to_string(shape.nf)}, {"trunc", std::to_string(shape.trunc)}};
      const double g = static_cast<double>(shape.gates);
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.2f", r.phase(Phase::prep).bytes / g);
      r.results.emplace_back("prep bytes per gate (measured)", buf);
      std::snprintf(buf, sizeof buf, "%.2f", r.phase(Phase::prep).modeled_bytes() / g);
      r.results.emplace_back("prep bytes per gate (modeled)", buf);
      std::snprintf(buf, sizeof buf, "%.2f", r.phase(Phase::online).bytes / g);
      r.results.emplace_back("online bytes per gate", buf);
      if (o.mode == Mode::malicious) r.results.emplace_back("verification bytes", std::to_string(r.phase(Phase::verify).bytes));
      return emit(r, bc);
    }

    if (*run) {
      EngineOptions o = engine_options(rc);
      const std::string net_name = rc.net.party >= 0 ? "tcp" : rc.net.net;
      if (app_name == "bio") {
        BioInstance inst;
        if (!db_csv.empty()) {
          inst.frac_bits = frac;
          for (const auto& row : read_csv(db_csv)) inst.db.push_back(parse_row(row, frac));
          if (query.empty()) throw std::runtime_error("--query is required with --db");
          inst.query = parse_row(query_cells(query), frac);
        } else {
          inst = random_bio(m, nf, rc.seed, frac);
          if (!query.empty()) inst.query = parse_row(query_cells(query), frac);
        }
        BioProgram bp = build_bio(inst);
        RunOutcome out = cli::execute(bp.prog.circuit, rc.n, o, bp.prog.inputs(rc.n), rc.net);
        if (int rc0 = finish_single(out, rc); rc0 >= 0) return rc0;
        Report r = make_report("bio", rc.n, o, net_name, out);
        r.params = {{"m", std::to_string(bp.m)}, {"nf", std::to_string(bp.nf)}, {"frac", std::to_string(frac)}};
        if (r.ok) {
          AppCheck chk = check_bio(inst, out.outputs());
          r.results.emplace_back("minimum distance", decode(chk.best_value, frac));
          r.results.emplace_back("argmin", std::to_string(chk.best_index));
          r.results.emplace_back("oracle", chk.ok() ? "match" : std::to_string(chk.mismatched) + " mismatches");
          r.ok = chk.ok();
        }
        return emit(r, rc);
      }
      if (app_name == "ssq") {
        SsqLuts luts;
        if (!lut_csv.empty() || !keys_csv.empty()) {
          if (lut_csv.empty() || keys_csv.empty() || query.empty())
            throw std::runtime_error("--keys, --lut and --query are required together");
          for (const auto& row : read_csv(keys_csv)) luts.keys.push_back(parse_row(row, 0));
          for (const auto& row : read_csv(lut_csv)) luts.lut.push_back(parse_row(row, 0));
          luts.query_ids = parse_row(query_cells(query), 0);
          luts.blocks = luts.keys.size();
        } else {
          luts = build_luts(random_ssq(m, blocks, block_len, variants, rc.seed));
        }
        SsqProgram sp = build_ssq(luts);
        RunOutcome out = cli::execute(sp.prog.circuit, rc.n, o, sp.prog.inputs(rc.n), rc.net);
        if (int rc0 = finish_single(out, rc); rc0 >= 0) return rc0;
        Report r = make_report("ssq", rc.n, o, net_name, out);
        r.params = {{"m", std::to_string(sp.m)}, {"blocks", std::to_string(luts.blocks)},
                    {"columns", std::to_string(sp.columns)}};
        if (r.ok) {
          AppCheck chk = check_ssq(luts, out.outputs());
          r.results.emplace_back("minimum distance", std::to_string(chk.best_value));
          r.results.emplace_back("closest sequence", std::to_string(chk.best_index));
          r.results.emplace_back("oracle", chk.ok() ? "match" : std::to_string(chk.mismatched) + " mismatches");
          r.ok = chk.ok();
        }
        return emit(r, rc);
      }
      std::vector<std::size_t> widths;
      for (const auto& w : split(dims)) widths.push_back(std::stoul(w));
      oracle::Mlp net = random_mlp(widths, rc.seed);
      auto xs = random_mlp_inputs(batch, widths.front(), rc.seed + 1);
      Nn1Program np = build_nn1(net, xs);
      RunOutcome out = cli::execute(np.prog.circuit, rc.n, o, np.prog.inputs(rc.n), rc.net);
      if (int rc0 = finish_single(out, rc); rc0 >= 0) return rc0;
      Report r = make_report("nn1", rc.n, o, net_name, out);
      r.params = {{"dims", dims}, {"batch", std::to_string(batch)}, {"frac", std::to_string(kFrac)}};
      if (r.ok) {
        AppCheck chk = check_nn1(net, xs, out.outputs());
        r.results.emplace_back("argmax agreement", std::to_string(chk.agree) + "/" + std::to_string(batch));
        r.results.emplace_back("logits within truncation bound",
                               std::to_string(chk.compared - chk.mismatched) + "/" + std::to_string(chk.compared));
        r.ok = chk.ok();
      }
      return emit(r, rc);
    }

    if (*lut) {
      SsqInstance inst;
      inst.block_len = lut_block_len;
      inst.query = lut_query;
      std::ifstream in(seq_file);
      std::string line;
      while (std::getline(in, line))
        if (!trim(line).empty()) inst.db.push_back(trim(line));
      SsqLuts luts = build_luts(inst);
      std::filesystem::create_directories(out_dir);
      auto write_rows = [&](const std::string& name, const std::vector<std::vector<u64>>& rows) {
        std::ofstream f(std::filesystem::path(out_dir) / name);
        for (const auto& row : rows) {
          for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
          f << "\n";
        }
      };
      write_rows("keys.csv", luts.keys);
      write_rows("lut.csv", luts.lut);
      write_rows("query.csv", {luts.query_ids});
      std::cout << "wrote " << luts.blocks << " blocks, " << luts.columns() << " columns, " << luts.lut.size()
                << " sequences to " << out_dir << "\n";
      return 0;
    }

    if (*check) {
      EngineOptions o = engine_options(cc);
      std::vector<CheckResult> all;
      if (circuits > 0) all.push_back(check_random_circuits(cc.n, o.mode, circuits, cc.seed, gates));
      if (gadget_inputs > 0)
        for (auto& r : check_gadgets(cc.n, o.mode, static_cast<std::size_t>(gadget_inputs), cc.seed)) all.push_back(r);
      if (mini_width > 0)
        for (auto& r : check_mini_ring(cc.n, o.mode, mini_width)) all.push_back(r);
      bool ok = true;
      std::printf("%-20s %8s %10s %7s %8s\n", "check", "cases", "mismatches", "aborts", "wall s");
      for (const auto& r : all) {
        std::printf("%-20s %8zu %10zu %7zu %8.2f %s\n", r.name.c_str(), r.cases, r.mismatches, r.aborts, r.wall_s,
                    r.ok() ? "ok" : ("FAIL " + r.first_failure).c_str());
        ok = ok && r.ok();
      }
      return ok ? 0 : 1;
    }

    if (*attack) {
      engine_options(ac);
      std::printf("%-14s %7s %6s %12s %12s %10s\n", "fault class", "trials", "fired", "all aborted", "none aborted",
                  "abort rate");
      for (auto cls : kFaultClasses) {
        SoundnessTally t = soundness_trials(cls, ac.n, ac.kappa, trials, ac.seed, additive);
        std::printf("%-14s %7d %6d %12d %12d %10.3f\n", fault_class_name(cls), t.trials, t.fired, t.all_aborted,
                    t.none_aborted, t.fired ? static_cast<double>(t.all_aborted) / t.fired : 0.0);
      }
      std::printf("\n%-28s %8s %11s %6s\n", "fair schedule", "outputs", "no outputs", "split");
      int splits = 0;
      for (const auto& s : fair_schedules(ac.n)) {
        FairOutcome f = run_fair_schedule(s, ac.n, ac.seed);
        splits += f.split ? 1 : 0;
        std::printf("%-28s %8d %11d %6s\n", f.name.c_str(), f.honest_with_output, f.honest_without_output,
                    f.split ? "yes" : "no");
      }
      return splits == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
