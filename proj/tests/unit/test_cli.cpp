#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "app/commands.hpp"
#include "app/config.hpp"

using namespace strb::app;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "strb");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("strb_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kSmall = "[mesh]\nnx = 14\nny = 6\n[time]\nK = 8\n[training]\nrho_count = 4\ntol1 = 1e-2\n";

}  // namespace

TEST_CASE("config serialization round trip") {
  RunConfig c;
  c.problem.mesh.nx = 33;
  c.training.init = InitMethod::Greedy;
  c.payoff = "put:95.5";
  c.seed = 18446744073709551615ull;
  const std::string text = serialize_config(c);
  const RunConfig back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(back.problem.mesh.nx == 33);
  CHECK(back.seed == c.seed);
  CHECK(serialize_config(parse_config("")) == serialize_config(RunConfig{}));
}

TEST_CASE("config rejects bad input") {
  CHECK_THROWS_AS(parse_config("[mesh]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[mesh]\nnx = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[mesh]\ns_min = 5\ns_max = 5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[time]\nK = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[payoff]\nknots = 70, 60\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[online]\npayoff = swap:1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[training]\nrho_min = -2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nseed = -1\n"), ConfigError);
}

TEST_CASE("payoff queries") {
  CHECK(parse_query("basis:3").basis_index == 3);
  CHECK_FALSE(parse_query("basis:3").spec.has_value());
  CHECK(parse_query("call:70").spec.has_value());
  CHECK_THROWS_AS(parse_query("basis:0"), ConfigError);
  CHECK_THROWS_AS(parse_query("basis:x"), ConfigError);
  CHECK_THROWS_AS(parse_query("call:x"), ConfigError);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  std::ofstream(dir / "bad.ini") << "[mesh]\nunknown = 3\n";
  CHECK(run({"offline", "--config", (dir / "bad.ini").string(), "--out", (dir / "out").string()}) == 2);
  CHECK_FALSE(fs::exists(dir / "out"));
  CHECK(run({"validate-config", "--config", (dir / "missing.ini").string()}) == 2);
  CHECK(run({"online", "--model", (dir / "missing.strb").string(), "--out", (dir / "o").string()}) == 3);
  std::ofstream(dir / "junk.strb") << "junk";
  CHECK(run({"online", "--model", (dir / "junk.strb").string(), "--out", (dir / "o").string()}) == 3);
  CHECK(run({"frobnicate"}) == 2);
  std::string text;
  CHECK(run({"validate-config"}, &text) == 0);
  CHECK(text == serialize_config(RunConfig{}));
}

TEST_CASE("offline and online runs are deterministic") {
  const auto dir = scratch("det");
  std::ofstream(dir / "small.ini") << kSmall;
  const auto cfg = (dir / "small.ini").string();
  REQUIRE(run({"offline", "--config", cfg, "--out", (dir / "a").string()}) == 0);
  REQUIRE(run({"offline", "--config", cfg, "--out", (dir / "b").string()}) == 0);
  for (const char* f : {"model.strb", "init_eigenvalues.csv", "greedy_decay.csv", "greedy_samples.csv"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  REQUIRE(run({"online", "--config", cfg, "--model", (dir / "a" / "model.strb").string(), "--out",
               (dir / "on").string(), "--truth"}) == 0);
  const std::string eb = slurp(dir / "on" / "error_breakdown.csv");
  CHECK(eb.rfind("rho,R_N0,R_N1,beta_LB,delta,delta1,in_training_range,true_error,true_error_window\n", 0) == 0);
  CHECK(fs::exists(dir / "on" / "surface_t0.csv"));
  CHECK(fs::exists(dir / "on" / "surface_T.csv"));
  CHECK(run({"online", "--config", cfg, "--model", (dir / "a" / "model.strb").string(), "--out",
             (dir / "on").string(), "--payoff", "basis:99"}) == 2);

  std::ofstream(dir / "sweep.ini") << kSmall << "[sweep]\ncount = 5\n";
  REQUIRE(run({"sweep", "--config", (dir / "sweep.ini").string(), "--model", (dir / "a" / "model.strb").string(),
               "--out", (dir / "s1").string()}) == 0);
  REQUIRE(run({"sweep", "--config", (dir / "sweep.ini").string(), "--model", (dir / "a" / "model.strb").string(),
               "--out", (dir / "s2").string()}) == 0);
  const std::string sweep = slurp(dir / "s1" / "sweep.csv");
  CHECK(sweep == slurp(dir / "s2" / "sweep.csv"));
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 6);
}

TEST_CASE("infinite tolerance gives a single evolution function; one-point sweep gives one row") {
  const auto dir = scratch("inf");
  std::ofstream(dir / "inf.ini") << "[mesh]\nnx = 14\nny = 6\n[time]\nK = 8\n[training]\ntol1 = inf\n"
                                  << "[sweep]\ncount = 1\n";
  REQUIRE(run({"offline", "--config", (dir / "inf.ini").string(), "--out", dir.string()}) == 0);
  CHECK(slurp(dir / "offline_report.txt").find("N1 = 1\n") != std::string::npos);
  REQUIRE(run({"sweep", "--config", (dir / "inf.ini").string(), "--out", dir.string()}) == 0);
  const std::string sweep = slurp(dir / "sweep.csv");
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 2);
}
