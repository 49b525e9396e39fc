#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "helpers.hpp"
#include "thinlab/cli_io.hpp"
#include "thinlab/errors.hpp"
#include "thinlab/exact.hpp"

using namespace thinlab;
using namespace testing;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::InvalidArgument;
}

struct RunResult {
  int code = -1;
  std::string out;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("thinlab_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the CLI from the scratch directory; stderr is discarded.
RunResult run(const std::string& args) {
  const char* exe = std::getenv("THINLAB_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "THINLAB_CLI is not set");
  const std::string cmd = "cd '" + scratch().string() + "' && '" + exe + "' " + args + " 2>/dev/null";
  RunResult r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kNegative =
    "problem.n = 2\nproblem.m = 33\nbc.kind = constant\nbc.value = -1\nsolver.tol = 1e-12\nsolver.relax = 0\n";

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = RunConfig::parse("# comment\nproblem.n = 3\n\nproblem.m=17   # trailing\ncoeff.preset = holder\n"
                                    "drift.b = 1, 0.5, 0\nsolver.nested = true\n");
  CHECK(cfg.get_int("problem.n", 0) == 3);
  CHECK(cfg.get_int("problem.m", 0) == 17);
  CHECK(cfg.get("coeff.preset", "") == "holder");
  CHECK(cfg.get_list("drift.b") == std::vector<double>{1, 0.5, 0});
  CHECK(cfg.get_bool("solver.nested", false));
  CHECK(cfg.get_double("solver.tol", 0.25) == 0.25);
  CHECK_FALSE(cfg.has("solver.tol"));

  CHECK(kind_of([] { RunConfig::parse("solver.tolerance = 1\n"); }) == ErrorKind::Config);
  CHECK(kind_of([] { RunConfig::parse("problem.n\n"); }) == ErrorKind::Config);
  CHECK(kind_of([] { RunConfig::parse("problem.m = many\n").get_int("problem.m", 0); }) == ErrorKind::Config);
  CHECK(kind_of([] { RunConfig::load("/nonexistent/cfg"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_list("1,,2"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_vec("1,2", 3); }) == ErrorKind::Config);
  CHECK(parse_vec("0.5,-2", 2) == vec2(0.5, -2));
}

TEST_CASE("config validation") {
  for (const char* bad : {"problem.n = 4\n", "problem.m = 64\n", "coeff.preset = smooth\n", "bc.kind = wavy\n",
                          "analysis.kappa0 = 1.5\n", "problem.n = 2\ndrift.b = 1,0\ndrift.p = 2\n"}) {
    CAPTURE(bad);
    CHECK(kind_of([&] { RunConfig::parse(bad).validate(); }) == ErrorKind::Config);
  }
  RunConfig::parse(kNegative).validate();
}

TEST_CASE("builders turn a config into a problem") {
  auto cfg = RunConfig::parse(kNegative);
  const auto p = problem_from_config(cfg);
  CHECK(p.grid.dim() == 2);
  CHECK(p.grid.nodes_per_axis() == 33);
  CHECK(p.boundary_data(vec2(1, 0.3)) == -1.0);
  CHECK_FALSE(p.drift.has_value());
  const auto s = solver_from_config(cfg);
  CHECK(s.tol == 1e-12);
  CHECK(s.relax == 0.0);

  cfg.set("bc.kind", "exact");
  cfg.set("bc.exact", "regular32");
  const auto q = problem_from_config(cfg);
  const auto ex = exact_field(2, ExactKind::Regular32, {});
  CHECK(q.boundary_data(vec2(1, 0.4)) == doctest::Approx(ex->value(vec2(1, 0.4))));

  cfg.set("coeff.preset", "constant");
  cfg.set("coeff.matrix", "2,0.5,0.5,1");
  const auto A = coefficient_from_config(cfg);
  CHECK(A.evaluator(vec2(0.3, 0.1))(0, 1) == 0.5);

  cfg.set("drift.b", "1,0");
  cfg.set("drift.p", "8");
  REQUIRE(problem_from_config(cfg).drift.has_value());

  const auto cc = classify_from_config(RunConfig::parse("analysis.gauge_M = 0\nanalysis.r_hi = 0.3\n"), 2, 1.0);
  CHECK(cc.constants.M == 0.0);
  CHECK(cc.r_hi == 0.3);
}

TEST_CASE("JSON numbers round trip") {
  Json j;
  j["x"] = 0.1;
  j["third"] = 1.0 / 3.0;
  j["v"] = to_json(vec2(1e-300, -2.5));
  const std::string text = dump_json(j);
  const Json back = Json::parse(text);
  CHECK(back["x"].get<double>() == 0.1);
  CHECK(back["third"].get<double>() == 1.0 / 3.0);
  CHECK(back["v"][0].get<double>() == 1e-300);
  CHECK(text.find("0.1,") != std::string::npos);
}

TEST_CASE("cli: exact field then frequency") {
  REQUIRE(run("--deterministic exact regular32 --n 2 --m 65 --out e.sgf1").code == 0);
  const auto r = run("--json --deterministic frequency e.sgf1 --at 0,0");
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["kappa"].get<double>() == doctest::Approx(1.5).epsilon(0.03 / 1.5));
  CHECK(j["monotonicity"]["violations"] == 0);
}

TEST_CASE("cli: solve with negative data") {
  const std::string cfg = write_config("neg.cfg", kNegative);
  const auto r = run("--json --deterministic solve " + cfg + " --out neg");
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["solver"]["converged"] == true);
  CHECK(j["solver"]["complementarity"]["all_thin_active"] == true);
  CHECK(j["solver"]["complementarity"]["active_nodes"] == 31);
  CHECK(fs::exists(scratch() / "neg" / "field.sgf1"));
  const std::string report = slurp(scratch() / "neg" / "solve_report.json");
  CHECK(report.find("generated_at") == std::string::npos);

  // deterministic runs are byte-identical
  REQUIRE(run("--deterministic solve " + cfg + " --out neg2").code == 0);
  CHECK(Json::parse(slurp(scratch() / "neg2" / "solve_report.json"))["solver"] == Json::parse(report)["solver"]);
  REQUIRE(run("--deterministic solve " + cfg + " --out neg").code == 0);
  CHECK(slurp(scratch() / "neg" / "solve_report.json") == report);

  CHECK(run("solve " + cfg + " --out neg3").code == 0);
  CHECK(slurp(scratch() / "neg3" / "solve_report.json").find("generated_at") != std::string::npos);
}

TEST_CASE("cli: exit codes") {
  const std::string cfg = write_config("neg.cfg", kNegative);
  CHECK(run("solve missing.cfg").code == 1);
  CHECK(run("--set bogus.key=1 solve " + cfg).code == 1);
  CHECK(run("exact sideways --out x.sgf1").code == 1);
  CHECK(run("--set solver.max_iter=3 solve " + cfg + " --out short").code == 2);
  REQUIRE(run("--deterministic exact regular32 --n 2 --m 65 --out e.sgf1").code == 0);
  CHECK(run("frequency e.sgf1 --at 5,0").code == 3);
  CHECK(run("selftest").code == 0);
}
