#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "sublin/cli.hpp"

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sublin");
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = sublin::cli_run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) {
  return std::string(SUBLIN_FIXTURE_DIR) + "/" + name;
}

nlohmann::json parse_without_timing(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  j.erase("elapsed_ms");
  return j;
}

}  // namespace

TEST_CASE("gap subcommand reports the restart gap in every format") {
  CliResult r = run_cli({"gap", "--matrix", fixture("ppr2cycle.mtx")});
  REQUIRE(r.code == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["params"]["subcommand"] == "gap");
  CHECK(j["params"]["n"] == 2);
  CHECK(j["params"]["class"]["rdd"] == true);
  CHECK(j["gaps"]["p1"]["value"].get<double>() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(j["gaps"]["p1"]["exact"] == true);
  CHECK(j["gaps"]["pinf"]["value"].get<double>() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(j["gaps"]["max"]["lower"].get<double>() <= j["gaps"]["max"]["upper"].get<double>());

  CliResult csv = run_cli({"gap", "--matrix", fixture("ppr2cycle.mtx"), "--output", "csv"});
  REQUIRE(csv.code == 0);
  CHECK(csv.out.rfind("p,value,lower,upper,exact\n", 0) == 0);
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 5);

  CliResult plain = run_cli({"gap", "--matrix", fixture("ppr2cycle.mtx"), "--output", "plain"});
  REQUIRE(plain.code == 0);
  CHECK(plain.out.find("gamma_1 = ") != std::string::npos);
  CHECK(plain.out.find("exact") != std::string::npos);
}

TEST_CASE("solve walk echoes the identity functional within its target") {
  CliResult r = run_cli({"solve", "--matrix", fixture("identity2.mtx"), "--b", fixture("b2.txt"),
                         "--t", fixture("t2.txt"), "--method", "walk", "--gamma", "0.5",
                         "--epsilon", "0.25"});
  REQUIRE(r.code == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["params"]["subcommand"] == "solve");
  CHECK(j["params"]["method"] == "walk");
  CHECK(j["params"]["target_kind"] == "abs_dinvb");
  // t = (1, 1), b = (3, -1): t^T x* = 2 with tolerance eps * max |b_i / d_i|.
  CHECK(j["error_target"].get<double>() == doctest::Approx(0.75));
  CHECK(std::abs(j["estimate"].get<double>() - 2.0) <= 0.75);
  CHECK(j["cost"]["n_s"].get<long long>() > 0);
  CHECK(j["cost"]["walk_steps"].get<long long>() > 0);
  CHECK(j["cost"]["push_work"].get<long long>() == 0);
}

TEST_CASE("solve push certifies its deterministic bound") {
  CliResult r = run_cli({"solve", "--matrix", fixture("ppr2cycle.mtx"), "--b", fixture("b2.txt"),
                         "--t", fixture("t2.txt"), "--method", "push", "--gamma", "0.1",
                         "--epsilon", "0.05"});
  REQUIRE(r.code == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  // x* = (2.2, 1.4) / 0.36 so t^T x* = 10.
  const double est = j["estimate"].get<double>();
  const double bound = j["error_target"].get<double>();
  CHECK(bound <= 0.05 * 2.0 + 1e-12);
  CHECK(std::abs(est - 10.0) <= bound);
  CHECK(j["cost"]["push_work"].get<long long>() > 0);
  CHECK(j["cost"]["n_s"].get<long long>() == 0);
  CHECK(j["params"]["L"].get<int>() >= 1);
  CHECK(j["params"]["r_max"].get<double>() > 0.0);
}

TEST_CASE("solve without --gamma falls back to the dense gap oracle") {
  CliResult r = run_cli({"solve", "--matrix", fixture("ppr2cycle.mtx"), "--b", fixture("b2.txt"),
                         "--t", fixture("t2.txt"), "--method", "push", "--epsilon", "0.05"});
  REQUIRE(r.code == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  // The restart gap of the 2-cycle at alpha = 0.2 is exactly 0.1.
  CHECK(j["params"]["gamma"].get<double>() == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(std::abs(j["estimate"].get<double>() - 10.0) <= j["error_target"].get<double>());
  const std::string warning = j["params"]["warning"].get<std::string>();
  CHECK(warning.find("dense oracle") != std::string::npos);
}

TEST_CASE("solve bidirectional estimates stay within the absolute target") {
  for (const std::string method : {"bidi_hoeffding", "bidi_variance"}) {
    CliResult r = run_cli({"solve", "--matrix", fixture("ppr2cycle.mtx"), "--b",
                           fixture("b2.txt"), "--t", fixture("t2.txt"), "--method", method,
                           "--gamma", "0.1", "--epsilon", "0.5"});
    REQUIRE(r.code == 0);
    nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["estimate"].get<double>() - 10.0) <= 0.5);
    CHECK(j["params"]["method"] == method);
  }
}

TEST_CASE("reports are reproducible for a fixed seed and argv") {
  const std::vector<std::string> args = {
      "solve",  "--matrix", fixture("ppr2cycle.mtx"), "--b",       fixture("b2.txt"), "--t",
      fixture("t2.txt"),    "--method", "walk",       "--gamma",   "0.1",
      "--epsilon",          "0.4",      "--seed",     "42"};
  CliResult a = run_cli(args);
  CliResult b = run_cli(args);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(parse_without_timing(a.out).dump() == parse_without_timing(b.out).dump());
  nlohmann::json j = parse_without_timing(a.out);
  CHECK(j["seed"].get<std::uint64_t>() == 42);

  CliResult c = run_cli({"solve", "--matrix", fixture("ppr2cycle.mtx"), "--b", fixture("b2.txt"),
                         "--t", fixture("t2.txt"), "--method", "walk", "--gamma", "0.1",
                         "--epsilon", "0.4", "--seed", "43"});
  REQUIRE(c.code == 0);
  CHECK(parse_without_timing(c.out)["seed"].get<std::uint64_t>() == 43);
}

TEST_CASE("SUBLIN_SEED environment variable overrides the flag") {
  setenv("SUBLIN_SEED", "99", 1);
  CliResult r = run_cli({"solve", "--matrix", fixture("identity2.mtx"), "--b", fixture("b2.txt"),
                         "--t", fixture("t2.txt"), "--method", "walk", "--gamma", "0.5",
                         "--epsilon", "0.3", "--seed", "5"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["seed"].get<std::uint64_t>() == 99);

  setenv("SUBLIN_SEED", "not-a-number", 1);
  CliResult bad = run_cli({"solve", "--matrix", fixture("identity2.mtx"), "--b",
                           fixture("b2.txt"), "--t", fixture("t2.txt"), "--method", "walk",
                           "--gamma", "0.5", "--epsilon", "0.3"});
  unsetenv("SUBLIN_SEED");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("SUBLIN_SEED") != std::string::npos);
}

TEST_CASE("csv and plain formats carry the documented fields") {
  const std::vector<std::string> base = {
      "solve", "--matrix", fixture("identity2.mtx"), "--b", fixture("b2.txt"),
      "--t",   fixture("t2.txt"),  "--method", "walk", "--gamma", "0.5"};

  std::vector<std::string> csv_args = base;
  csv_args.push_back("--output");
  csv_args.push_back("csv");
  CliResult csv = run_cli(csv_args);
  REQUIRE(csv.code == 0);
  CHECK(csv.out.rfind("subcommand,method,estimate,error_target,gamma,epsilon,alpha,L,r_max,n_s,"
                      "walk_steps,push_work,seed,elapsed_ms\n",
                      0) == 0);
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 2);
  CHECK(csv.out.find("solve,walk,") != std::string::npos);

  std::vector<std::string> plain_args = base;
  plain_args.push_back("--output");
  plain_args.push_back("plain");
  CliResult plain = run_cli(plain_args);
  REQUIRE(plain.code == 0);
  CHECK(plain.out.find("estimate = ") != std::string::npos);
  CHECK(plain.out.find("seed = ") != std::string::npos);
}

TEST_CASE("pagerank subcommand matches the dense oracle on the two-cycle") {
  CliResult r = run_cli({"pagerank", "--graph", fixture("cycle2.txt"), "--target", "0", "--alpha",
                         "0.2", "--mode", "eulerian", "--epsilon", "0.2"});
  REQUIRE(r.code == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["params"]["alpha"].get<double>() == doctest::Approx(0.2));
  CHECK(std::abs(j["estimate"].get<double>() - 0.5) <= 0.2 * 0.5);

  CliResult g = run_cli({"pagerank", "--graph", fixture("digraph6.txt"), "--target", "2",
                         "--mode", "generic", "--epsilon", "0.5", "--alpha", "0.2", "--trials",
                         "5"});
  REQUIRE(g.code == 0);
  nlohmann::json gj = nlohmann::json::parse(g.out);
  CHECK(gj["params"]["target_kind"] == "abs_dinvb");
  CHECK(gj["error_target"].get<double>() == doctest::Approx(0.5 * 0.2));
  CHECK(gj["trials"]["count"] == 5);
  CHECK(gj["trials"]["successes"].get<int>() >= 4);
  CHECK(gj["trials"]["oracle"].get<double>() > 0.0);
}

TEST_CASE("effres subcommand recovers the path resistance") {
  CliResult r = run_cli({"effres", "--graph", fixture("path4.txt"), "--s", "0", "--t", "3",
                         "--method", "push", "--epsilon", "0.1"});
  REQUIRE(r.code == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["estimate"].get<double>() - 3.0) <= 0.2);
  CHECK(j["params"]["method"] == "push");
  CHECK(j["params"]["relative"] == false);
  CHECK(j["error_target"].get<double>() == doctest::Approx(0.1));

  CliResult d = run_cli({"effres", "--graph", fixture("k4.txt"), "--s", "0", "--t", "1",
                         "--method", "dense"});
  REQUIRE(d.code == 0);
  CHECK(nlohmann::json::parse(d.out)["estimate"].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("trials report the observed success rate against the oracle") {
  CliResult r = run_cli({"solve", "--matrix", fixture("identity2.mtx"), "--b", fixture("b2.txt"),
                         "--t", fixture("t2.txt"), "--method", "walk", "--gamma", "0.5",
                         "--epsilon", "0.25", "--trials", "10"});
  REQUIRE(r.code == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["trials"]["count"] == 10);
  CHECK(j["trials"]["oracle"].get<double>() == doctest::Approx(2.0));
  CHECK(j["trials"]["tolerance"].get<double>() == doctest::Approx(0.75));
  CHECK(j["trials"]["successes"].get<int>() >= 8);
  const double rate = j["trials"]["success_rate"].get<double>();
  CHECK(rate == doctest::Approx(j["trials"]["successes"].get<double>() / 10.0));
}

TEST_CASE("audit subcommand passes on the shipped fixtures") {
  CliResult r = run_cli({"audit", "--fixtures", std::string(SUBLIN_FIXTURE_DIR)});
  REQUIRE(r.code == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["failed"] == 0);
  CHECK(j["passed"].get<int>() >= 12);
  for (const auto& check : j["checks"]) {
    CHECK(check["pass"] == true);
  }
}

TEST_CASE("exit codes distinguish usage errors from failures") {
  CliResult help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("solve") != std::string::npos);

  CliResult none = run_cli({});
  CHECK(none.code == 2);

  CliResult unknown = run_cli({"solve", "--bogus-flag"});
  CHECK(unknown.code == 2);
  CHECK(!unknown.err.empty());

  CliResult missing = run_cli({"gap", "--matrix", fixture("does_not_exist.mtx")});
  CHECK(missing.code == 2);
  CHECK(!missing.err.empty());

  CliResult badmode = run_cli({"pagerank", "--graph", fixture("cycle2.txt"), "--target", "0",
                               "--mode", "nonsense"});
  CHECK(badmode.code == 2);

  // Estimators surface their own argument validation through exit 2 as well.
  CliResult badgamma = run_cli({"solve", "--matrix", fixture("identity2.mtx"), "--b",
                                fixture("b2.txt"), "--t", fixture("t2.txt"), "--method", "walk",
                                "--gamma", "7.0"});
  CHECK(badgamma.code == 2);
  CHECK(!badgamma.err.empty());
}

TEST_CASE("threads flag is accepted and echoed") {
  CliResult r = run_cli({"solve", "--matrix", fixture("identity2.mtx"), "--b", fixture("b2.txt"),
                         "--t", fixture("t2.txt"), "--method", "walk", "--gamma", "0.5",
                         "--threads", "4"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["params"]["threads"] == 4);
}
