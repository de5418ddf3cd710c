#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hotelling/cli.hpp"
#include "json.hpp"

using namespace hotelling;

namespace {

struct Run {
  int code;
  std::string out, err;
  std::vector<nlohmann::json> lines() const {
    std::vector<nlohmann::json> v;
    std::istringstream in(out);
    for (std::string l; std::getline(in, l);) v.push_back(nlohmann::json::parse(l));
    return v;
  }
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "hotelling");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("lab experiment by name") {
  auto r = run({"lab", "exp_interval_deviation", "--rho", "2"});
  REQUIRE(r.code == 0);
  auto lines = r.lines();
  REQUIRE(lines.size() == 2);
  CHECK(lines[0]["type"] == "header");
  CHECK(lines[0]["config"]["rho"] == 2.0);
  CHECK(lines[1]["pass"] == true);
  bool seen = false;
  for (const auto& c : lines[1]["checks"])
    if (c["quantity"] == "deviation_rho2") {
      seen = true;
      CHECK(c["computed"].get<double>() == 1.0);
    }
  CHECK(seen);
}

TEST_CASE("unknown experiment and unknown flags are usage errors") {
  CHECK(run({"lab", "nope"}).code == cli::kUsage);
  auto r = run({"value", "--bogus"});
  CHECK(r.code == cli::kUsage);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"value", "--gamma", "2"}).code == cli::kUsage);
}

TEST_CASE("infeasible cap exits with 2") {
  CHECK(run({"solve", "--space", "interval", "--n", "128", "--budgets", "1,2", "--p", "2", "--K", "0.01"}).code ==
        cli::kInfeasible);
}

TEST_CASE("solver non-convergence exits with 3") {
  auto r = run({"solve", "--n", "16", "--budgets", "1,2", "--max-iters", "1", "--tol", "1e-12"});
  CHECK(r.code == cli::kNotConverged);
  CHECK(r.lines().back()["converged"] == false);
}

TEST_CASE("solve on the circle reaches the constant profile") {
  auto r = run({"solve", "--space", "circle", "--n", "12", "--budgets", "1,2", "--K", "10"});
  REQUIRE(r.code == 0);
  auto res = r.lines().back();
  CHECK(res["converged"] == true);
  for (double v : res["profile"][1].get<std::vector<double>>()) CHECK(std::abs(v - 2.0) < 1e-6);
}

TEST_CASE("monte carlo output is byte-identical across runs and thread counts") {
  std::vector<std::string> args{"mc", "--space", "circle", "--n", "64", "--budgets", "1,2", "--reps", "3000", "--seed", "7"};
  auto a = run(args);
  auto b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  args.insert(args.end(), {"--threads", "3"});
  auto c = run(args), d = run(args);
  CHECK(c.out == d.out);
  CHECK(a.lines()[1] == c.lines()[1]);
}

TEST_CASE("header is self-describing") {
  auto h = run({"value", "--space", "torus", "--n", "16", "--budgets", "1,1"}).lines()[0];
  CHECK(h["version"] == HOTELLING_VERSION);
  CHECK(h["rng"].is_string());
  CHECK(h["config"]["space"] == "torus");
  CHECK(h["config"]["budgets"].size() == 2);
}

TEST_CASE("value, residual and csv output") {
  const std::string csv = "test_cli_value.csv";
  auto r = run({"value", "--space", "circle", "--n", "32", "--budgets", "1,2", "--rule", "shell", "--csv", csv});
  REQUIRE(r.code == 0);
  auto v = r.lines()[1];
  CHECK(v["total"].get<double>() == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-12));
  std::ifstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "player,budget,value");
  CHECK(row.rfind("0,1,", 0) == 0);
  std::remove(csv.c_str());

  auto res = run({"residual", "--space", "interval", "--n", "64", "--budgets", "2", "--density", "bump:0.5,0.3"});
  REQUIRE(res.code == 0);
  CHECK(res.lines()[1]["nash_residual"].get<double>() > 0.0);
  CHECK(run({"value", "--budgets", "1,2", "--density", "uniform"}).code == cli::kUsage);
}

TEST_CASE("space validate") {
  const std::string good = "test_cli_space.json", bad = "test_cli_bad.json";
  std::ofstream(good) << R"({"points": [[0],[1],[3]], "dist": [[0,1,3],[1,0,2],[3,2,0]], "weights": [1,1,1]})";
  std::ofstream(bad) << R"({"points": [[0],[1],[3]], "dist": [[0,1,5],[1,0,2],[5,2,0]], "weights": [1,1,1]})";
  auto r = run({"space", "validate", good});
  CHECK(r.code == 0);
  CHECK(r.lines()[1]["valid"] == true);
  auto b = run({"space", "validate", bad});
  CHECK(b.code == cli::kUsage);
  CHECK(b.err.find("triangle") != std::string::npos);
  CHECK(run({"value", "--space", "custom", "--space-file", good, "--budgets", "1"}).code == 0);
  std::remove(good.c_str());
  std::remove(bad.c_str());
}
