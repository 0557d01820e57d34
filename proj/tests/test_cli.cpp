// End-to-end checks of the command-line surface: formats, exit codes,
// round-trips. The binary path arrives via the PROXENT_CLI environment
// variable set by CTest.
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "proxent/averages.hpp"

using nlohmann::json;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
};

std::string cli_path() {
  const char* p = std::getenv("PROXENT_CLI");
  REQUIRE_MESSAGE(p != nullptr, "PROXENT_CLI must point at the binary");
  return p;
}

RunResult run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    out.append(buf.data(), got);
  }
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, std::move(out)};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& body) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("eval emits the documented rows") {
  const auto r = run("eval --family proximal --param 0 --which f --grid 1,1,1");
  CHECK(r.exit_code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"x", "value", "parameter",
                                            "family"});
  CHECK(rows[1] == std::vector<std::string>{"1", "-1", "0", "proximal"});

  const auto lim = run(
      "eval --family weighted --param 1 --limiting --which fstar_prime "
      "--grid=-1,-1,1");
  CHECK(lim.exit_code == 0);
  const auto lrows = parse_csv(lim.out);
  REQUIRE(lrows.size() == 2);
  CHECK(lrows[1] ==
        std::vector<std::string>{"-1", "0", "1", "weighted"});
}

TEST_CASE("eval emits the literal inf for infinite values") {
  const auto r =
      run("eval --family proximal --param 0 --which f --grid=-2,-2,1");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find(",inf,") != std::string::npos);
}

TEST_CASE("eval values cross-match library calls bit-exactly") {
  const auto r = run(
      "eval --family proximal --param 0.5 --which fstar --grid=-3,4,15");
  REQUIRE(r.exit_code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 16);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double x = std::strtod(rows[i][0].c_str(), nullptr);
    const double v = std::strtod(rows[i][1].c_str(), nullptr);
    CHECK(v == proxent::averages::f_lambda_star(x, 0.5));
  }
}

TEST_CASE("parameter sweeps are ordered by parameter value") {
  const auto r = run(
      "eval --family proximal --param 0.75,0.25,0.5 --which fstar "
      "--grid 0,1,2");
  REQUIRE(r.exit_code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 7);
  CHECK(rows[1][2] == "0.25");
  CHECK(rows[3][2] == "0.5");
  CHECK(rows[5][2] == "0.75");
}

TEST_CASE("bad arguments exit with code 2") {
  CHECK(run("eval --no-such-flag").exit_code == 2);
  CHECK(run("eval --param 1.5 --grid 0,1,2").exit_code == 2);
  CHECK(run("nonsense").exit_code == 2);
  CHECK(run("--format csv solve --param 0.25,0.5").exit_code == 2);
}

TEST_CASE("solve reports the linear case in at most two iterations") {
  const auto r = run("solve --param 1 --shift 0.6 --tol 1e-12");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["converged"].get<bool>());
  CHECK(j["iterations"].get<int>() <= 2);
  CHECK(j["residual_norm"].get<double>() <= 1e-12);
  CHECK(j["residual_history"].size() ==
        static_cast<std::size_t>(j["iterations"].get<int>()) + 1);
}

TEST_CASE("solve preset example1 converges for the weighted base case") {
  const auto r = run("solve --preset example1 --family weighted --param 0");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["shift"].get<double>() == 0.6);
  CHECK(j["converged"].get<bool>());
  CHECK(j["residual_norm"].get<double>() <= 1e-8);
}

TEST_CASE("strict mode exits 3 on non-convergence") {
  const auto relaxed =
      run("solve --param 0.5 --method grad-dual --iters 5 --tol 1e-12");
  CHECK(relaxed.exit_code == 0);
  const auto strict = run(
      "solve --param 0.5 --method grad-dual --iters 5 --tol 1e-12 --strict");
  CHECK(strict.exit_code == 3);
}

TEST_CASE("csv solve output is the primal curve") {
  const auto r = run(
      "--format csv solve --param 0.5 --preset example1 --samples 11");
  REQUIRE(r.exit_code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 12);
  CHECK(rows[0] == std::vector<std::string>{"s", "x_of_s"});
  CHECK(std::strtod(rows[1][0].c_str(), nullptr) == 0.0);
  CHECK(std::strtod(rows[11][0].c_str(), nullptr) == 1.0);
  // curve should sit near the generating function 0.6 + sin(3 pi s^2)/2
  const double mid = std::strtod(rows[6][1].c_str(), nullptr);
  CHECK(std::abs(mid - (0.6 + 0.5 * std::sin(3.0 * M_PI * 0.25))) <= 0.2);
}

TEST_CASE("emitted results round-trip as warm starts") {
  const std::string path = "/tmp/proxent_roundtrip.json";
  const auto first =
      run("--out " + path + " solve --param 0.5 --preset example2");
  REQUIRE(first.exit_code == 0);
  std::ifstream in(path);
  REQUIRE(in.good());
  json stored;
  in >> stored;

  const auto again = run("solve --param 0.5 --preset example2 --start " +
                         path + " --iters 1");
  REQUIRE(again.exit_code == 0);
  const json j = json::parse(again.out);
  // the warm start reproduces its own residual norm on re-evaluation
  CHECK(j["residual_history"][0].get<double>() ==
        stored["residual_norm"].get<double>());
  std::remove(path.c_str());
}

TEST_CASE("homotopy degenerate schedule repeats the base solution") {
  const auto r = run(
      "homotopy --param 0.5 --delta 0 --stages 2 --budgets 4 "
      "--method grad-dual --step 1");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["completed"].get<bool>());
  REQUIRE(j["stages"].size() == 3);
  const double base = j["stages"][0]["residual_norm"].get<double>();
  for (std::size_t k = 1; k < 3; ++k) {
    CHECK(j["stages"][k]["residual_norm"].get<double>() <= base + 1e-12);
    CHECK(j["stages"][k]["shift"].get<double>() == 0.0);
  }
}

TEST_CASE("homotopy table layout") {
  const auto r = run("table --preset example5-dual");
  REQUIRE(r.exit_code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] ==
        std::vector<std::string>{"parameter", "100", "1100", "2100"});
  CHECK(rows[1][0] == "0");
  CHECK(rows[5][0] == "1");
  // residuals shrink with budget on the final row
  const double a = std::strtod(rows[5][1].c_str(), nullptr);
  const double c = std::strtod(rows[5][3].c_str(), nullptr);
  CHECK(c < a);
}

TEST_CASE("feasibility reports and the singular exit code") {
  const auto r = run("feasibility --shift 0.35,0.05");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j.is_array());
  CHECK(j[0]["classification"] == "feasible-certificate");
  CHECK(j[1]["classification"] == "indeterminate");
  CHECK(j[1]["orthant_distance"].get<double>() > 0.0);

  // a large monomial system is numerically singular
  const auto sing = run("feasibility --shift 0.35 --moments 64");
  CHECK(sing.exit_code == 4);
}

TEST_CASE("config file supplies defaults, flags override") {
  const std::string path = "/tmp/proxent_cfg.ini";
  {
    std::ofstream cfg(path);
    cfg << "family=weighted\nparam=0.25\nshift=0.35\n";
  }
  const auto r = run("solve --config " + path);
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["family"] == "weighted");
  CHECK(j["parameter"].get<double>() == 0.25);
  CHECK(j["shift"].get<double>() == 0.35);

  const auto over = run("solve --config " + path + " --param 0.75");
  REQUIRE(over.exit_code == 0);
  const json j2 = json::parse(over.out);
  CHECK(j2["parameter"].get<double>() == 0.75);
  std::remove(path.c_str());
}

TEST_CASE("scalar backend override produces the same results") {
  const auto a = run("--simd scalar solve --param 1 --shift 0.6");
  const auto b = run("solve --param 1 --shift 0.6");
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  const json ja = json::parse(a.out), jb = json::parse(b.out);
  CHECK(std::abs(ja["residual_norm"].get<double>() -
                 jb["residual_norm"].get<double>()) <= 1e-12);
}

TEST_SUITE_END();
