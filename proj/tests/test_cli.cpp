#include <catch_amalgamated.hpp>
#include <refless/io.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace refless;
using Catch::Approx;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI from the configs directory and captures stdout.
Run cli(const std::string& args) {
  const std::string cmd = "cd \"" REFLESS_CONFIGS "\" && \"" REFLESS_CLI "\" " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "refless_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("capacity of [-2,2] is one") {
  auto r = cli("capacity --set band_m2_2.json");
  CHECK(r.code == 0);
  CHECK(std::stod(r.out) == Approx(1.0).margin(1e-12));
}

TEST_CASE("xi of the free Jacobi operator is one half on the band") {
  const auto path = scratch("xi.csv");
  auto r = cli("xi --op free_jacobi.json --grid -1.9:1.9:101 --out " + path.string());
  CHECK(r.code == 0);
  auto rows = csv_rows(slurp(path));
  REQUIRE(rows.size() == 102);
  CHECK(rows[0] == std::vector<std::string>{"x", "xi", "decided"});
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][1]) == Approx(0.5).margin(1e-6));
}

TEST_CASE("certify writes a PASS report and the density table") {
  const auto report = scratch("report.json"), csv = scratch("density.csv");
  auto r = cli("certify --op free_jacobi.json --set band_m2_2.json --out " + report.string() + " --csv " + csv.string());
  CHECK(r.code == 0);
  CHECK(r.out.rfind("verdict PASS", 0) == 0);
  const auto j = Json::parse(slurp(report));
  CHECK(j["report"]["verdict"] == "PASS");
  CHECK(parse_run_config(j["config"]).command == "certify");
  bool centre = false;
  for (const auto& row : csv_rows(slurp(csv)))
    if (row[0] == "0") {
      centre = true;
      CHECK(std::stod(row[1]) == Approx(1.0 / (2.0 * pi)).epsilon(1e-8));
    }
  CHECK(centre);

  auto imp = cli("certify --op impurity_jacobi.json --set band_m2_2.json");
  CHECK(imp.code == 1);
  CHECK(imp.out.find("FAIL") != std::string::npos);
}

TEST_CASE("outputs are byte-identical across runs") {
  const auto a = scratch("a.json"), b = scratch("b.json");
  cli("certify --op period2_jacobi.json --set period2_bands.json --seed 3 --out " + a.string());
  cli("certify --op period2_jacobi.json --set period2_bands.json --seed 3 --out " + b.string());
  auto ja = Json::parse(slurp(a)), jb = Json::parse(slurp(b));
  CHECK(ja["config"]["out"] != jb["config"]["out"]);
  ja["config"].erase("out");
  jb["config"].erase("out");
  CHECK(ja.dump() == jb.dump());
  const auto c = scratch("c.csv"), d = scratch("d.csv");
  cli("multiplicity --op free_cmv.json --grid 0:6:13 --out " + c.string());
  cli("multiplicity --op free_cmv.json --grid 0:6:13 --out " + d.string());
  CHECK(slurp(c) == slurp(d));
}

TEST_CASE("emitted config drives an identical rerun") {
  const auto first = scratch("first.json");
  cli("certify --op free_schrodinger.json --set half_line.json --out " + first.string());
  auto j = Json::parse(slurp(first));
  const auto rc = parse_run_config(j["config"]);
  CHECK(parse_run_config(Json::parse(to_json(rc).dump())) == rc);
  const auto second = scratch("second.json");
  j["config"]["out"] = second.string();
  const auto cfg = scratch("rerun.json");
  std::ofstream(cfg) << j["config"].dump();
  auto r = cli("--config " + cfg.string());
  CHECK(r.code == 0);
  CHECK(Json::parse(slurp(second))["report"] == j["report"]);
}

TEST_CASE("configuration problems exit with code 2") {
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("capacity --set missing.json").code == 2);
  CHECK(cli("capacity --set '{\"bands\": [[2, 1]]}'").code == 2);
  CHECK(cli("xi --op '{\"type\": \"dirac\"}' --grid 0:1:3").code == 2);
  CHECK(cli("xi --op free_jacobi.json --grid 0:1").code == 2);
  CHECK(cli("xi --op '{\"type\": \"jacobi\", \"bogus\": 1}' --grid 0:1:3").code == 2);
  CHECK(cli("xi --op free_jacobi.json --grid 0:1:3 --out /nonexistent-dir/x.csv").code == 2);
}

TEST_CASE("other subcommands") {
  auto g = cli("green --set band_m2_2.json --grid 3:3:1");
  CHECK(g.code == 0);
  CHECK(std::stod(csv_rows(g.out).at(1).at(1)) == Approx(0.962424).margin(1e-6));
  CHECK(cli("blaschke --set band_m2_2.json --power 4 --count 60").out.find("CONVERGED") != std::string::npos);
  auto slow = cli("blaschke --set band_m2_2.json --power 2 --count 60");
  CHECK(slow.out.find("DIVERGENT") != std::string::npos);
  CHECK(slow.code == 1);
  CHECK(cli("reflect --op free_jacobi.json --set band_m2_2.json").code == 0);
  CHECK(cli("reflect --op square_well.json --set half_line.json").code == 1);
  auto mb = cli("massbalance --measure arcsine_measure.json --set band_m2_2.json");
  CHECK(mb.code == 0);
  CHECK(std::stod(mb.out) < 1e-6);
  auto mf = cli("mfun --op free_schrodinger.json --grid 4:4:1");
  CHECK(std::stod(csv_rows(mf.out).at(1).at(2)) == Approx(2.0).epsilon(1e-8));
  CHECK(cli("homog --set full_circle.json").out == "2\n");
}
