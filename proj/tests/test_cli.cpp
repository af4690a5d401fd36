#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "conclab/measure.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace conclab;

namespace {

const std::string kCli = CONCLAB_CLI_PATH;
const fs::path kSource = CONCLAB_SOURCE_DIR;

int run(const std::string& args) {
  std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return json::parse(in);
}

// Structural conformance mirroring docs/summary.schema.json.
void check_schema(const json& j) {
  for (const char* key : {"command", "seed", "pass", "checks", "metrics", "metadata"})
    REQUIRE(j.contains(key));
  CHECK(j["command"].is_string());
  CHECK(j["seed"].is_number_integer());
  CHECK(j["pass"].is_boolean());
  REQUIRE(j["checks"].is_array());
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("name"));
    CHECK(c.contains("pass"));
    CHECK(c["name"].is_string());
    CHECK(c["pass"].is_boolean());
  }
  REQUIRE(j["metrics"].is_object());
  for (const auto& [k, v] : j["metrics"].items()) CHECK(v.is_number());
  REQUIRE(j["metadata"].is_object());
  CHECK(j["metadata"].contains("timestamp"));
  CHECK(j["metadata"].contains("threads"));
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string s() const { return path.string(); }
};

std::string strip_timestamp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("timestamp") == std::string::npos) out << line << "\n";
  return out.str();
}

void write_two_atom(const fs::path& p, double x0, double x1) {
  std::ofstream out(p);
  out << "x1,weight\n" << x0 << ",0.5\n" << x1 << ",0.5\n";
}

}  // namespace

TEST_CASE("schema file is shipped and well formed") {
  json schema = read_json(kSource / "docs" / "summary.schema.json");
  CHECK(schema.contains("required"));
  CHECK(schema["properties"].contains("checks"));
}

TEST_CASE("transport subcommand reproduces the two-atom example") {
  TempDir d("conclab_cli_transport");
  write_two_atom(d.path / "a.csv", 0, 1);
  write_two_atom(d.path / "b.csv", 0, 2);
  int rc = run("transport " + (d.path / "a.csv").string() + " " + (d.path / "b.csv").string() +
               " --cost quadratic --plan " + (d.path / "plan.csv").string() + " -o " + d.s());
  CHECK(rc == 0);
  json j = read_json(d.path / "summary.json");
  check_schema(j);
  CHECK(j["metrics"]["cost"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(j["metrics"]["plan_nnz"].get<double>() >= 2);
  // plan CSV exists with the mandatory header
  std::ifstream plan(d.path / "plan.csv");
  std::string header;
  std::getline(plan, header);
  CHECK(header == "i,j,mass");
}

TEST_CASE("malformed cost string exits 2; missing file exits 3") {
  TempDir d("conclab_cli_errors");
  write_two_atom(d.path / "a.csv", 0, 1);
  CHECK(run("transport " + (d.path / "a.csv").string() + " " + (d.path / "a.csv").string() +
            " --cost cubic -o " + d.s()) == 2);
  CHECK(run("transport " + (d.path / "a.csv").string() + " " + (d.path / "nope.csv").string() +
            " -o " + d.s()) == 3);
  CHECK(run("definitely-not-a-subcommand") == 2);
}

TEST_CASE("sanov-check default battery passes") {
  TempDir d("conclab_cli_sanov");
  CHECK(run("sanov-check -o " + d.s()) == 0);
  json j = read_json(d.path / "summary.json");
  check_schema(j);
  CHECK(j["pass"].get<bool>());
  CHECK(j["metrics"]["worst_slack"].get<double>() >= -1e-12);
}

TEST_CASE("rate subcommand writes a curve and diagnostics") {
  TempDir d("conclab_cli_rate");
  write_two_atom(d.path / "mu.csv", 0, 1);
  int rc = run("rate --measure " + (d.path / "mu.csv").string() +
               " --cost power:p=1 --root --t-grid 0.1:0.3:0.1 --method both --oracle-res 2e-3 -o " +
               d.s());
  CHECK(rc == 0);
  json j = read_json(d.path / "summary.json");
  check_schema(j);
  CHECK(j["pass"].get<bool>());
  std::ifstream curve(d.path / "curve.csv");
  std::string header;
  std::getline(curve, header);
  CHECK(header == "t,rate,gap_to_oracle");
  CHECK(fs::exists(d.path / "plot_rate.dat"));
}

TEST_CASE("concentrate subcommand emits the profile csv") {
  TempDir d("conclab_cli_conc");
  write_two_atom(d.path / "mu.csv", 0, 1);
  int rc = run("concentrate --measure " + (d.path / "mu.csv").string() +
               " --n 8 --family random --trials 20 --r-grid 0.5:3:0.5 -o " + d.s());
  CHECK(rc == 0);
  json j = read_json(d.path / "summary.json");
  check_schema(j);
  CHECK(j["metrics"]["violations"].get<double>() == 0);
  std::ifstream prof(d.path / "profile.csv");
  std::string header;
  std::getline(prof, header);
  CHECK(header == "r,observed,guaranteed,ci_low,ci_high");
}

TEST_CASE("dual-check finds no violation at a conservative scale") {
  TempDir d("conclab_cli_dual");
  {
    std::ofstream out(d.path / "mu.csv");
    out << "x1,weight\n0,0.3\n0.7,0.3\n1.5,0.2\n2.4,0.2\n";
  }
  int rc = run("dual-check --measure " + (d.path / "mu.csv").string() +
               " --cost quadratic --scale 0.02 --count 200 -o " + d.s());
  CHECK(rc == 0);
  json j = read_json(d.path / "summary.json");
  check_schema(j);
  CHECK(j["metrics"]["worst_bg_ratio"].get<double>() <= 1 + 1e-9);
}

TEST_CASE("deterministic rerun produces identical outputs modulo timestamp") {
  TempDir d1("conclab_cli_det1");
  TempDir d2("conclab_cli_det2");
  write_two_atom(d1.path / "mu.csv", 0, 1);
  fs::copy_file(d1.path / "mu.csv", d2.path / "mu.csv");
  std::string args = " --n 8 --family random --trials 10 --r-grid 0.5:2:0.5 --seed 99 -o ";
  CHECK(run("concentrate --measure " + (d1.path / "mu.csv").string() + args + d1.s()) == 0);
  CHECK(run("concentrate --measure " + (d2.path / "mu.csv").string() + args + d2.s()) == 0);
  CHECK(strip_timestamp(d1.path / "summary.json") == strip_timestamp(d2.path / "summary.json"));
  // profile CSVs are byte-identical
  std::ifstream p1(d1.path / "profile.csv"), p2(d2.path / "profile.csv");
  std::stringstream s1, s2;
  s1 << p1.rdbuf();
  s2 << p2.rdbuf();
  CHECK(s1.str() == s2.str());
}

TEST_CASE("equivalence and two-level subcommands run end to end") {
  TempDir d("conclab_cli_eq");
  write_two_atom(d.path / "mu.csv", 0, 1);
  int rc = run("equivalence --measure " + (d.path / "mu.csv").string() +
               " --direction both --n-list 20,40 --trials 20000 -o " + d.s());
  CHECK(rc == 0);
  json j = read_json(d.path / "summary.json");
  check_schema(j);
  CHECK(j["pass"].get<bool>());
  CHECK(fs::exists(d.path / "plot_a_fit.dat"));

  TempDir d2("conclab_cli_twolevel");
  write_two_atom(d2.path / "mu.csv", 0, 1);
  rc = run("two-level --measure " + (d2.path / "mu.csv").string() +
           " --p 1 --n 8 --trials 50 -o " + d2.s());
  CHECK(rc == 0);
  json j2 = read_json(d2.path / "summary.json");
  check_schema(j2);
  CHECK(j2["pass"].get<bool>());
  // p outside [1,2] is a configuration error
  CHECK(run("two-level --measure " + (d2.path / "mu.csv").string() + " --p 3 --n 8 -o " +
            d2.s()) == 2);
}

TEST_CASE("report consolidates runs and flags failures") {
  TempDir d("conclab_cli_report");
  // empty dir list: empty report, exit 0
  CHECK(run("report -o " + d.s()) == 0);
  CHECK(fs::exists(d.path / "report.md"));

  // one passing run
  TempDir r1("conclab_cli_run1");
  CHECK(run("sanov-check -o " + r1.s()) == 0);
  CHECK(run("report " + r1.s() + " -o " + d.s()) == 0);

  // a fabricated failing run flips the exit code
  TempDir r2("conclab_cli_run2");
  {
    std::ofstream out(r2.path / "summary.json");
    out << R"({"command":"rate","seed":1,"pass":false,)"
        << R"("checks":[{"name":"rate-monotone","pass":false}],)"
        << R"("metrics":{},"metadata":{"timestamp":"x","threads":1}})";
  }
  CHECK(run("report " + r1.s() + " " + r2.s() + " -o " + d.s()) == 1);
  // missing summary -> input missing
  TempDir r3("conclab_cli_run3");
  CHECK(run("report " + r3.s() + " -o " + d.s()) == 3);
}

TEST_CASE("config file values are honored and flags override") {
  TempDir d("conclab_cli_config");
  write_two_atom(d.path / "mu.csv", 0, 1);
  {
    std::ofstream out(d.path / "exp.conf");
    out << "measure = " << (d.path / "mu.csv").string() << "\n";
    out << "n = 8\nfamily = random\ntrials = 10\nr-grid = 0.5:2:0.5\n";
    out << "output-dir = " << d.s() << "\n";
  }
  CHECK(run("concentrate --config " + (d.path / "exp.conf").string()) == 0);
  CHECK(fs::exists(d.path / "summary.json"));
}
