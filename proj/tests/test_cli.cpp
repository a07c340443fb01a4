#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qgs/emit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("qgs_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + QGS_BIN + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("cli: scan writes CSV and JSON") {
  Sandbox box;
  const std::string small = "--steps 3 --pairs '0,0;5,1' --n_max 8";
  REQUIRE(run("scan " + small + " --out " + box.path("a.csv")) == 0);
  const std::string csv = slurp(box.path("a.csv"));
  CHECK(csv.rfind(std::string(qgs::kCsvHeader) + "\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);

  REQUIRE(run("scan " + small + " --format json --out " + box.path("a.json")) == 0);
  const json j = json::parse(slurp(box.path("a.json")));
  CHECK(j.at("rows").size() == 6);
  CHECK(j.at("metadata").at("config").at("steps") == 3);
}

TEST_CASE("cli: flags override the config file") {
  Sandbox box;
  write(box.path("c.json"), R"({"steps": 3, "pairs": [[1, 1]], "n_max": 4, "output_path": ")" + box.path("o.csv") + "\"}");
  REQUIRE(run("scan --config " + box.path("c.json")) == 0);
  std::string csv = slurp(box.path("o.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  REQUIRE(run("scan --config " + box.path("c.json") + " --steps 5") == 0);
  csv = slurp(box.path("o.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("cli: configuration errors exit 2") {
  Sandbox box;
  write(box.path("bad.json"), R"({"stepz": 3})");
  CHECK(run("scan --config " + box.path("bad.json")) == 2);
  CHECK(run("scan --config " + box.path("missing.json")) == 2);
  write(box.path("broken.json"), "{");
  CHECK(run("scan --config " + box.path("broken.json")) == 2);
  CHECK(run("scan --steps 1") == 2);
  CHECK(run("scan --pairs 20,0") == 2);
  CHECK(run("scan --no-such-flag 1") == 2);
  CHECK(run("") == 2);
  CHECK(run("fit-g2 --target 2.5") == 2);
  CHECK(run("scan --steps 3 --out /nonexistent-dir/x.csv") == 2);
  CHECK(run("scan --steps 3", "QGS_WORKERS=zero") == 2);
}

TEST_CASE("cli: numerical failure exits 3") {
  CHECK(run("fit-g2 --pairs 0,0 --n_max 2 --hard_cap 2") == 3);
}

TEST_CASE("cli: fit-g2 reports both paths") {
  Sandbox box;
  const std::string out = box.path("fit.json");
  REQUIRE(std::system((std::string(QGS_BIN) + " fit-g2 --target 1.7 > " + out).c_str()) == 0);
  const json j = json::parse(slurp(out));
  CHECK(std::abs(j.at("classical_g2_pnd").get<double>() - 1.7) < 1e-3);
  CHECK(std::abs(j.at("classical_g2_gaussian").get<double>() - 1.7) < 1e-3);
}

TEST_CASE("cli: pnd dump") {
  Sandbox box;
  REQUIRE(run("pnd --separation 1.5 --n_max 6 --pairs 1,1 --out " + box.path("p.csv")) == 0);
  const std::string csv = slurp(box.path("p.csv"));
  CHECK(csv.rfind("N,M,p\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 1 + 7 * 7);
}

TEST_CASE("cli: validate verdicts") {
  Sandbox box;
  const std::string report = box.path("v.json");
  CHECK(run("validate --samples 200000 --report " + report) == 0);
  const json ok = json::parse(slurp(report));
  CHECK(ok.at("pass") == true);
  CHECK(ok.at("points").size() == 3);
  CHECK(run("validate --samples 200000 --perturb-cell 1,1,0.01 --report " + report) == 1);
  CHECK(json::parse(slurp(report)).at("pass") == false);
  CHECK(run("validate --samples 200000 --perturb-cell 1,1 --report " + report) == 2);
}

TEST_CASE("cli: output independent of worker count") {
  Sandbox box;
  const std::string args = "scan --steps 7 --pairs '0,0;8,1' --n_max 8 --out ";
  REQUIRE(run(args + box.path("w1.csv"), "QGS_WORKERS=1") == 0);
  REQUIRE(run(args + box.path("w3.csv"), "QGS_WORKERS=3") == 0);
  REQUIRE(run(args + box.path("f2.csv") + " --workers 2", "QGS_WORKERS=1") == 0);
  CHECK(slurp(box.path("w1.csv")) == slurp(box.path("w3.csv")));
  CHECK(slurp(box.path("w1.csv")) == slurp(box.path("f2.csv")));
}
