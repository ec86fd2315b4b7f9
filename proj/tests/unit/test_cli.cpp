#include <doctest.h>

#include <sys/wait.h>

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(CFP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cfp_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("run, export and byte-stable outputs") {
  TempDir tmp;
  const fs::path sc = tmp.path / "head_on.json";
  std::ofstream(sc) << R"({"start":{"position":[0,0,0],"velocity":[1,0,0]},"goal":[4,0,0],
    "obstacles":[{"points":[[1.5,0.3,0]],"b":[0,0,1]}],"dt":0.001,"horizon":1.0})";
  REQUIRE(run("run --scenario " + sc.string() + " --mode cf --out " + (tmp.path / "a").string()) == 0);
  REQUIRE(run("run --scenario " + sc.string() + " --mode cf --out " + (tmp.path / "b").string()) == 0);
  const std::string csv = slurp(tmp.path / "a" / "trajectory.csv");
  CHECK(csv == slurp(tmp.path / "b" / "trajectory.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 1001);
  const auto m = nlohmann::json::parse(slurp(tmp.path / "a" / "metrics.json"));
  CHECK(m.contains("length_m"));

  REQUIRE(run("export --name u-trap --out " + (tmp.path / "u.json").string()) == 0);
  CHECK(run("compare-apf --scenario " + (tmp.path / "u.json").string() + " --out " + (tmp.path / "cmp").string()) == 0);
  const auto cmp = nlohmann::json::parse(slurp(tmp.path / "cmp" / "compare.json"));
  CHECK(cmp.dump().find("Stalled") != std::string::npos);
}

TEST_CASE("exit codes") {
  TempDir tmp;
  CHECK(run("run --scenario /nonexistent.json") == 2);
  CHECK(run("run") == 2);
  CHECK(run("verify --claims no_such_claim") == 2);
  const fs::path bad = tmp.path / "bad.json";
  std::ofstream(bad) << R"({"start":{"position":[0,0,0],"velocity":[1,0,0]},"goal":[1,0,0],"bogus":1})";
  CHECK(run("run --scenario " + bad.string()) == 2);

  // weak gain head-on: the discrete path runs into the point
  const fs::path hit = tmp.path / "hit.json";
  std::ofstream(hit) << R"({"start":{"position":[0,0,0],"velocity":[1,0,0]},"goal":[5,0,0],
    "obstacles":[{"points":[[0.5,0,0]],"b":[0,0,1]}],"params":{"k_cf":0.001,"d_max":2.0,"d_min":1e-4},
    "dt":0.001,"horizon":1.0})";
  CHECK(run("run --scenario " + hit.string() + " --mode cf --out " + (tmp.path / "r").string()) == 3);

  CHECK(run("verify --claims rs_ratio_bound --n 1000 --out " + (tmp.path / "v.json").string()) == 0);
  const auto v = nlohmann::json::parse(slurp(tmp.path / "v.json"));
  CHECK(v["all_passed"] == true);

  CHECK(run("phase --grid -5:5:0.5 --out " + (tmp.path / "p.csv").string()) == 0);
  CHECK(slurp(tmp.path / "p.csv").find("\n0,1,1,0,0\n") != std::string::npos);
}
