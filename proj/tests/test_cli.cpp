#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
  const char* p = std::getenv("PSROLAB_CLI");
  REQUIRE_MESSAGE(p != nullptr, "PSROLAB_CLI must point at the CLI binary");
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("psrolab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  const std::string why = "missing file: " + path.string();
  REQUIRE_MESSAGE(in.good(), why);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("an empty job list succeeds and writes a manifest") {
  fs::path dir = fresh_dir("empty");
  fs::path cfg = dir / "config.json";
  write_json(cfg, {{"schema_version", 1}, {"seed", 1}, {"jobs", json::array()}});
  CHECK(run_cli("run " + cfg.string() + " --out " +
                (dir / "out").string()) == 0);
  json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["jobs"].size() == 0);
}

TEST_CASE("unknown config keys are rejected") {
  fs::path dir = fresh_dir("unknown");
  fs::path cfg = dir / "config.json";
  write_json(cfg, {{"schema_version", 1},
                   {"seed", 1},
                   {"jobs", json::array()},
                   {"typo_key", true}});
  CHECK(run_cli("run " + cfg.string() + " --out " +
                (dir / "out").string()) != 0);
}

TEST_CASE("identical configs produce byte-identical CSV outputs") {
  fs::path dir = fresh_dir("determinism");
  json cfg = {
      {"schema_version", 1},
      {"seed", 42},
      {"jobs",
       json::array(
           {{{"name", "g"},
             {"type", "forge"},
             {"target", {{"kind", "nash"}}},
             {"n", 12},
             {"s", 1}},
            {{"name", "run"},
             {"type", "psro"},
             {"game", {{"from_job", "g"}}},
             {"solver", {{"from_job", "g"}, {"use", "shortcut"}}},
             {"max_iters", 10}}})}};
  fs::path cfg_path = dir / "config.json";
  write_json(cfg_path, cfg);
  REQUIRE(run_cli("run " + cfg_path.string() + " --out " +
                  (dir / "a").string()) == 0);
  REQUIRE(run_cli("run " + cfg_path.string() + " --out " +
                  (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "run.csv") == slurp(dir / "b" / "run.csv"));
  CHECK(slurp(dir / "a" / "g.csv") == slurp(dir / "b" / "g.csv"));
  CHECK(slurp(dir / "a" / "g.game.json") == slurp(dir / "b" / "g.game.json"));
}

TEST_CASE("one failing job does not stop the rest") {
  fs::path dir = fresh_dir("partial");
  json cfg = {
      {"schema_version", 1},
      {"seed", 3},
      {"jobs",
       json::array(
           {{{"name", "bad"},
             {"type", "psro"},
             {"game", (dir / "missing.game.json").string()},
             {"solver", {{"kind", "nash"}}},
             {"max_iters", 5}},
            {{"name", "good"},
             {"type", "psro"},
             {"game",
              {{"kind", "gaussian-skew"}, {"n", 6}, {"seed", 5}}},
             {"solver", {{"kind", "nash"}}},
             {"max_iters", 10}}})}};
  fs::path cfg_path = dir / "config.json";
  write_json(cfg_path, cfg);
  CHECK(run_cli("run " + cfg_path.string() + " --out " +
                (dir / "out").string()) == 1);
  CHECK(fs::exists(dir / "out" / "good.csv"));
  json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
  bool saw_fail = false, saw_ok = false;
  for (const auto& j : manifest["jobs"]) {
    if (j["name"] == "bad") saw_fail = j["status"] != "ok";
    if (j["name"] == "good") saw_ok = j["status"] == "ok";
  }
  CHECK(saw_fail);
  CHECK(saw_ok);
}

TEST_CASE("compare aggregates trajectories by label") {
  fs::path dir = fresh_dir("compare");
  json cfg = {
      {"schema_version", 1},
      {"seed", 11},
      {"jobs",
       json::array(
           {{{"name", "a"},
             {"type", "psro"},
             {"game", {{"kind", "gaussian-skew"}, {"n", 8}, {"seed", 2}}},
             {"solver", {{"kind", "nash"}}},
             {"max_iters", 10}},
            {{"name", "b"},
             {"type", "psro"},
             {"game", {{"kind", "gaussian-skew"}, {"n", 8}, {"seed", 4}}},
             {"solver", {{"kind", "nash"}}},
             {"max_iters", 10}}})}};
  fs::path cfg_path = dir / "config.json";
  write_json(cfg_path, cfg);
  REQUIRE(run_cli("run " + cfg_path.string() + " --out " +
                  (dir / "out").string()) == 0);
  fs::path agg = dir / "agg.csv";
  REQUIRE(run_cli("compare " + (dir / "out").string() + " --out " +
                  agg.string()) == 0);
  std::ifstream in(agg);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "method,iter,mean_pe,std_pe,count");
  int rows = 0;
  while (std::getline(in, line)) {
    // std_pe (4th column) must parse as a nonnegative double.
    std::size_t pos = 0;
    for (int c = 0; c < 3; ++c) pos = line.find(',', pos) + 1;
    const double sd = std::stod(line.substr(pos));
    CHECK(sd >= 0.0);
    ++rows;
  }
  CHECK(rows >= 2);
}
