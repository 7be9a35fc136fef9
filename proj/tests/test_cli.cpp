#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "platelab/cli.hpp"
#include "platelab/config.hpp"

using namespace platelab;

namespace {

std::string data(const std::string& name) { return std::string(PLATELAB_TEST_DATA) + "/" + name; }

std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run_cli({"--help"}) == 0);
  CHECK(run_cli(std::vector<std::string>{}) == 1);
  CHECK(run_cli({"classify", "--out", tmp("cli_a.csv")}) == 1);  // no crack
  CHECK(run_cli({"classify", "--crack", data("absent.txt"), "--out", tmp("cli_a.csv")}) == 1);
  CHECK(run_cli({"recover", "--set", "colour=blue", "--out", tmp("cli_a.csv")}) == 1);
  CHECK(run_cli({"recover", "--rho", "0.01,0.1", "--out", tmp("cli_a.csv")}) == 1);
  CHECK(run_cli({"sweep", "--out", tmp("cli_a.csv")}) == 1);  // --experiment missing
  CHECK(run_cli({"minimize", "--config", data("bar.cfg"), "--set", "linear_solver=cg", "--set",
                 "cg_max_iter=1", "--out", tmp("cli_a.csv")}) == 2);
}

TEST_CASE("seeded runs are reproducible") {
  const std::vector<std::string> base = {"classify", "--crack", data("vertical.txt"), "--h", "0.0625",
                                         "--seed", "4"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", tmp("cli_seed_a.csv")});
  b.insert(b.end(), {"--out", tmp("cli_seed_b.csv")});
  REQUIRE(run_cli(a) == 0);
  REQUIRE(run_cli(b) == 0);
  CHECK(slurp(tmp("cli_seed_a.csv")) == slurp(tmp("cli_seed_b.csv")));
  CHECK(slurp(tmp("cli_seed_a.csv")).rfind("sample,", 0) == 0);
}

TEST_CASE("config files and overrides") {
  const std::string out = tmp("cli_bar.csv");
  REQUIRE(run_cli({"minimize", "--config", data("bar.cfg"), "--out", out}) == 0);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("stage,round,rho,bulk,surface,penalty,total", 0) == 0);
  CHECK(csv.find("limit") != std::string::npos);

  const std::string bad = tmp("cli_bad.cfg");
  std::ofstream(bad) << "cells = 8\nlayers = four\n";
  try {
    load_config(bad);
    FAIL("expected an exception");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("cli_bad.cfg:2") != std::string::npos);
  }
}

TEST_CASE("settings") {
  ExperimentConfig c;
  apply_setting(c, "n", "3");
  CHECK(c.cells.size() == 2);
  apply_setting(c, "rho", "0.1, 0.01");
  CHECK(c.rho.size() == 2);
  CHECK_THROWS_AS(apply_setting(c, "nonsense", "1"), std::invalid_argument);
  c.h = {0.1, 0.03};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.h = {0.1, 0.025};
  CHECK_NOTHROW(c.validate());
  CHECK(substream_seed(1, "classify") != substream_seed(1, "jump-energy"));
  CHECK(substream_seed(1, "classify") == substream_seed(1, "classify"));
  CHECK_THROWS_AS(make_state("spiral:1", 2, BoxGrid(1, {4, 1, 1}, Vec3::Zero(), Vec3(1, 0, 0))),
                  std::invalid_argument);
}
