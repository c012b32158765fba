#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kcm/config.hpp"
#include "kcm/experiments.hpp"

using namespace kcm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kcm_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig small(const std::string& experiment, const fs::path& out) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.out = out.string();
  return c;
}

void check_headers(const RunResult& res, const ExperimentConfig& cfg) {
  REQUIRE_FALSE(res.files.empty());
  const std::string hash = config_hash(cfg);
  for (const auto& f : res.files) {
    INFO(f);
    const std::string text = slurp(f);
    REQUIRE_FALSE(text.empty());
    CHECK(text.find(hash) != std::string::npos);
    CHECK(text.find("seed") != std::string::npos);
    if (fs::path(f).extension() == ".csv") CHECK(text.front() == '#');
    if (fs::path(f).extension() == ".json") CHECK_NOTHROW((void)nlohmann::json::parse(text));
  }
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(KCM_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config round trip") {
  ExperimentConfig c;
  c.experiment = "ipr-scan";
  c.n_sites = 12;
  c.h = 0.1 + 0.2;
  c.gamma = 1.0 / 3.0;
  c.jumps = "QQ";
  c.bulk_fields = false;
  c.starts = {"0001", "0010"};
  c.h_values = {0.5, 1.0 / 7.0};
  c.n_values = {40, 60};
  c.gammas = {100, 1000};
  c.seed = 18446744073709551615ULL;
  c.out = "some/dir";
  CHECK(parse_config(serialize(c)) == c);
  CHECK(config_hash(c) == config_hash(parse_config(serialize(c))));
  CHECK(config_hash(c).size() == 16);
  ExperimentConfig d = c;
  d.h = 0.3;
  CHECK(config_hash(c) != config_hash(d));
}

TEST_CASE("sections and globals") {
  const std::string text =
      "N = 5   # global\n"
      "gamma = 20\n"
      "[noise-check]\n"
      "N = 2\n"
      "[ipr-scan]\n"
      "g = 1.5\n";
  const ExperimentConfig a = parse_config(text, "noise-check");
  CHECK(a.experiment == "noise-check");
  CHECK(a.n_sites == 2);
  CHECK(a.gamma == 20.0);
  const ExperimentConfig b = parse_config(text, "ipr-scan");
  CHECK(b.n_sites == 5);
  CHECK(b.g == 1.5);
  CHECK(parse_config(text).experiment == "noise-check");
  CHECK_THROWS_AS(parse_config("bogus = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("N = x\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("N 5\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("jumps = XY\n"), std::invalid_argument);
}

TEST_CASE("state parsing") {
  const VectorXc s = parse_state("000+001", 3);
  CHECK(std::abs(s(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(s(4) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(s.norm() == doctest::Approx(1.0));
  CHECK_THROWS(parse_state("0001", 3));
  CHECK(linspace(0.0, 1.0, 3) == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("infeasible sizes are refused with the estimate") {
  ExperimentConfig c = small("gksl-evolve", scratch("refuse"));
  c.n_sites = 12;
  c.memory_cap_mb = 100;
  try {
    run_experiment(c);
    FAIL("expected refusal");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("MB") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(c.out));
  c.experiment = "nonsense";
  CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
}

TEST_CASE("every experiment runs at small size with stamped outputs") {
  struct Case {
    std::string name;
    std::vector<std::pair<std::string, std::string>> set;
  };
  const std::vector<Case> cases = {
      {"gksl-evolve", {{"N", "4"}, {"h", "1"}, {"t_max", "1"}, {"t_points", "5"}, {"initial", "0011"}}},
      {"noise-check", {{"N", "2"}, {"gamma", "2"}, {"dt", "0.01"}, {"t_max", "0.1"}, {"trajectories", "64"}, {"repeats", "2"}}},
      {"sector-census", {{"N", "6"}}},
      {"sector-graph", {{"N", "8"}}},
      {"effective-verify", {{"n_values", "4,5"}}},
      {"fermion-dynamics", {{"N", "12"}, {"h", "1.5"}, {"initial", "4,8"}, {"t_max", "2"}, {"t_points", "5"}}},
      {"ipr-scan", {{"N", "8"}, {"g", "1.5"}, {"h_values", "1,3"}, {"window", "10"}}},
      {"ipr-scaling", {{"g", "1.5"}, {"n_values", "8,10,12"}, {"window", "10"}}},
      {"heatmap", {{"N", "10"}, {"g", "1.5"}, {"h", "3"}, {"window", "10"}}},
      {"perturb-report", {{"N", "3"}}},
  };
  for (const auto& tc : cases) {
    INFO(tc.name);
    ExperimentConfig c = small(tc.name, scratch(tc.name));
    for (const auto& [k, v] : tc.set) set_value(c, k, v);
    const RunResult res = run_experiment(c);
    check_headers(res, c);
  }
}

TEST_CASE("identical configs reproduce identical bytes") {
  for (const std::string name : {"gksl-evolve", "noise-check"}) {
    std::vector<std::string> contents;
    for (int rep = 0; rep < 2; ++rep) {
      ExperimentConfig c = small(name, scratch("repro"));
      c.n_sites = name == "noise-check" ? 2 : 4;
      c.t_max = 0.1;
      c.t_points = 3;
      c.dt = 0.01;
      c.gamma = name == "noise-check" ? 2.0 : 50.0;
      c.trajectories = 64;
      c.repeats = 1;
      std::string all;
      for (const auto& f : run_experiment(c).files) all += slurp(f);
      contents.push_back(all);
    }
    CHECK(contents[0] == contents[1]);
  }
}

TEST_CASE("command-line exit codes") {
  const fs::path out = scratch("exit");
  CHECK(run_cli("--experiment sector-graph --set N=8 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "sector-graph.json"));
  CHECK(run_cli("--experiment sector-graph --set N=8 --set bogus=1 --out " + out.string()) == 2);
  CHECK(run_cli("--experiment gksl-evolve --set N=14 --set memory_cap_mb=10 --out " + out.string()) == 2);
  CHECK(run_cli("--experiment no-such-thing") != 0);
  CHECK(run_cli("") == 2);
  const fs::path cfg = out / "run.cfg";
  std::ofstream(cfg) << "[sector-census]\nN = 5\n";
  CHECK(run_cli("--config " + cfg.string() + " --seed 9 --out " + out.string()) == 0);
  CHECK(run_cli("--config " + (out / "missing.cfg").string()) == 2);
}
