#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kcm/config.hpp"
#include "kcm/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dissipation-induced constrained dynamics: experiment runner"};
  std::string config_path;
  std::string experiment;
  std::string out;
  int threads = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
  bool print_only = false;
  app.add_option("--config", config_path, "config file (key = value, [experiment] sections)");
  app.add_option("--experiment", experiment, "experiment name")->check(CLI::IsMember(kcm::experiment_names()));
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides config)");
  app.add_option("--set", overrides, "extra key=value assignment, repeatable");
  app.add_flag("--print-config", print_only, "print the resolved config and exit");
  CLI11_PARSE(app, argc, argv);

  try {
    kcm::ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = kcm::load_config(config_path, experiment);
    } else if (!experiment.empty()) {
      cfg.experiment = experiment;
    } else {
      std::cerr << "error: give --config or --experiment\n";
      return 2;
    }
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
      kcm::set_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!out.empty()) cfg.out = out;
    if (threads > 0) cfg.threads = threads;
    if (*seed_opt) cfg.seed = seed;

    if (print_only) {
      std::cout << kcm::serialize(cfg);
      return 0;
    }
    const kcm::RunResult res = kcm::run_experiment(cfg);
    for (const auto& f : res.files) std::cout << "wrote " << f << '\n';
    for (const auto& n : res.notes) std::cout << "note: " << n << '\n';
    return 0;
  } catch (const kcm::ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
