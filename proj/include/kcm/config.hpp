#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kcm {

/// One experiment run. Text form is flat `key = value` lines; keys before any `[section]`
/// apply to every experiment, keys under `[name]` only to experiment `name`.
struct ExperimentConfig {
  std::string experiment = "gksl-evolve";
  int n_sites = 6;
  double J = 1.0;
  double h = 0.0;
  double V = 0.0;
  double g = 0.0;
  double gamma = 1000.0;
  std::string jumps = "QP";
  bool bulk_fields = true;
  std::string initial;                   // bitstring, or "mu,nu" for fermion-dynamics
  std::vector<std::string> starts;       // sector-graph start states
  double t_max = 10.0;
  int t_points = 101;
  double dt = 1e-3;
  int trajectories = 1000;
  int repeats = 10;
  int window = 60;
  double disorder = 1e-4;
  int realizations = 1;
  std::vector<double> h_values;
  std::vector<int> n_values;
  std::vector<double> gammas;
  std::string ordering = "wedge";
  std::uint64_t seed = 1;
  double memory_cap_mb = 4096.0;
  std::string out = "out";
  int threads = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

const std::vector<std::string>& experiment_names();

/// Canonical text: a single `[experiment]` section listing every key in a fixed order.
std::string serialize(const ExperimentConfig& cfg);

/// Reads config text for `experiment` (empty: the first section, or the global keys alone).
/// Unknown keys and malformed values throw std::invalid_argument naming the line.
ExperimentConfig parse_config(const std::string& text, const std::string& experiment = "");
ExperimentConfig load_config(const std::string& path, const std::string& experiment = "");

/// Applies one `key=value` assignment.
void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// FNV-1a 64-bit hash of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace kcm
