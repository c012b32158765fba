#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kcm/config.hpp"
#include "kcm/spectral.hpp"
#include "kcm/types.hpp"

namespace kcm {

/// A run finished but a stated contract (trace, Hermiticity, positivity, residual) failed.
class ContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunResult {
  std::vector<std::string> files;
  std::vector<std::string> notes;
};

/// Rough peak memory of a run in MB, used to refuse infeasible sizes before any allocation.
double estimate_memory_mb(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment and writes into cfg.out (created if missing).
RunResult run_experiment(const ExperimentConfig& cfg);

/// "0011" is a basis state; "000+001" an equal-weight superposition of basis states.
VectorXc parse_state(const std::string& text, int n_sites);

std::vector<double> linspace(double a, double b, int points);

/// Largest deviation between the boundary-(0,1) block of the all-zero QP sector, relabelled by
/// domain-wall bond and shifted by N h / 2, and single_particle_stark(N, J, h).
double stark_mapping_deviation(int n_sites, double J, double h);

/// Over every QP sector: off-diagonal part of H_eff(V) - H_eff(0), plus the spread of its diagonal
/// inside each connected component of H_eff(0).
double ising_invariance_deviation(int n_sites, double J, double h, double V);

/// Mean IPR of the middle window of a disordered ladder.
double ladder_mean_ipr(int n_sites, double J, double h, double g, int window, double disorder, std::uint64_t seed,
                       const WindowOptions& opts = {});

struct RepresentativeState {
  Eigen::Index index = 0;  // global eigen-index
  Eigen::Index support = 0;
};

/// Window eigenstate with the median 90%-weight support count (lowest index among ties).
RepresentativeState representative_eigenstate(const EigenDecomposition& dec, const FermionModel& model,
                                              Eigen::Index window);

}  // namespace kcm
