#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kcm/types.hpp"

namespace kcm {

/// Per-trajectory seed: SplitMix64 applied to master + (index + 1) * 0x9E3779B97F4A7C15.
/// Each trajectory then owns an independent std::mt19937_64 stream, so an ensemble is
/// reproducible for a given master seed regardless of how it is split across threads.
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

struct NoiseTrajectory {
  std::uint64_t seed = 0;
  double dt = 0.0;
  int steps = 0;
  std::vector<double> times;   // recorded times, t = 0 first
  std::vector<VectorXc> path;  // state at each recorded time
  double max_norm_error = 0.0;
};

struct NoiseModel {
  MatrixXc H;
  std::vector<MatrixXc> jumps;
  double gamma = 0.0;

  NoiseModel(const SparseOperator& h, const std::vector<SparseOperator>& l, double g);
};

/// Advances psi over one step with exp(-i [H dt + sum_j sqrt(gamma dt) w_j L_j]).
VectorXc noise_step(const NoiseModel& model, const VectorXc& psi, double dt, const std::vector<double>& w);

/// Records the state every `record_every` steps (and at T). T must be a whole number of steps.
NoiseTrajectory sample_trajectory(const NoiseModel& model, const VectorXc& psi0, double dt, double T,
                                  std::uint64_t seed, int record_every = 1);

/// (1/M) sum_m |psi_m(t_k)><psi_m(t_k)| at recorded index k; all paths must share the grid.
MatrixXc average_density(const std::vector<NoiseTrajectory>& ensemble, std::size_t time_index);

struct EnsembleOptions {
  double dt = 1e-3;
  double T = 1.0;
  std::size_t trajectories = 1000;
  std::uint64_t master_seed = 1;
  unsigned threads = 1;
  int record_every = 1;
  /// First trajectory index, so disjoint ensembles can share one master seed.
  std::uint64_t first_index = 0;
};

struct EnsembleAverage {
  std::vector<double> times;
  std::vector<MatrixXc> rho;
  std::size_t trajectories = 0;
  double max_norm_error = 0.0;
  std::vector<std::string> warnings;
};

/// Streams trajectories and accumulates their projectors without storing paths.
/// Sums run over fixed blocks of 64 trajectories combined in index order, so the
/// result is bitwise identical for any thread count.
EnsembleAverage ensemble_average(const NoiseModel& model, const VectorXc& psi0, const EnsembleOptions& opts);

/// E_w[U (x) U^*] for one step, by tensor Gauss-Hermite quadrature over the jump noises.
/// With `order` nodes per jump this is exact for the Gaussian average up to quadrature error.
MatrixXc mean_step_superoperator(const NoiseModel& model, double dt, int order = 12);

/// ||(E[step])^{T/dt} rho0 - exp(L T) rho0||_tr: the systematic bias of the discretization.
double step_bias(const NoiseModel& model, const MatrixXc& rho0, double dt, double T, int order = 12);

/// Nodes and weights for E[f(w)], w ~ N(0, 1) (probabilists' Hermite, Golub-Welsch).
void gauss_hermite(int order, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

}  // namespace kcm
