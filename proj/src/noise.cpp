#include "kcm/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "kcm/liouville.hpp"
#include "kcm/spin_ops.hpp"

namespace kcm {

namespace {

constexpr std::size_t kBlock = 64;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

int step_count(double dt, double T) {
  if (dt <= 0.0 || T < 0.0) throw std::invalid_argument("noise: dt must be positive and T non-negative");
  const double n = T / dt;
  const auto steps = static_cast<int>(std::llround(n));
  if (std::abs(n - steps) > 1e-9 * std::max(1.0, n)) {
    throw std::invalid_argument("noise: T is not a whole number of dt steps");
  }
  return steps;
}

MatrixXc step_unitary(const NoiseModel& model, double dt, const std::vector<double>& w) {
  MatrixXc G = model.H * dt;
  const double amp = std::sqrt(model.gamma * dt);
  for (std::size_t j = 0; j < model.jumps.size(); ++j) G += (amp * w[j]) * model.jumps[j];
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(G);
  VectorXc phases(G.rows());
  for (Eigen::Index k = 0; k < G.rows(); ++k) phases(k) = std::exp(cplx{0.0, -es.eigenvalues()(k)});
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(master_seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

NoiseModel::NoiseModel(const SparseOperator& h, const std::vector<SparseOperator>& l, double g) : H(h), gamma(g) {
  if (H.rows() != H.cols()) throw std::invalid_argument("noise: H must be square");
  if (g < 0.0) throw std::invalid_argument("noise: gamma must be non-negative");
  if (!is_hermitian(h)) throw std::invalid_argument("noise: H is not Hermitian");
  for (std::size_t j = 0; j < l.size(); ++j) {
    if (l[j].rows() != H.rows() || l[j].cols() != H.cols()) {
      throw std::invalid_argument("noise: jump " + std::to_string(j + 1) + " dimension mismatch");
    }
    if (!is_hermitian(l[j])) throw std::invalid_argument("noise: jump " + std::to_string(j + 1) + " is not Hermitian");
    jumps.emplace_back(l[j]);
  }
}

VectorXc noise_step(const NoiseModel& model, const VectorXc& psi, double dt, const std::vector<double>& w) {
  if (w.size() != model.jumps.size()) throw std::invalid_argument("noise_step: one increment per jump required");
  MatrixXc G = model.H * dt;
  const double amp = std::sqrt(model.gamma * dt);
  for (std::size_t j = 0; j < model.jumps.size(); ++j) G += (amp * w[j]) * model.jumps[j];
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(G);
  VectorXc c = es.eigenvectors().adjoint() * psi;
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(cplx{0.0, -es.eigenvalues()(k)});
  return es.eigenvectors() * c;
}

namespace {

template <int Dim>
void run_steps(const NoiseModel& model, const VectorXc& psi0, NoiseTrajectory& traj, int record_every) {
  using Mat = Eigen::Matrix<cplx, Dim, Dim>;
  using Vec = Eigen::Matrix<cplx, Dim, 1>;
  const Mat Hdt = model.H * traj.dt;
  std::vector<Mat> jumps;
  for (const auto& L : model.jumps) jumps.emplace_back(L);
  const double amp = std::sqrt(model.gamma * traj.dt);
  std::mt19937_64 rng(traj.seed);
  std::normal_distribution<double> normal;
  Vec psi = psi0;
  const double norm0 = psi0.norm();
  Eigen::SelfAdjointEigenSolver<Mat> es(Hdt.rows());
  for (int s = 1; s <= traj.steps; ++s) {
    Mat G = Hdt;
    for (const auto& L : jumps) G += (amp * normal(rng)) * L;
    es.compute(G);
    Vec c = es.eigenvectors().adjoint() * psi;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(cplx{0.0, -es.eigenvalues()(k)});
    psi = es.eigenvectors() * c;
    traj.max_norm_error = std::max(traj.max_norm_error, std::abs(psi.norm() - norm0));
    if (s % record_every == 0 || s == traj.steps) {
      traj.times.push_back(s * traj.dt);
      traj.path.emplace_back(psi);
    }
  }
}

}  // namespace

NoiseTrajectory sample_trajectory(const NoiseModel& model, const VectorXc& psi0, double dt, double T,
                                  std::uint64_t seed, int record_every) {
  if (psi0.size() != model.H.rows()) throw std::invalid_argument("sample_trajectory: psi0 dimension mismatch");
  if (record_every < 1) throw std::invalid_argument("sample_trajectory: record_every must be >= 1");
  NoiseTrajectory traj;
  traj.seed = seed;
  traj.dt = dt;
  traj.steps = step_count(dt, T);
  traj.times.push_back(0.0);
  traj.path.push_back(psi0);
  switch (psi0.size()) {
    case 2: run_steps<2>(model, psi0, traj, record_every); break;
    case 4: run_steps<4>(model, psi0, traj, record_every); break;
    case 8: run_steps<8>(model, psi0, traj, record_every); break;
    default: run_steps<Eigen::Dynamic>(model, psi0, traj, record_every); break;
  }
  return traj;
}

MatrixXc average_density(const std::vector<NoiseTrajectory>& ensemble, std::size_t time_index) {
  if (ensemble.empty()) throw std::invalid_argument("average_density: empty ensemble");
  const auto& grid = ensemble.front().times;
  if (time_index >= grid.size()) throw std::out_of_range("average_density: time index out of range");
  const Eigen::Index d = ensemble.front().path.front().size();
  MatrixXc rho = MatrixXc::Zero(d, d);
  for (const auto& traj : ensemble) {
    if (traj.times != grid) throw std::invalid_argument("average_density: trajectories have different time grids");
    const auto& psi = traj.path[time_index];
    rho += psi * psi.adjoint();
  }
  rho /= static_cast<double>(ensemble.size());
  return rho;
}

EnsembleAverage ensemble_average(const NoiseModel& model, const VectorXc& psi0, const EnsembleOptions& opts) {
  if (opts.trajectories == 0) throw std::invalid_argument("ensemble_average: need at least one trajectory");
  const int steps = step_count(opts.dt, opts.T);
  std::vector<double> times{0.0};
  for (int s = 1; s <= steps; ++s) {
    if (s % opts.record_every == 0 || s == steps) times.push_back(s * opts.dt);
  }
  const Eigen::Index d = psi0.size();
  const std::size_t n_blocks = (opts.trajectories + kBlock - 1) / kBlock;
  std::vector<std::vector<MatrixXc>> block_sums(n_blocks);
  std::vector<double> block_norm_error(n_blocks, 0.0);

  auto run_block = [&](std::size_t b) {
    std::vector<MatrixXc> acc(times.size(), MatrixXc::Zero(d, d));
    double worst = 0.0;
    const std::size_t end = std::min(opts.trajectories, (b + 1) * kBlock);
    for (std::size_t m = b * kBlock; m < end; ++m) {
      const auto seed = trajectory_seed(opts.master_seed, opts.first_index + m);
      const NoiseTrajectory traj = sample_trajectory(model, psi0, opts.dt, opts.T, seed, opts.record_every);
      for (std::size_t k = 0; k < times.size(); ++k) acc[k] += traj.path[k] * traj.path[k].adjoint();
      worst = std::max(worst, traj.max_norm_error);
    }
    block_sums[b] = std::move(acc);
    block_norm_error[b] = worst;
  };

  const unsigned workers = std::max(1U, std::min<unsigned>(opts.threads, static_cast<unsigned>(n_blocks)));
  if (workers == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t b = w; b < n_blocks; b += workers) run_block(b);
      });
    }
    for (auto& t : pool) t.join();
  }

  EnsembleAverage out;
  out.times = times;
  out.trajectories = opts.trajectories;
  out.rho.assign(times.size(), MatrixXc::Zero(d, d));
  for (std::size_t b = 0; b < n_blocks; ++b) {
    for (std::size_t k = 0; k < times.size(); ++k) out.rho[k] += block_sums[b][k];
    out.max_norm_error = std::max(out.max_norm_error, block_norm_error[b]);
  }
  for (auto& r : out.rho) r /= static_cast<double>(opts.trajectories);

  if (opts.dt * model.gamma > 0.1) {
    std::ostringstream os;
    os << "dt*gamma = " << opts.dt * model.gamma << " exceeds 0.1";
    if (d <= 16) {
      const MatrixXc rho0 = psi0 * psi0.adjoint();
      os << "; estimated bias at T: " << step_bias(model, rho0, opts.dt, opts.T);
    }
    out.warnings.push_back(os.str());
  }
  return out;
}

void gauss_hermite(int order, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) jac(k, k - 1) = jac(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  nodes = es.eigenvalues();
  weights = es.eigenvectors().row(0).transpose().cwiseAbs2();
}

MatrixXc mean_step_superoperator(const NoiseModel& model, double dt, int order) {
  Eigen::VectorXd x;
  Eigen::VectorXd wts;
  gauss_hermite(order, x, wts);
  const std::size_t n_jumps = model.jumps.size();
  const Eigen::Index d = model.H.rows();
  MatrixXc avg = MatrixXc::Zero(d * d, d * d);
  std::vector<int> digit(n_jumps, 0);
  std::vector<double> w(n_jumps);
  while (true) {
    double weight = 1.0;
    for (std::size_t j = 0; j < n_jumps; ++j) {
      w[j] = x(digit[j]);
      weight *= wts(digit[j]);
    }
    const MatrixXc U = step_unitary(model, dt, w);
    const MatrixXc Uc = U.conjugate();
    // rho -> U rho U^dag in the s*D + t layout is U (x) U^*.
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = 0; b < d; ++b) avg.block(a * d, b * d, d, d) += (weight * U(a, b)) * Uc;
    }
    std::size_t j = 0;
    while (j < n_jumps && ++digit[j] == order) digit[j++] = 0;
    if (j == n_jumps) break;
  }
  return avg;
}

double step_bias(const NoiseModel& model, const MatrixXc& rho0, double dt, double T, int order) {
  const int steps = step_count(dt, T);
  const MatrixXc step = mean_step_superoperator(model, dt, order);
  VectorXc v = vectorize(rho0).data;
  for (int s = 0; s < steps; ++s) v = step * v;

  std::vector<SparseOperator> jumps;
  for (const auto& L : model.jumps) jumps.emplace_back(L.sparseView());
  const Liouvillian L = build_liouvillian(SparseOperator(model.H.sparseView()), jumps, model.gamma);
  const MatrixXc prop = (MatrixXc(L.total) * T).exp();
  const VectorXc exact = prop * vectorize(rho0).data;
  return trace_distance(devectorize(v), devectorize(exact));
}

}  // namespace kcm
