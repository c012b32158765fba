#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kcm/quasiparticle.hpp"
#include "kcm/types.hpp"

namespace kcm {

/// Eigenpairs of a real symmetric matrix, ascending. A window decomposition holds the pairs
/// with global indices offset .. offset + size() - 1 of the full spectrum.
struct EigenDecomposition {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  Eigen::Index offset = 0;
  Eigen::Index full_dim = 0;
  double max_residual = 0.0;
  double orthogonality_error = 0.0;
  std::string method;

  [[nodiscard]] Eigen::Index size() const { return values.size(); }
  [[nodiscard]] bool complete() const { return offset == 0 && values.size() == full_dim; }
  [[nodiscard]] bool holds(Eigen::Index global) const { return global >= offset && global < offset + size(); }
};

/// Full dense diagonalization.
EigenDecomposition diagonalize(const SparseReal& H);

/// [first, first + count) with first = floor(D/2) - floor(count/2).
std::pair<Eigen::Index, Eigen::Index> middle_window_range(Eigen::Index dim, Eigen::Index count);

struct WindowOptions {
  /// Matrices up to this size are diagonalized densely and sliced.
  Eigen::Index dense_limit = 1600;
  double tol = 1e-9;
  std::uint64_t seed = 1;
};

/// The `count` eigenpairs at the middle of the spectrum. Above the dense limit: shift-invert
/// Lanczos with full reorthogonalization around a shift located by inertia bisection; the number
/// of eigenvalues found is confirmed by Sylvester inertia counts on both sides.
EigenDecomposition middle_window(const SparseReal& H, Eigen::Index count, const WindowOptions& opts = {});

/// Number of eigenvalues below sigma, from the inertia of an LDL^T factorization of H - sigma.
Eigen::Index count_below(const SparseReal& H, double sigma);

/// sum_F |<F|state>|^4; throws if |norm - 1| > tol.
double ipr(const Eigen::VectorXd& state, double tol = 1e-8);
double ipr(const VectorXc& state, double tol = 1e-8);

struct IprReport {
  std::vector<double> values;
  Eigen::Index first = 0;  // global index of values[0]
  double mean = 0.0;
};

IprReport mean_ipr_window(const EigenDecomposition& dec, Eigen::Index window);

struct OverlapRow {
  double energy = 0.0;
  double overlap = 0.0;  // |<F|phi_n>|^2
  double ipr = 0.0;
};

std::vector<OverlapRow> overlap_spectrum(Eigen::Index initial, const EigenDecomposition& dec);

struct OccupationTable {
  std::vector<double> times;
  Eigen::MatrixXd occupation;  // rows: times, columns: FermionModel::occupation_columns()
  double max_number_drift = 0.0;
};

/// psi(t) = sum_n exp(-i E_n t) <phi_n|psi0> phi_n and <n_mu(t)> on every mode.
OccupationTable evolve_state(const EigenDecomposition& dec, const FermionModel& model, const VectorXc& psi0,
                             const std::vector<double>& times);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square misfit in log space
};

/// Least squares log(y) = m log(x) + c.
ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& points);

/// |amplitude|^2 of eigenstate `n` (global index) on the (mu_1, mu_2) grid, row mu_1 - 1.
Eigen::MatrixXd eigenstate_heatmap(const EigenDecomposition& dec, const FermionModel& model, Eigen::Index n);

/// Fewest cells whose weights add up to at least `fraction` of the total.
Eigen::Index support_count(const Eigen::MatrixXd& weights, double fraction = 0.9);

}  // namespace kcm
