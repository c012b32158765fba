#pragma once

#include <string>
#include <vector>

#include "kcm/types.hpp"

namespace kcm {

/// Density matrix in the doubled space, |rho>> = sum rho_{s t} |s> (x) |t>^*.
///
/// Components are stored raw (index s * D + t) so the flow stays linear and
/// trace preserving; the Frobenius normalization is only reported.
struct DoubledVector {
  VectorXc data;
  Eigen::Index hilbert_dim = 0;

  [[nodiscard]] double normalization() const { return data.norm(); }
};

DoubledVector vectorize(const MatrixXc& rho, double hermiticity_tol = 1e-10);
MatrixXc devectorize(const DoubledVector& v);
MatrixXc devectorize(const VectorXc& v);

struct Liouvillian {
  SparseOperator unitary;      // -i (H (x) I - I (x) H^T)
  SparseOperator dissipative;  // (gamma/2) sum_j (2 L (x) L^* - L^dag L (x) I - I (x) L^T L^*)
  SparseOperator total;
  double gamma = 0.0;
  Eigen::Index hilbert_dim = 0;
  /// Magnitude below which an eigenvalue counts as zero: 1e-10 times the larger of gamma and ||H||_inf.
  double zero_threshold = 0.0;
};

/// Assembles the GKSL generator for Hermitian jumps with a uniform rate gamma >= 0.
Liouvillian build_liouvillian(const SparseOperator& H, const std::vector<SparseOperator>& jumps, double gamma);

/// Applies L(rho) = -i[H, rho] + gamma sum_j (L rho L^dag - {L^dag L, rho}/2) directly on a matrix.
MatrixXc apply_gksl(const MatrixXc& H, const std::vector<MatrixXc>& jumps, double gamma, const MatrixXc& rho);

struct LiouvilleSpectrum {
  VectorXc eigenvalues;  // kernel first, then descending real part, then ascending |imag|
  MatrixXc right;        // columns, unit norm
  MatrixXc left;         // columns, <<left_a|right_b>> = delta_ab
  std::size_t stationary_dim = 0;
  double biorthogonality_residual = 0.0;
  double left_residual = 0.0;
  /// Set when the eigenvector matrix is too ill-conditioned to bi-orthogonalize (non-diagonalizable L).
  bool jordan_warning = false;

  [[nodiscard]] VectorXc coefficients(const VectorXc& rho0) const;
  /// sum_a c_a exp(lambda_a t) |right_a>>
  [[nodiscard]] VectorXc propagate(const VectorXc& rho0, double t) const;
};

/// Full dense diagonalization; refuses doubled dimensions above max_dim.
LiouvilleSpectrum spectrum(const Liouvillian& L, Eigen::Index max_dim = 1024);

struct SlowModes {
  VectorXc eigenvalues;
  MatrixXc vectors;
  Eigen::VectorXd residuals;
  bool converged = false;
  int krylov_dim = 0;
};

/// Eigenvalues closest to zero by shift-invert Arnoldi around a small positive shift.
/// Residuals ||L x - lambda x|| are always reported; `converged` is false if any exceeds tol.
SlowModes slow_modes(const Liouvillian& L, int count, double tol = 1e-8);

struct StationaryBasis {
  MatrixXc vectors;  // orthonormal columns spanning ker L
  Eigen::VectorXd residuals;

  [[nodiscard]] Eigen::Index dim() const { return vectors.cols(); }
};

StationaryBasis stationary_states(const Liouvillian& L, Eigen::Index max_dim = 1024);

struct EvolveOptions {
  double tol = 1e-12;
  int krylov_dim = 30;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<MatrixXc> states;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  int krylov_steps = 0;
  int rejections = 0;
};

/// rho(t) = exp(L t) rho0 on an ascending grid starting at 0.
Trajectory evolve(const Liouvillian& L, const MatrixXc& rho0, const std::vector<double>& times,
                  const EvolveOptions& opts = {});

/// Tr(rho P_i Q_{i+1}): occupation of a "01" wall on bond i.
double expect_bond_dw(const MatrixXc& rho, int bond);

template <class DerivedA, class DerivedB>
double trace_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  Matrix<Scalar> d = a - b;
  d = (0.5 * (d + d.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace kcm
