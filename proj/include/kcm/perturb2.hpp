#pragma once

#include <utility>
#include <vector>

#include "kcm/dfs.hpp"
#include "kcm/types.hpp"

namespace kcm {

/// Ket/bra pair (n, n') labelling the doubled-space basis vector |n> (x) |n'>^*.
using StatePair = std::pair<BasisState, BasisState>;

/// Diagonal of L_0 = L_D at a pair: -(gamma/2) sum_j (f_j(a) - f_j(b))^2.
double dissipator_eigenvalue(const Classification& cls, StatePair pair, double gamma);

/// Denominator of an intermediate pair reached by one spin flip from a stationary pair.
/// For projector jumps 2 lambda / gamma is minus the number of changed jump eigenvalues.
/// Throws std::invalid_argument if the pair is stationary.
double lambda_class(const Classification& cls, StatePair intermediate, double gamma);

/// Rows are stationary pairs reached at second order, columns the pairs of the requested sectors.
struct SecondOrderBlock {
  std::vector<StatePair> rows;
  std::vector<StatePair> cols;
  SparseOperator matrix;

  [[nodiscard]] double max_abs() const;
};

/// -P L_1 (1 - P) L_0^+ (1 - P) L_1 P with L_1 = -i (H (x) I - I (x) H^T), by enumerating the
/// single-flip intermediates of every column pair (closed-form element rules).
/// Columns cover every stationary pair; rows the same list.
SecondOrderBlock second_order_liouvillian(const SparseOperator& H, const Classification& cls, double gamma);

/// Columns restricted to pairs inside the sector `key`; rows list every stationary pair reached.
SecondOrderBlock second_order_liouvillian(const SparseOperator& H, const Classification& cls, double gamma,
                                          const SectorKey& key);

/// The same operator by dense matrix algebra with an explicit pseudo-inverse of L_0, in the
/// row and column order of the full closed-form block. Intended for N <= 4.
SecondOrderBlock second_order_oracle(const SparseOperator& H, const Classification& cls, double gamma);

/// Largest |closed - oracle| after aligning the pair lists.
double compare_second_order(const SecondOrderBlock& closed, const SecondOrderBlock& oracle);

struct LambdaScan {
  std::size_t intermediates = 0;
  std::size_t minus_one = 0;
  std::size_t minus_two = 0;
  std::size_t other = 0;
};

/// Every single flip applied to either side of every stationary pair that leaves the stationary subspace.
LambdaScan scan_lambda_classes(const Classification& cls, double gamma);

struct ValidityTimes {
  double conservative = 0.0;  // gamma / (J N)^2
  double conjectured = 0.0;   // gamma / J^2
};

ValidityTimes validity_time(double J, double gamma, int n_sites);

/// U P(rho0) U^dag with U = exp(-i t sum_keys p H p) and P(rho) = sum_keys p rho p.
MatrixXc first_order_evolve(const SparseOperator& H, const Classification& cls, const MatrixXc& rho0, double t);

struct ErrorScalingRow {
  double gamma = 0.0;
  double trace_distance = 0.0;
};

/// Trace distance at time t between the full GKSL solution and first_order_evolve, per gamma.
std::vector<ErrorScalingRow> first_order_error_scaling(const SparseOperator& H,
                                                       const std::vector<SparseOperator>& jumps,
                                                       const MatrixXc& rho0, double t,
                                                       const std::vector<double>& gammas);

}  // namespace kcm
