#pragma once

#include <vector>

#include "kcm/types.hpp"

namespace kcm {

enum class ProjectorKind { Q, P };

/// Two-site jump families: QP gives L_i = Q_i P_{i+1}, QQ gives L_i = Q_i Q_{i+1}.
enum class JumpKind { QP, QQ };

/// Constrained local Hamiltonians reached in the strong-dissipation limit.
enum class LocalForm { PXQ, PXQ_QXP, PXP };

/// Parameters of the chain Hamiltonian
///   sum_{i=2}^{N-1} (J sx_i - h/2 sz_i) + V sum_i sz_i sz_{i+1}
/// and, with two chains, the inter-chain term g sum_i sz_{i,1} sz_{i,2}.
/// Two-chain states use 2N bits with chain 1 in the low N bits.
struct HamiltonianSpec {
  int n_sites = 2;
  double J = 1.0;
  double h = 0.0;
  double V = 0.0;
  double g = 0.0;
  int chains = 1;
  /// Fields act on sites 2..N-1 only; boundary spins are then conserved.
  bool boundary_bulk_only = true;

  void validate() const;
  [[nodiscard]] int total_sites() const { return n_sites * chains; }
};

std::vector<BasisState> enumerate_basis(int n_sites);

SparseOperator identity_operator(int n_sites);
SparseOperator local_projector(ProjectorKind kind, int site, int n_sites);
SparseOperator sigma_x(int site, int n_sites);
SparseOperator sigma_z(int site, int n_sites);

SparseOperator build_hamiltonian(const HamiltonianSpec& spec);

/// N-1 commuting diagonal projectors, the j-th supported on sites {j, j+1}.
std::vector<SparseOperator> build_jump_set(JumpKind kind, int n_sites);

/// J sum_{i=2}^{N-1} of the local constrained flip term.
SparseOperator local_form_hamiltonian(LocalForm form, int n_sites, double J);

VectorXc basis_vector(BasisState s);

bool is_hermitian(const SparseOperator& op, double tol = 1e-12);
bool is_diagonal(const SparseOperator& op, double tol = 0.0);

/// Hilbert-space site count for an operator of dimension 2^N; throws otherwise.
int sites_from_dim(std::int64_t dim);

}  // namespace kcm
