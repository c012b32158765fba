#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "kcm/spin_ops.hpp"
#include "kcm/types.hpp"

namespace kcm {

/// Joint eigenvalue assignment {f_j} of a diagonal jump family.
///
/// Only the nonzero eigenvalues are stored (jump index is 1-based, i.e. the bond
/// index for two-site jumps), since low-excitation keys are mostly zero.
struct SectorKey {
  int n_jumps = 0;
  std::vector<std::pair<int, double>> nonzero;

  [[nodiscard]] double f(int j) const;
  [[nodiscard]] double total() const;
  /// Jumps carrying eigenvalue 1 (the "excited" bonds).
  [[nodiscard]] std::vector<int> excited() const;
  /// "0001000"-style digit string when every f_j is 0 or 1, else a list.
  [[nodiscard]] std::string to_string() const;

  static SectorKey zeros(int n_jumps) { return {n_jumps, {}}; }

  friend bool operator==(const SectorKey&, const SectorKey&) = default;
  friend auto operator<=>(const SectorKey&, const SectorKey&) = default;
};

struct SectorProjector {
  SectorKey key;
  std::vector<BasisState> members;
  /// S_{j, f_j}: number of local configurations of the support of L_j with eigenvalue f_j.
  std::vector<int> local_degeneracy;

  [[nodiscard]] std::size_t dim() const { return members.size(); }
};

class Classification {
 public:
  int n_sites = 0;
  std::vector<SectorProjector> sectors;
  std::vector<int> sector_index;                 // per basis state
  std::vector<std::vector<int>> jump_support;    // sites of each jump
  std::vector<Eigen::VectorXd> jump_diagonal;    // eigenvalue of each jump per basis state

  [[nodiscard]] std::size_t n_jumps() const { return jump_diagonal.size(); }
  [[nodiscard]] const SectorProjector& sector(const SectorKey& key) const;
  [[nodiscard]] const SectorProjector& sector_of(BasisState s) const;
  [[nodiscard]] const SectorKey& key_of(BasisState s) const { return sector_of(s).key; }
  [[nodiscard]] bool same_sector(std::size_t a, std::size_t b) const {
    return sector_index[a] == sector_index[b];
  }
  /// Sum over keys of (sector dimension)^2: the rank of the stationary projector.
  [[nodiscard]] std::size_t stationary_dimension() const;
  /// Number of jump eigenvalues that differ between two basis states.
  [[nodiscard]] double eigenvalue_mismatch(std::size_t a, std::size_t b) const;
};

/// Partitions the computational basis by joint jump eigenvalues.
/// Throws std::invalid_argument naming the first off-diagonal entry if a jump is not diagonal.
Classification classify_basis(const std::vector<SparseOperator>& jumps);

SparseOperator sector_projector_matrix(const SectorProjector& sector, int n_sites);

/// Stationary projector sum_keys p (x) p^* on the doubled space.
SparseOperator total_projector(const Classification& cls);

/// A Hamiltonian restricted to a set of computational basis states.
struct BlockHamiltonian {
  std::vector<BasisState> basis;
  SparseOperator matrix;
  /// For energy shells: the dropped constant E_{sum f} in units of U.
  double shell_energy_over_u = 0.0;

  [[nodiscard]] std::size_t dim() const { return basis.size(); }
  [[nodiscard]] std::size_t index_of(BasisState s) const;
  [[nodiscard]] bool contains(BasisState s) const;
};

/// p_{f} H p_{f} for one sector key.
BlockHamiltonian effective_hamiltonian_lind(const SparseOperator& H, const Classification& cls,
                                            const SectorKey& key);

/// p_{sum f} H p_{sum f}: projection onto every state whose jump eigenvalues sum to total_f.
BlockHamiltonian effective_hamiltonian_ham(const SparseOperator& H, const Classification& cls,
                                           double total_f);

BlockHamiltonian restrict_block(const BlockHamiltonian& block, const std::vector<BasisState>& subset);

/// Block-diagonal operator sum_keys p H p on the full 2^N space.
SparseOperator first_order_hamiltonian(const SparseOperator& H, const Classification& cls);

/// Bonds j with S_{j, f_j} = 1.
std::vector<int> frozen_blocks(const SectorKey& key, const Classification& cls);

struct ConnectivityGraph {
  SectorKey key;
  std::vector<BasisState> vertices;
  std::vector<std::pair<int, int>> edges;  // indices into vertices, first < second
  std::vector<int> frozen_bonds;

  [[nodiscard]] int n_frozen() const { return static_cast<int>(frozen_bonds.size()); }
};

/// Breadth-first closure of `start` over matrix elements above 1e-12 of the largest coupling.
ConnectivityGraph sector_graph(const BlockHamiltonian& block, BasisState start, const Classification& cls);

/// All connected components of a block, in order of their smallest basis state.
std::vector<ConnectivityGraph> connected_components(const BlockHamiltonian& block, const Classification& cls);

struct LocalFormReport {
  LocalForm form = LocalForm::PXQ;
  int n_sites = 0;
  std::size_t blocks_checked = 0;
  double max_deviation = 0.0;
  bool passed = false;
  std::string first_violation;
};

/// Checks p H p = p H_local p on every sector (PXQ with QP jumps, PXP with QQ jumps) or on
/// every energy shell (PXQ-QXP with QP jumps) for H = J sum_{i=2}^{N-1} sx_i.
LocalFormReport verify_local_form(LocalForm form, int n_sites, double J = 1.0, double tol = 1e-12);

struct SectorCensusRow {
  SectorKey key;
  std::size_t dim = 0;
  int n_frozen = 0;
  std::size_t components = 0;
};

std::vector<SectorCensusRow> sector_census(const SparseOperator& H, const Classification& cls);

}  // namespace kcm
