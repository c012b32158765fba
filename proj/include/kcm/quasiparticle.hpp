#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kcm/types.hpp"

namespace kcm {

enum class FermionMode { single, two_particle_kink, coupled_ladder };

/// Kink-antikink basis: `wedge` keeps mu < nu (the "01" wall left of the "10" wall, the only
/// order realized with boundary spins (0, 0)); `both` also keeps the mirror order nu < mu.
enum class PairOrdering { wedge, both };

struct FermionModel {
  FermionMode mode = FermionMode::single;
  int n_sites = 0;
  double J = 1.0;
  double h = 0.0;
  double g = 0.0;
  double disorder_amplitude = 0.0;
  std::uint64_t seed = 0;
  /// Ladder offsets, chain-major: disorder[(c - 1) * (N - 1) + (mu - 1)].
  std::vector<double> disorder;
  /// Per basis index: occupied mode(s). Single: {mu, 0}; kink: {mu, nu}; ladder: {mu_1, mu_2}.
  std::vector<std::array<int, 2>> labels;
  /// Constant removed from the diagonal (add it back to compare with spin-chain energies).
  double dropped_constant = 0.0;
  std::string dropped_description;
  SparseReal matrix;

  [[nodiscard]] int n_modes() const { return n_sites - 1; }
  [[nodiscard]] Eigen::Index dim() const { return matrix.rows(); }
  [[nodiscard]] int particles() const { return mode == FermionMode::single ? 1 : 2; }
  /// Basis index of a label; throws std::out_of_range if absent.
  [[nodiscard]] Eigen::Index index_of(int mu, int nu = 0) const;
  /// Occupation columns: N-1 modes, or 2 (N-1) for the ladder (chain 1 then chain 2).
  [[nodiscard]] int occupation_columns() const { return mode == FermionMode::coupled_ladder ? 2 * n_modes() : n_modes(); }
  /// Column indices (0-based) occupied by basis state `k`.
  [[nodiscard]] std::vector<int> occupied_columns(Eigen::Index k) const;
};

/// Bond of the single "01" wall for a state with boundary (0, 1) and no "10" wall.
int domain_wall_to_mode(BasisState s);

/// Bonds (mu, nu) of the "01" and "10" walls for a state with boundary (0, 0) and a single up domain.
std::pair<int, int> domain_wall_pair(BasisState s);

/// (N-1)-mode chain, hopping J, potential h mu; the spin-chain constant -N h / 2 is dropped.
FermionModel single_particle_stark(int n_sites, double J, double h);

/// Two hard-core walls on N-1 bonds, hopping J for either wall, diagonal -h |mu - nu|;
/// the constant (N - 2) h / 2 is dropped.
FermionModel two_particle_kink_model(int n_sites, double J, double h, PairOrdering ordering = PairOrdering::wedge);

/// Ladder of two Stark chains coupled by -2 g |mu_1 - mu_2|, plus optional uniform on-site
/// offsets in [-W, W] per (chain, mode) drawn from std::mt19937_64(seed).
/// Basis index (mu_1 - 1)(N - 1) + (mu_2 - 1).
FermionModel coupled_chain_model(int n_sites, double J, double h, double g, double disorder_amplitude = 0.0,
                                 std::uint64_t seed = 0);

double potential_xi(int mu1, int mu2, double h, double g);

/// Inverse localization length of the Wannier-Stark chain, 2 asinh(h / 2J).
double stark_inverse_length(double h, double J = 1.0);

std::string to_string(FermionMode mode);

}  // namespace kcm
