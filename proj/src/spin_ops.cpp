#include "kcm/spin_ops.hpp"

#include <stdexcept>
#include <string>

namespace kcm {

std::string BasisState::to_string() const {
  std::string s(static_cast<std::size_t>(n_sites), '0');
  for (int i = 1; i <= n_sites; ++i) {
    if (spin(i)) s[static_cast<std::size_t>(i - 1)] = '1';
  }
  return s;
}

BasisState BasisState::from_string(std::string_view s) {
  if (s.empty() || s.size() > 63) throw std::invalid_argument("basis string must have 1..63 sites");
  BasisState out{0, static_cast<int>(s.size())};
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1') {
      out.bits |= std::uint64_t{1} << i;
    } else if (s[i] != '0') {
      throw std::invalid_argument("basis string may only contain '0' and '1': " + std::string(s));
    }
  }
  return out;
}

void HamiltonianSpec::validate() const {
  if (n_sites < 2) throw std::invalid_argument("HamiltonianSpec: N must be >= 2");
  if (chains != 1 && chains != 2) throw std::invalid_argument("HamiltonianSpec: chains must be 1 or 2");
  if (total_sites() > 24) throw std::invalid_argument("HamiltonianSpec: more than 24 spins is not supported");
}

std::vector<BasisState> enumerate_basis(int n_sites) {
  if (n_sites < 1 || n_sites > 30) throw std::invalid_argument("enumerate_basis: N out of range");
  std::vector<BasisState> out;
  out.reserve(hilbert_dim(n_sites));
  for (std::uint64_t b = 0; b < hilbert_dim(n_sites); ++b) out.push_back({b, n_sites});
  return out;
}

namespace {

void check_site(int site, int n_sites) {
  if (site < 1 || site > n_sites) {
    throw std::out_of_range("site " + std::to_string(site) + " outside 1.." + std::to_string(n_sites));
  }
}

template <class DiagFn>
SparseOperator diagonal_operator(int n_sites, DiagFn&& value) {
  const auto dim = static_cast<std::int64_t>(hilbert_dim(n_sites));
  std::vector<Eigen::Triplet<cplx, std::int64_t>> trips;
  trips.reserve(static_cast<std::size_t>(dim));
  for (std::int64_t b = 0; b < dim; ++b) {
    const cplx v = value(BasisState{static_cast<std::uint64_t>(b), n_sites});
    if (v != cplx{}) trips.emplace_back(b, b, v);
  }
  SparseOperator op(dim, dim);
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

double z_value(int spin) { return spin ? 1.0 : -1.0; }

}  // namespace

SparseOperator identity_operator(int n_sites) {
  return diagonal_operator(n_sites, [](BasisState) { return cplx{1.0}; });
}

SparseOperator local_projector(ProjectorKind kind, int site, int n_sites) {
  check_site(site, n_sites);
  const int want = kind == ProjectorKind::Q ? 1 : 0;
  return diagonal_operator(n_sites, [&](BasisState s) { return cplx{s.spin(site) == want ? 1.0 : 0.0}; });
}

SparseOperator sigma_z(int site, int n_sites) {
  check_site(site, n_sites);
  return diagonal_operator(n_sites, [&](BasisState s) { return cplx{z_value(s.spin(site))}; });
}

SparseOperator sigma_x(int site, int n_sites) {
  check_site(site, n_sites);
  const auto dim = static_cast<std::int64_t>(hilbert_dim(n_sites));
  std::vector<Eigen::Triplet<cplx, std::int64_t>> trips;
  trips.reserve(static_cast<std::size_t>(dim));
  for (std::int64_t b = 0; b < dim; ++b) {
    const BasisState s{static_cast<std::uint64_t>(b), n_sites};
    trips.emplace_back(static_cast<std::int64_t>(s.flipped(site).bits), b, 1.0);
  }
  SparseOperator op(dim, dim);
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

SparseOperator build_hamiltonian(const HamiltonianSpec& spec) {
  spec.validate();
  const int n = spec.n_sites;
  const int total = spec.total_sites();
  const auto dim = static_cast<std::int64_t>(hilbert_dim(total));
  const int first = spec.boundary_bulk_only ? 2 : 1;
  const int last = spec.boundary_bulk_only ? n - 1 : n;

  // Site i of chain c (both 1-based) sits at global site (c-1)*N + i.
  auto global = [n](int chain, int site) { return (chain - 1) * n + site; };

  std::vector<Eigen::Triplet<cplx, std::int64_t>> trips;
  trips.reserve(static_cast<std::size_t>(dim) * static_cast<std::size_t>(total + 1));
  for (std::int64_t b = 0; b < dim; ++b) {
    const BasisState s{static_cast<std::uint64_t>(b), total};
    double diag = 0.0;
    for (int c = 1; c <= spec.chains; ++c) {
      for (int i = first; i <= last; ++i) {
        diag += -0.5 * spec.h * z_value(s.spin(global(c, i)));
        if (spec.J != 0.0) {
          trips.emplace_back(static_cast<std::int64_t>(s.flipped(global(c, i)).bits), b, spec.J);
        }
      }
      for (int i = 1; i < n; ++i) {
        diag += spec.V * z_value(s.spin(global(c, i))) * z_value(s.spin(global(c, i + 1)));
      }
    }
    if (spec.chains == 2) {
      for (int i = 1; i <= n; ++i) {
        diag += spec.g * z_value(s.spin(global(1, i))) * z_value(s.spin(global(2, i)));
      }
    }
    if (diag != 0.0) trips.emplace_back(b, b, diag);
  }
  SparseOperator op(dim, dim);
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

std::vector<SparseOperator> build_jump_set(JumpKind kind, int n_sites) {
  if (n_sites < 2) throw std::invalid_argument("build_jump_set: N must be >= 2");
  const int right_want = kind == JumpKind::QP ? 0 : 1;
  std::vector<SparseOperator> out;
  out.reserve(static_cast<std::size_t>(n_sites - 1));
  for (int j = 1; j < n_sites; ++j) {
    out.push_back(diagonal_operator(n_sites, [&](BasisState s) {
      return cplx{(s.spin(j) == 1 && s.spin(j + 1) == right_want) ? 1.0 : 0.0};
    }));
  }
  return out;
}

SparseOperator local_form_hamiltonian(LocalForm form, int n_sites, double J) {
  if (n_sites < 3) throw std::invalid_argument("local_form_hamiltonian: N must be >= 3");
  const auto dim = static_cast<std::int64_t>(hilbert_dim(n_sites));
  std::vector<Eigen::Triplet<cplx, std::int64_t>> trips;
  for (std::int64_t b = 0; b < dim; ++b) {
    const BasisState s{static_cast<std::uint64_t>(b), n_sites};
    for (int i = 2; i < n_sites; ++i) {
      const int left = s.spin(i - 1);
      const int right = s.spin(i + 1);
      bool allowed = false;
      switch (form) {
        case LocalForm::PXQ: allowed = left == 0 && right == 1; break;
        case LocalForm::PXQ_QXP: allowed = left != right; break;
        case LocalForm::PXP: allowed = left == 0 && right == 0; break;
      }
      if (allowed) trips.emplace_back(static_cast<std::int64_t>(s.flipped(i).bits), b, J);
    }
  }
  SparseOperator op(dim, dim);
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

VectorXc basis_vector(BasisState s) {
  VectorXc v = VectorXc::Zero(static_cast<Eigen::Index>(hilbert_dim(s.n_sites)));
  v(static_cast<Eigen::Index>(s.bits)) = 1.0;
  return v;
}

bool is_hermitian(const SparseOperator& op, double tol) {
  if (op.rows() != op.cols()) return false;
  const SparseOperator diff = op - SparseOperator(op.adjoint());
  for (std::int64_t k = 0; k < diff.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(diff, k); it; ++it) {
      if (std::abs(it.value()) > tol) return false;
    }
  }
  return true;
}

bool is_diagonal(const SparseOperator& op, double tol) {
  for (std::int64_t k = 0; k < op.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(op, k); it; ++it) {
      if (it.row() != it.col() && std::abs(it.value()) > tol) return false;
    }
  }
  return true;
}

int sites_from_dim(std::int64_t dim) {
  int n = 0;
  while ((std::int64_t{1} << n) < dim) ++n;
  if ((std::int64_t{1} << n) != dim || n == 0) {
    throw std::invalid_argument("operator dimension " + std::to_string(dim) + " is not 2^N");
  }
  return n;
}

}  // namespace kcm
