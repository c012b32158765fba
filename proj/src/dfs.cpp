#include "kcm/dfs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>

namespace kcm {

namespace {

constexpr double kEigTol = 1e-12;

using Trip = Eigen::Triplet<cplx, std::int64_t>;

}  // namespace

double SectorKey::f(int j) const {
  for (const auto& [idx, val] : nonzero) {
    if (idx == j) return val;
  }
  return 0.0;
}

double SectorKey::total() const {
  double s = 0.0;
  for (const auto& [idx, val] : nonzero) s += val;
  return s;
}

std::vector<int> SectorKey::excited() const {
  std::vector<int> out;
  for (const auto& [idx, val] : nonzero) {
    if (std::abs(val - 1.0) < kEigTol) out.push_back(idx);
  }
  return out;
}

std::string SectorKey::to_string() const {
  const bool binary = std::all_of(nonzero.begin(), nonzero.end(),
                                  [](const auto& e) { return std::abs(e.second - 1.0) < kEigTol; });
  if (binary) {
    std::string s(static_cast<std::size_t>(n_jumps), '0');
    for (const auto& [idx, val] : nonzero) s[static_cast<std::size_t>(idx - 1)] = '1';
    return s;
  }
  std::ostringstream os;
  os << '(';
  for (int j = 1; j <= n_jumps; ++j) os << (j > 1 ? "," : "") << f(j);
  os << ')';
  return os.str();
}

const SectorProjector& Classification::sector(const SectorKey& key) const {
  const auto it = std::lower_bound(sectors.begin(), sectors.end(), key,
                                   [](const SectorProjector& s, const SectorKey& k) { return s.key < k; });
  if (it == sectors.end() || it->key != key) {
    throw std::invalid_argument("unknown sector key " + key.to_string());
  }
  return *it;
}

const SectorProjector& Classification::sector_of(BasisState s) const {
  if (s.n_sites != n_sites) throw std::invalid_argument("basis state has the wrong number of sites");
  return sectors[static_cast<std::size_t>(sector_index[s.index()])];
}

std::size_t Classification::stationary_dimension() const {
  std::size_t total = 0;
  for (const auto& s : sectors) total += s.dim() * s.dim();
  return total;
}

double Classification::eigenvalue_mismatch(std::size_t a, std::size_t b) const {
  double m = 0.0;
  for (const auto& diag : jump_diagonal) {
    const double d = diag(static_cast<Eigen::Index>(a)) - diag(static_cast<Eigen::Index>(b));
    m += d * d;
  }
  return m;
}

Classification classify_basis(const std::vector<SparseOperator>& jumps) {
  if (jumps.empty()) throw std::invalid_argument("classify_basis: empty jump set");
  const auto dim = jumps.front().rows();
  Classification cls;
  cls.n_sites = sites_from_dim(dim);

  for (std::size_t j = 0; j < jumps.size(); ++j) {
    const auto& L = jumps[j];
    if (L.rows() != dim || L.cols() != dim) throw std::invalid_argument("classify_basis: jump dimension mismatch");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    for (std::int64_t k = 0; k < L.outerSize(); ++k) {
      for (SparseOperator::InnerIterator it(L, k); it; ++it) {
        if (it.row() != it.col()) {
          if (it.value() == cplx{}) continue;
          std::ostringstream os;
          os << "jump " << j + 1 << " is not diagonal: entry (" << it.row() << "," << it.col()
             << ") = " << it.value();
          throw std::invalid_argument(os.str());
        }
        if (std::abs(it.value().imag()) > kEigTol) {
          throw std::invalid_argument("jump " + std::to_string(j + 1) + " has a non-real diagonal entry");
        }
        diag(it.row()) = it.value().real();
      }
    }
    cls.jump_diagonal.push_back(std::move(diag));
  }

  // Support of each jump: sites whose flip changes some diagonal entry.
  for (const auto& diag : cls.jump_diagonal) {
    std::vector<int> support;
    for (int site = 1; site <= cls.n_sites; ++site) {
      const std::uint64_t bit = std::uint64_t{1} << (site - 1);
      for (std::int64_t b = 0; b < dim; ++b) {
        if (std::abs(diag(b) - diag(static_cast<std::int64_t>(static_cast<std::uint64_t>(b) ^ bit))) > kEigTol) {
          support.push_back(site);
          break;
        }
      }
    }
    cls.jump_support.push_back(std::move(support));
  }

  const int n_jumps = static_cast<int>(jumps.size());
  std::map<SectorKey, std::vector<BasisState>> groups;
  for (std::int64_t b = 0; b < dim; ++b) {
    SectorKey key{n_jumps, {}};
    for (int j = 0; j < n_jumps; ++j) {
      const double f = cls.jump_diagonal[static_cast<std::size_t>(j)](b);
      if (std::abs(f) > kEigTol) key.nonzero.emplace_back(j + 1, f);
    }
    groups[key].push_back({static_cast<std::uint64_t>(b), cls.n_sites});
  }

  for (auto& [key, members] : groups) {
    SectorProjector sp{key, std::move(members), {}};
    for (int j = 0; j < n_jumps; ++j) {
      const auto& support = cls.jump_support[static_cast<std::size_t>(j)];
      const auto& diag = cls.jump_diagonal[static_cast<std::size_t>(j)];
      const double fj = key.f(j + 1);
      int count = 0;
      for (std::uint64_t cfg = 0; cfg < (std::uint64_t{1} << support.size()); ++cfg) {
        std::uint64_t bits = 0;
        for (std::size_t k = 0; k < support.size(); ++k) {
          if ((cfg >> k) & 1U) bits |= std::uint64_t{1} << (support[k] - 1);
        }
        if (std::abs(diag(static_cast<Eigen::Index>(bits)) - fj) < kEigTol) ++count;
      }
      sp.local_degeneracy.push_back(count);
    }
    cls.sectors.push_back(std::move(sp));
  }

  cls.sector_index.assign(static_cast<std::size_t>(dim), -1);
  for (std::size_t s = 0; s < cls.sectors.size(); ++s) {
    for (const auto& m : cls.sectors[s].members) cls.sector_index[m.index()] = static_cast<int>(s);
  }
  return cls;
}

SparseOperator sector_projector_matrix(const SectorProjector& sector, int n_sites) {
  const auto dim = static_cast<std::int64_t>(hilbert_dim(n_sites));
  std::vector<Trip> trips;
  for (const auto& m : sector.members) {
    trips.emplace_back(static_cast<std::int64_t>(m.bits), static_cast<std::int64_t>(m.bits), 1.0);
  }
  SparseOperator p(dim, dim);
  p.setFromTriplets(trips.begin(), trips.end());
  return p;
}

SparseOperator total_projector(const Classification& cls) {
  const auto dim = static_cast<std::int64_t>(hilbert_dim(cls.n_sites));
  std::vector<Trip> trips;
  trips.reserve(cls.stationary_dimension());
  for (const auto& sec : cls.sectors) {
    for (const auto& a : sec.members) {
      for (const auto& b : sec.members) {
        const auto idx = static_cast<std::int64_t>(a.bits) * dim + static_cast<std::int64_t>(b.bits);
        trips.emplace_back(idx, idx, 1.0);
      }
    }
  }
  SparseOperator P(dim * dim, dim * dim);
  P.setFromTriplets(trips.begin(), trips.end());
  return P;
}

std::size_t BlockHamiltonian::index_of(BasisState s) const {
  const auto it = std::lower_bound(basis.begin(), basis.end(), s);
  if (it == basis.end() || *it != s) {
    throw std::invalid_argument("state " + s.to_string() + " is not in this block");
  }
  return static_cast<std::size_t>(it - basis.begin());
}

bool BlockHamiltonian::contains(BasisState s) const { return std::binary_search(basis.begin(), basis.end(), s); }

namespace {

// Restriction of H to a sorted list of basis states.
SparseOperator restrict_matrix(const SparseOperator& H, const std::vector<BasisState>& basis) {
  std::vector<std::int64_t> local(static_cast<std::size_t>(H.rows()), -1);
  for (std::size_t i = 0; i < basis.size(); ++i) local[basis[i].index()] = static_cast<std::int64_t>(i);
  std::vector<Trip> trips;
  for (std::size_t c = 0; c < basis.size(); ++c) {
    for (SparseOperator::InnerIterator it(H, static_cast<std::int64_t>(basis[c].bits)); it; ++it) {
      const auto r = local[static_cast<std::size_t>(it.row())];
      if (r >= 0) trips.emplace_back(r, static_cast<std::int64_t>(c), it.value());
    }
  }
  const auto n = static_cast<std::int64_t>(basis.size());
  SparseOperator out(n, n);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

void check_operator(const SparseOperator& H, const Classification& cls) {
  if (H.rows() != static_cast<std::int64_t>(hilbert_dim(cls.n_sites)) || H.cols() != H.rows()) {
    throw std::invalid_argument("Hamiltonian dimension does not match the classification");
  }
}

}  // namespace

BlockHamiltonian effective_hamiltonian_lind(const SparseOperator& H, const Classification& cls,
                                            const SectorKey& key) {
  check_operator(H, cls);
  const auto& sec = cls.sector(key);
  BlockHamiltonian out;
  out.basis = sec.members;
  out.matrix = restrict_matrix(H, out.basis);
  return out;
}

BlockHamiltonian effective_hamiltonian_ham(const SparseOperator& H, const Classification& cls, double total_f) {
  check_operator(H, cls);
  if (total_f < -kEigTol || total_f > static_cast<double>(cls.n_jumps()) + kEigTol) {
    throw std::invalid_argument("total_f outside 0..M");
  }
  BlockHamiltonian out;
  for (const auto& sec : cls.sectors) {
    if (std::abs(sec.key.total() - total_f) < 1e-9) {
      out.basis.insert(out.basis.end(), sec.members.begin(), sec.members.end());
    }
  }
  std::sort(out.basis.begin(), out.basis.end());
  out.matrix = restrict_matrix(H, out.basis);
  out.shell_energy_over_u = total_f;
  return out;
}

BlockHamiltonian restrict_block(const BlockHamiltonian& block, const std::vector<BasisState>& subset) {
  std::vector<BasisState> sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::int64_t> pos;
  pos.reserve(sorted.size());
  for (const auto& s : sorted) pos.push_back(static_cast<std::int64_t>(block.index_of(s)));
  std::vector<std::int64_t> local(block.dim(), -1);
  for (std::size_t i = 0; i < pos.size(); ++i) local[static_cast<std::size_t>(pos[i])] = static_cast<std::int64_t>(i);
  std::vector<Trip> trips;
  for (std::size_t c = 0; c < pos.size(); ++c) {
    for (SparseOperator::InnerIterator it(block.matrix, pos[c]); it; ++it) {
      const auto r = local[static_cast<std::size_t>(it.row())];
      if (r >= 0) trips.emplace_back(r, static_cast<std::int64_t>(c), it.value());
    }
  }
  BlockHamiltonian out;
  out.basis = std::move(sorted);
  out.matrix = SparseOperator(static_cast<std::int64_t>(out.basis.size()), static_cast<std::int64_t>(out.basis.size()));
  out.matrix.setFromTriplets(trips.begin(), trips.end());
  out.shell_energy_over_u = block.shell_energy_over_u;
  return out;
}

SparseOperator first_order_hamiltonian(const SparseOperator& H, const Classification& cls) {
  check_operator(H, cls);
  std::vector<Trip> trips;
  for (std::int64_t k = 0; k < H.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(H, k); it; ++it) {
      if (cls.same_sector(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()))) {
        trips.emplace_back(it.row(), it.col(), it.value());
      }
    }
  }
  SparseOperator out(H.rows(), H.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

std::vector<int> frozen_blocks(const SectorKey& key, const Classification& cls) {
  const auto& sec = cls.sector(key);
  std::vector<int> out;
  for (std::size_t j = 0; j < sec.local_degeneracy.size(); ++j) {
    if (sec.local_degeneracy[j] == 1) out.push_back(static_cast<int>(j) + 1);
  }
  return out;
}

namespace {

double edge_threshold(const SparseOperator& m) {
  double scale = 0.0;
  for (std::int64_t k = 0; k < m.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(m, k); it; ++it) {
      if (it.row() != it.col()) scale = std::max(scale, std::abs(it.value()));
    }
  }
  return 1e-12 * (scale > 0.0 ? scale : 1.0);
}

ConnectivityGraph bfs_component(const BlockHamiltonian& block, std::size_t start, double threshold,
                                std::vector<int>& visited_mark, int mark) {
  ConnectivityGraph g;
  std::vector<std::int64_t> order;
  std::deque<std::int64_t> queue{static_cast<std::int64_t>(start)};
  visited_mark[start] = mark;
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    order.push_back(v);
    for (SparseOperator::InnerIterator it(block.matrix, v); it; ++it) {
      if (it.row() == v || std::abs(it.value()) <= threshold) continue;
      auto& m = visited_mark[static_cast<std::size_t>(it.row())];
      if (m != mark) {
        m = mark;
        queue.push_back(it.row());
      }
    }
  }
  std::map<std::int64_t, int> pos;
  for (std::size_t i = 0; i < order.size(); ++i) {
    pos[order[i]] = static_cast<int>(i);
    g.vertices.push_back(block.basis[static_cast<std::size_t>(order[i])]);
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (SparseOperator::InnerIterator it(block.matrix, order[i]); it; ++it) {
      if (it.row() == order[i] || std::abs(it.value()) <= threshold) continue;
      const int a = static_cast<int>(i);
      const int b = pos.at(it.row());
      if (a < b) g.edges.emplace_back(a, b);
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

}  // namespace

ConnectivityGraph sector_graph(const BlockHamiltonian& block, BasisState start, const Classification& cls) {
  if (!block.contains(start)) {
    throw std::invalid_argument("start state " + start.to_string() + " lies outside the sector");
  }
  std::vector<int> mark(block.dim(), 0);
  auto g = bfs_component(block, block.index_of(start), edge_threshold(block.matrix), mark, 1);
  g.key = cls.key_of(start);
  g.frozen_bonds = frozen_blocks(g.key, cls);
  return g;
}

std::vector<ConnectivityGraph> connected_components(const BlockHamiltonian& block, const Classification& cls) {
  std::vector<ConnectivityGraph> out;
  std::vector<int> mark(block.dim(), 0);
  const double threshold = edge_threshold(block.matrix);
  int next = 1;
  for (std::size_t i = 0; i < block.dim(); ++i) {
    if (mark[i] != 0) continue;
    auto g = bfs_component(block, i, threshold, mark, next++);
    g.key = cls.key_of(g.vertices.front());
    g.frozen_bonds = frozen_blocks(g.key, cls);
    out.push_back(std::move(g));
  }
  return out;
}

LocalFormReport verify_local_form(LocalForm form, int n_sites, double J, double tol) {
  if (n_sites < 3) throw std::invalid_argument("verify_local_form: N must be >= 3");
  LocalFormReport report;
  report.form = form;
  report.n_sites = n_sites;

  const auto jumps = build_jump_set(form == LocalForm::PXP ? JumpKind::QQ : JumpKind::QP, n_sites);
  const auto cls = classify_basis(jumps);
  HamiltonianSpec spec;
  spec.n_sites = n_sites;
  spec.J = J;
  const auto H = build_hamiltonian(spec);
  const auto H_local = local_form_hamiltonian(form, n_sites, J);

  auto compare = [&](const BlockHamiltonian& a, const BlockHamiltonian& b, const std::string& label) {
    const Matrix<cplx> diff = Matrix<cplx>(a.matrix) - Matrix<cplx>(b.matrix);
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    const double dev = diff.size() ? diff.cwiseAbs().maxCoeff(&r, &c) : 0.0;
    if (dev > report.max_deviation) report.max_deviation = dev;
    if (dev > tol && report.first_violation.empty()) {
      std::ostringstream os;
      os << label << ": <" << a.basis[static_cast<std::size_t>(r)].to_string() << "|H|"
         << a.basis[static_cast<std::size_t>(c)].to_string() << "> differs by " << dev;
      report.first_violation = os.str();
    }
    ++report.blocks_checked;
  };

  if (form == LocalForm::PXQ_QXP) {
    for (std::size_t f = 0; f <= cls.n_jumps(); ++f) {
      const auto a = effective_hamiltonian_ham(H, cls, static_cast<double>(f));
      if (a.dim() == 0) continue;
      compare(a, effective_hamiltonian_ham(H_local, cls, static_cast<double>(f)), "shell " + std::to_string(f));
    }
  } else {
    for (const auto& sec : cls.sectors) {
      compare(effective_hamiltonian_lind(H, cls, sec.key), effective_hamiltonian_lind(H_local, cls, sec.key),
              "sector " + sec.key.to_string());
    }
  }
  report.passed = report.max_deviation <= tol;
  return report;
}

std::vector<SectorCensusRow> sector_census(const SparseOperator& H, const Classification& cls) {
  std::vector<SectorCensusRow> rows;
  rows.reserve(cls.sectors.size());
  for (const auto& sec : cls.sectors) {
    const auto block = effective_hamiltonian_lind(H, cls, sec.key);
    SectorCensusRow row;
    row.key = sec.key;
    row.dim = sec.dim();
    row.n_frozen = static_cast<int>(frozen_blocks(sec.key, cls).size());
    row.components = connected_components(block, cls).size();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace kcm
