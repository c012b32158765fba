#include "kcm/perturb2.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include <unsupported/Eigen/MatrixFunctions>

#include "kcm/liouville.hpp"

namespace kcm {

namespace {

using Trip = Eigen::Triplet<cplx, std::int64_t>;

bool stationary(const Classification& cls, StatePair p) { return cls.same_sector(p.first.index(), p.second.index()); }

std::uint64_t pair_code(StatePair p, std::size_t dim) { return p.first.bits * dim + p.second.bits; }

std::vector<StatePair> stationary_pairs(const Classification& cls) {
  std::vector<StatePair> out;
  for (const auto& sec : cls.sectors) {
    for (const auto& a : sec.members) {
      for (const auto& b : sec.members) out.emplace_back(a, b);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// L_1 |n, n'>> = -i sum_a H_{a n} |a, n'>> + i sum_b conj(H_{b n'}) |n, b>>.
template <class Visit>
void apply_l1(const SparseOperator& H, StatePair p, int n_sites, Visit&& visit) {
  const auto n = static_cast<std::int64_t>(p.first.bits);
  const auto np = static_cast<std::int64_t>(p.second.bits);
  for (SparseOperator::InnerIterator it(H, n); it; ++it) {
    visit(StatePair{BasisState{static_cast<std::uint64_t>(it.row()), n_sites}, p.second}, cplx{0.0, -1.0} * it.value());
  }
  for (SparseOperator::InnerIterator it(H, np); it; ++it) {
    visit(StatePair{p.first, BasisState{static_cast<std::uint64_t>(it.row()), n_sites}},
          cplx{0.0, 1.0} * std::conj(it.value()));
  }
}

SecondOrderBlock closed_form(const SparseOperator& H, const Classification& cls, double gamma,
                             const std::vector<StatePair>& cols, bool rows_from_cols) {
  if (H.rows() != static_cast<std::int64_t>(hilbert_dim(cls.n_sites))) {
    throw std::invalid_argument("second_order_liouvillian: H dimension does not match the classification");
  }
  const std::size_t dim = hilbert_dim(cls.n_sites);
  std::map<std::pair<StatePair, std::size_t>, cplx> elements;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    apply_l1(H, cols[c], cls.n_sites, [&](StatePair mid, cplx c1) {
      if (stationary(cls, mid)) return;
      const double lambda = dissipator_eigenvalue(cls, mid, gamma);
      apply_l1(H, mid, cls.n_sites, [&](StatePair target, cplx c2) {
        if (!stationary(cls, target)) return;
        elements[{target, c}] += -c1 * c2 / lambda;
      });
    });
  }

  SecondOrderBlock out;
  out.cols = cols;
  if (rows_from_cols) {
    out.rows = cols;
  } else {
    for (const auto& [key, value] : elements) out.rows.push_back(key.first);
    std::sort(out.rows.begin(), out.rows.end());
    out.rows.erase(std::unique(out.rows.begin(), out.rows.end()), out.rows.end());
  }
  std::unordered_map<std::uint64_t, std::int64_t> row_index;
  for (std::size_t r = 0; r < out.rows.size(); ++r) row_index[pair_code(out.rows[r], dim)] = static_cast<std::int64_t>(r);

  std::vector<Trip> trips;
  for (const auto& [key, value] : elements) {
    if (value == cplx{0.0}) continue;
    trips.emplace_back(row_index.at(pair_code(key.first, dim)), static_cast<std::int64_t>(key.second), value);
  }
  out.matrix = SparseOperator(static_cast<std::int64_t>(out.rows.size()), static_cast<std::int64_t>(out.cols.size()));
  out.matrix.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

double dissipator_eigenvalue(const Classification& cls, StatePair pair, double gamma) {
  double acc = 0.0;
  for (const auto& diag : cls.jump_diagonal) {
    const double d = diag(static_cast<Eigen::Index>(pair.first.index())) - diag(static_cast<Eigen::Index>(pair.second.index()));
    acc += d * d;
  }
  return -0.5 * gamma * acc;
}

double lambda_class(const Classification& cls, StatePair intermediate, double gamma) {
  if (stationary(cls, intermediate)) {
    throw std::invalid_argument("lambda_class: pair (" + intermediate.first.to_string() + ", " +
                                intermediate.second.to_string() + ") lies in the stationary subspace");
  }
  return dissipator_eigenvalue(cls, intermediate, gamma);
}

double SecondOrderBlock::max_abs() const {
  double m = 0.0;
  for (std::int64_t k = 0; k < matrix.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(matrix, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

SecondOrderBlock second_order_liouvillian(const SparseOperator& H, const Classification& cls, double gamma) {
  return closed_form(H, cls, gamma, stationary_pairs(cls), true);
}

SecondOrderBlock second_order_liouvillian(const SparseOperator& H, const Classification& cls, double gamma,
                                          const SectorKey& key) {
  const auto& sec = cls.sector(key);
  std::vector<StatePair> cols;
  for (const auto& a : sec.members) {
    for (const auto& b : sec.members) cols.emplace_back(a, b);
  }
  std::sort(cols.begin(), cols.end());
  return closed_form(H, cls, gamma, cols, false);
}

SecondOrderBlock second_order_oracle(const SparseOperator& H, const Classification& cls, double gamma) {
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(cls.n_sites));
  const Liouvillian closed = build_liouvillian(H, {}, 0.0);
  const MatrixXc L1 = MatrixXc(closed.unitary);
  const Eigen::Index n = dim * dim;

  Eigen::VectorXd P(n);
  Eigen::VectorXd L0pinv(n);
  Eigen::VectorXd L0(n);
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (Eigen::Index b = 0; b < dim; ++b) {
      const StatePair p{BasisState{static_cast<std::uint64_t>(a), cls.n_sites}, BasisState{static_cast<std::uint64_t>(b), cls.n_sites}};
      const double lam = dissipator_eigenvalue(cls, p, gamma);
      L0(a * dim + b) = lam;
      P(a * dim + b) = stationary(cls, p) ? 1.0 : 0.0;
      L0pinv(a * dim + b) = lam != 0.0 ? 1.0 / lam : 0.0;
    }
  }
  const Eigen::VectorXd Q = Eigen::VectorXd::Ones(n) - P;
  const MatrixXc right = Q.asDiagonal() * (L1 * P.asDiagonal());
  const MatrixXc mid = (Q.cwiseProduct(L0pinv)).asDiagonal() * right;
  const MatrixXc full = -(P.asDiagonal() * (L1 * mid));

  SecondOrderBlock out;
  out.rows = out.cols = stationary_pairs(cls);
  std::vector<Trip> trips;
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    const auto ri = static_cast<Eigen::Index>(pair_code(out.rows[r], static_cast<std::size_t>(dim)));
    for (std::size_t c = 0; c < out.cols.size(); ++c) {
      const auto ci = static_cast<Eigen::Index>(pair_code(out.cols[c], static_cast<std::size_t>(dim)));
      if (full(ri, ci) != cplx{0.0}) {
        trips.emplace_back(static_cast<std::int64_t>(r), static_cast<std::int64_t>(c), full(ri, ci));
      }
    }
  }
  out.matrix = SparseOperator(static_cast<std::int64_t>(out.rows.size()), static_cast<std::int64_t>(out.cols.size()));
  out.matrix.setFromTriplets(trips.begin(), trips.end());
  return out;
}

double compare_second_order(const SecondOrderBlock& closed, const SecondOrderBlock& oracle) {
  std::map<std::pair<StatePair, StatePair>, cplx> diff;
  auto add = [&diff](const SecondOrderBlock& blk, double sign) {
    for (std::int64_t k = 0; k < blk.matrix.outerSize(); ++k) {
      for (SparseOperator::InnerIterator it(blk.matrix, k); it; ++it) {
        diff[{blk.rows[static_cast<std::size_t>(it.row())], blk.cols[static_cast<std::size_t>(it.col())]}] += sign * it.value();
      }
    }
  };
  add(closed, 1.0);
  add(oracle, -1.0);
  double worst = 0.0;
  for (const auto& [key, value] : diff) worst = std::max(worst, std::abs(value));
  return worst;
}

LambdaScan scan_lambda_classes(const Classification& cls, double gamma) {
  LambdaScan scan;
  auto classify = [&](StatePair p) {
    if (stationary(cls, p)) return;
    ++scan.intermediates;
    const double ratio = 2.0 * lambda_class(cls, p, gamma) / gamma;
    if (std::abs(ratio + 1.0) < 1e-12) {
      ++scan.minus_one;
    } else if (std::abs(ratio + 2.0) < 1e-12) {
      ++scan.minus_two;
    } else {
      ++scan.other;
    }
  };
  for (const auto& p : stationary_pairs(cls)) {
    for (int site = 1; site <= cls.n_sites; ++site) {
      classify({p.first.flipped(site), p.second});
      classify({p.first, p.second.flipped(site)});
    }
  }
  return scan;
}

ValidityTimes validity_time(double J, double gamma, int n_sites) {
  if (gamma <= 0.0) throw std::invalid_argument("validity_time: gamma must be positive");
  if (J == 0.0 || n_sites < 1) throw std::invalid_argument("validity_time: need J != 0 and N >= 1");
  const double jn = J * n_sites;
  return {gamma / (jn * jn), gamma / (J * J)};
}

MatrixXc first_order_evolve(const SparseOperator& H, const Classification& cls, const MatrixXc& rho0, double t) {
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(cls.n_sites));
  if (rho0.rows() != dim || rho0.cols() != dim) throw std::invalid_argument("first_order_evolve: rho0 dimension mismatch");
  MatrixXc projected = MatrixXc::Zero(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (Eigen::Index b = 0; b < dim; ++b) {
      if (cls.same_sector(static_cast<std::size_t>(a), static_cast<std::size_t>(b))) projected(a, b) = rho0(a, b);
    }
  }
  const MatrixXc H1 = MatrixXc(first_order_hamiltonian(H, cls));
  const MatrixXc U = (cplx{0.0, -t} * H1).exp();
  return U * projected * U.adjoint();
}

std::vector<ErrorScalingRow> first_order_error_scaling(const SparseOperator& H,
                                                       const std::vector<SparseOperator>& jumps,
                                                       const MatrixXc& rho0, double t,
                                                       const std::vector<double>& gammas) {
  const Classification cls = classify_basis(jumps);
  const MatrixXc effective = first_order_evolve(H, cls, rho0, t);
  std::vector<ErrorScalingRow> rows;
  for (const double gamma : gammas) {
    const Liouvillian L = build_liouvillian(H, jumps, gamma);
    const Trajectory traj = evolve(L, rho0, {0.0, t});
    rows.push_back({gamma, trace_distance(traj.states.back(), effective)});
  }
  return rows;
}

}  // namespace kcm
