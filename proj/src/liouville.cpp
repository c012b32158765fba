#include "kcm/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseLU>

#include "kcm/krylov.hpp"
#include "kcm/spin_ops.hpp"

namespace kcm {

namespace {

using Trip = Eigen::Triplet<cplx, std::int64_t>;

SparseOperator kron(const SparseOperator& a, const SparseOperator& b) {
  std::vector<Trip> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (std::int64_t ka = 0; ka < a.outerSize(); ++ka) {
    for (SparseOperator::InnerIterator ia(a, ka); ia; ++ia) {
      for (std::int64_t kb = 0; kb < b.outerSize(); ++kb) {
        for (SparseOperator::InnerIterator ib(b, kb); ib; ++ib) {
          trips.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                             ia.value() * ib.value());
        }
      }
    }
  }
  SparseOperator out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

SparseOperator sparse_identity(Eigen::Index n) {
  SparseOperator id(n, n);
  id.setIdentity();
  return id;
}

double row_sum_norm(const SparseOperator& A) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
  for (std::int64_t k = 0; k < A.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(A, k); it; ++it) rows(it.row()) += std::abs(it.value());
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

Eigen::Index check_square_dim(Eigen::Index doubled) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(doubled))));
  if (d * d != doubled) throw std::invalid_argument("doubled vector length is not a perfect square");
  return d;
}

}  // namespace

DoubledVector vectorize(const MatrixXc& rho, double hermiticity_tol) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("vectorize: density matrix must be square");
  const double asym = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (asym > hermiticity_tol) {
    std::ostringstream os;
    os << "vectorize: density matrix is not Hermitian (asymmetry " << asym << ")";
    throw std::invalid_argument(os.str());
  }
  const Eigen::Index d = rho.rows();
  DoubledVector v{VectorXc(d * d), d};
  for (Eigen::Index s = 0; s < d; ++s) {
    for (Eigen::Index t = 0; t < d; ++t) v.data(s * d + t) = rho(s, t);
  }
  return v;
}

MatrixXc devectorize(const VectorXc& v) {
  const Eigen::Index d = check_square_dim(v.size());
  MatrixXc rho(d, d);
  for (Eigen::Index s = 0; s < d; ++s) {
    for (Eigen::Index t = 0; t < d; ++t) rho(s, t) = v(s * d + t);
  }
  return rho;
}

MatrixXc devectorize(const DoubledVector& v) { return devectorize(v.data); }

Liouvillian build_liouvillian(const SparseOperator& H, const std::vector<SparseOperator>& jumps, double gamma) {
  if (H.rows() != H.cols()) throw std::invalid_argument("build_liouvillian: H must be square");
  if (gamma < 0.0) throw std::invalid_argument("build_liouvillian: gamma must be non-negative");
  const Eigen::Index d = H.rows();
  const SparseOperator id = sparse_identity(d);

  Liouvillian L;
  L.gamma = gamma;
  L.hilbert_dim = d;
  const SparseOperator Ht = H.transpose();
  L.unitary = cplx{0.0, -1.0} * (kron(H, id) - kron(id, Ht));

  L.dissipative = SparseOperator(d * d, d * d);
  for (std::size_t j = 0; j < jumps.size(); ++j) {
    const auto& Lj = jumps[j];
    if (Lj.rows() != d || Lj.cols() != d) {
      throw std::invalid_argument("build_liouvillian: jump " + std::to_string(j + 1) + " has dimension " +
                                  std::to_string(Lj.rows()) + ", H has " + std::to_string(d));
    }
    if (!is_hermitian(Lj)) throw std::invalid_argument("build_liouvillian: jump " + std::to_string(j + 1) + " is not Hermitian");
    const SparseOperator conj = Lj.conjugate();
    const SparseOperator LdL = SparseOperator(Lj.adjoint()) * Lj;
    const SparseOperator LtLc = SparseOperator(Lj.transpose()) * conj;
    L.dissipative += (0.5 * gamma) * (2.0 * kron(Lj, conj) - kron(LdL, id) - kron(id, LtLc));
  }
  L.dissipative.prune(cplx{0.0});
  L.total = L.unitary + L.dissipative;
  L.zero_threshold = 1e-10 * std::max(gamma, row_sum_norm(H));
  if (L.zero_threshold == 0.0) L.zero_threshold = 1e-10;
  return L;
}

MatrixXc apply_gksl(const MatrixXc& H, const std::vector<MatrixXc>& jumps, double gamma, const MatrixXc& rho) {
  MatrixXc out = cplx{0.0, -1.0} * (H * rho - rho * H);
  for (const auto& L : jumps) {
    const MatrixXc LdL = L.adjoint() * L;
    out += gamma * (L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL));
  }
  return out;
}

VectorXc LiouvilleSpectrum::coefficients(const VectorXc& rho0) const { return left.adjoint() * rho0; }

VectorXc LiouvilleSpectrum::propagate(const VectorXc& rho0, double t) const {
  const VectorXc c = coefficients(rho0);
  VectorXc phase(c.size());
  for (Eigen::Index a = 0; a < c.size(); ++a) phase(a) = c(a) * std::exp(eigenvalues(a) * t);
  return right * phase;
}

LiouvilleSpectrum spectrum(const Liouvillian& L, Eigen::Index max_dim) {
  const Eigen::Index n = L.total.rows();
  if (n > max_dim) {
    throw std::invalid_argument("spectrum: doubled dimension " + std::to_string(n) + " exceeds the dense limit " +
                                std::to_string(max_dim) + "; use slow_modes for extremal eigenvalues");
  }
  const MatrixXc dense = MatrixXc(L.total);
  Eigen::ComplexEigenSolver<MatrixXc> es(dense, true);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver did not converge");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto& ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const bool za = std::abs(ev(a)) < L.zero_threshold;
    const bool zb = std::abs(ev(b)) < L.zero_threshold;
    if (za != zb) return za;
    if (ev(a).real() != ev(b).real()) return ev(a).real() > ev(b).real();
    return std::abs(ev(a).imag()) < std::abs(ev(b).imag());
  });

  LiouvilleSpectrum out;
  out.eigenvalues.resize(n);
  out.right.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = ev(order[static_cast<std::size_t>(k)]);
    out.right.col(k) = es.eigenvectors().col(order[static_cast<std::size_t>(k)]).normalized();
  }

  // Dual basis: rows of V^{-1} (pseudo-inverse when singular) give <<left_a| with
  // <<left_a|right_b>> = delta_ab, including inside degenerate clusters.
  MatrixXc dual;
  Eigen::FullPivLU<MatrixXc> lu(out.right);
  if (lu.isInvertible()) {
    dual = lu.inverse();
  } else {
    dual = out.right.completeOrthogonalDecomposition().pseudoInverse();
  }
  out.left = dual.adjoint();
  out.biorthogonality_residual = (dual * out.right - MatrixXc::Identity(n, n)).cwiseAbs().maxCoeff();

  const MatrixXc LdagLeft = dense.adjoint() * out.left;
  double worst = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    const double scale = std::max(1.0, out.left.col(a).norm());
    const double r = (LdagLeft.col(a) - std::conj(out.eigenvalues(a)) * out.left.col(a)).norm() / scale;
    worst = std::max(worst, r);
  }
  out.left_residual = worst;
  const double scale = std::max(1.0, L.zero_threshold * 1e10);
  out.jordan_warning = out.biorthogonality_residual > 1e-6 || out.left_residual > 1e-6 * scale;

  for (Eigen::Index a = 0; a < n; ++a) {
    if (std::abs(out.eigenvalues(a)) < L.zero_threshold) ++out.stationary_dim;
  }
  return out;
}

SlowModes slow_modes(const Liouvillian& L, int count, double tol) {
  const Eigen::Index n = L.total.rows();
  if (count < 1 || count > n) throw std::invalid_argument("slow_modes: count out of range");
  const double scale = L.zero_threshold * 1e10;
  const cplx shift{1e-3 * scale, 0.0};

  Eigen::SparseMatrix<cplx> shifted = L.total.cast<cplx>();
  Eigen::SparseMatrix<cplx> id(n, n);
  id.setIdentity();
  shifted -= shift * id;
  shifted.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.analyzePattern(shifted);
  lu.factorize(shifted);
  if (lu.info() != Eigen::Success) throw std::runtime_error("slow_modes: factorization of L - sigma failed");

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  VectorXc start(n);
  for (Eigen::Index i = 0; i < n; ++i) start(i) = cplx{normal(rng), normal(rng)};

  SlowModes out;
  int m = static_cast<int>(std::min<Eigen::Index>(n, std::max(2 * count + 20, 40)));
  while (true) {
    MatrixXc V(n, m + 1);
    MatrixXc Hm = MatrixXc::Zero(m + 1, m);
    V.col(0) = start.normalized();
    int built = m;
    for (int j = 0; j < m; ++j) {
      VectorXc w = lu.solve(V.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        const VectorXc h = V.leftCols(j + 1).adjoint() * w;
        w -= V.leftCols(j + 1) * h;
        Hm.col(j).head(j + 1) += h;
      }
      const double nrm = w.norm();
      Hm(j + 1, j) = nrm;
      if (nrm < 1e-14 * Hm.col(j).norm()) {
        built = j + 1;
        break;
      }
      V.col(j + 1) = w / nrm;
    }
    Eigen::ComplexEigenSolver<MatrixXc> es(Hm.topLeftCorner(built, built), true);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(built));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
    });
    const int take = std::min(count, built);
    out.eigenvalues.resize(take);
    out.vectors.resize(n, take);
    out.residuals.resize(take);
    for (int k = 0; k < take; ++k) {
      const auto idx = order[static_cast<std::size_t>(k)];
      const cplx lambda = shift + 1.0 / es.eigenvalues()(idx);
      const VectorXc x = (V.leftCols(built) * es.eigenvectors().col(idx)).normalized();
      out.eigenvalues(k) = lambda;
      out.vectors.col(k) = x;
      out.residuals(k) = (L.total * x - lambda * x).norm();
    }
    out.krylov_dim = built;
    out.converged = take == count && (out.residuals.size() == 0 || out.residuals.maxCoeff() <= tol * std::max(1.0, scale));
    if (out.converged || built < m || m >= n) break;
    m = static_cast<int>(std::min<Eigen::Index>(n, 2 * m));
  }
  // Sort by descending real part, matching the dense ordering.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(out.eigenvalues.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return out.eigenvalues(a).real() > out.eigenvalues(b).real();
  });
  SlowModes sorted = out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto src = order[k];
    sorted.eigenvalues(static_cast<Eigen::Index>(k)) = out.eigenvalues(src);
    sorted.vectors.col(static_cast<Eigen::Index>(k)) = out.vectors.col(src);
    sorted.residuals(static_cast<Eigen::Index>(k)) = out.residuals(src);
  }
  return sorted;
}

StationaryBasis stationary_states(const Liouvillian& L, Eigen::Index max_dim) {
  const Eigen::Index n = L.total.rows();
  if (n > max_dim) {
    throw std::invalid_argument("stationary_states: doubled dimension " + std::to_string(n) +
                                " exceeds the dense limit " + std::to_string(max_dim));
  }
  const MatrixXc dense = MatrixXc(L.total);
  Eigen::BDCSVD<MatrixXc> svd(dense, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  std::vector<Eigen::Index> kernel;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) < L.zero_threshold) kernel.push_back(k);
  }
  StationaryBasis out;
  out.vectors.resize(n, static_cast<Eigen::Index>(kernel.size()));
  out.residuals.resize(static_cast<Eigen::Index>(kernel.size()));
  for (std::size_t k = 0; k < kernel.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    out.vectors.col(col) = svd.matrixV().col(kernel[k]);
    out.residuals(col) = (L.total * out.vectors.col(col)).norm();
  }
  return out;
}

Trajectory evolve(const Liouvillian& L, const MatrixXc& rho0, const std::vector<double>& times,
                  const EvolveOptions& opts) {
  if (times.empty()) throw std::invalid_argument("evolve: empty time grid");
  if (times.front() < 0.0) throw std::invalid_argument("evolve: time grid must start at t >= 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (times[k] < times[k - 1]) throw std::invalid_argument("evolve: time grid must be ascending");
  }
  if (rho0.rows() != L.hilbert_dim) throw std::invalid_argument("evolve: rho0 dimension mismatch");

  Trajectory traj;
  traj.min_eigenvalue = std::numeric_limits<double>::infinity();
  VectorXc v = vectorize(rho0).data;
  double t_prev = 0.0;
  for (const double t : times) {
    if (t > t_prev) {
      ExpvStats stats;
      v = expv(t - t_prev, L.total, v, opts.tol, opts.krylov_dim, &stats);
      traj.krylov_steps += stats.steps;
      traj.rejections += stats.rejections;
    }
    t_prev = t;
    MatrixXc rho = devectorize(v);
    traj.max_trace_error = std::max(traj.max_trace_error, std::abs(rho.trace() - cplx{1.0}));
    traj.max_hermiticity_error =
        std::max(traj.max_hermiticity_error, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    const MatrixXc herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(herm, Eigen::EigenvaluesOnly);
    traj.min_eigenvalue = std::min(traj.min_eigenvalue, es.eigenvalues().minCoeff());
    traj.times.push_back(t);
    traj.states.push_back(std::move(rho));
  }
  return traj;
}

double expect_bond_dw(const MatrixXc& rho, int bond) {
  const int n = sites_from_dim(rho.rows());
  if (bond < 1 || bond >= n) {
    throw std::out_of_range("bond " + std::to_string(bond) + " outside 1.." + std::to_string(n - 1));
  }
  double acc = 0.0;
  for (Eigen::Index b = 0; b < rho.rows(); ++b) {
    const BasisState s{static_cast<std::uint64_t>(b), n};
    if (s.spin(bond) == 0 && s.spin(bond + 1) == 1) acc += rho(b, b).real();
  }
  return acc;
}

}  // namespace kcm
