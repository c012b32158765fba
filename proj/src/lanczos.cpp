#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "kcm/spectral.hpp"

namespace kcm {

namespace {

using SparseD = Eigen::SparseMatrix<double>;
using Ldlt = Eigen::SimplicialLDLT<SparseD, Eigen::Lower, Eigen::AMDOrdering<int>>;

SparseD shifted(const SparseReal& H, double sigma) {
  SparseD A = H.cast<double>();
  SparseD id(A.rows(), A.cols());
  id.setIdentity();
  A -= sigma * id;
  A.makeCompressed();
  return A;
}

void factor(Ldlt& ldlt, const SparseReal& H, double sigma) {
  ldlt.compute(shifted(H, sigma));
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("LDL^T factorization of H - sigma failed");
}

Eigen::Index negatives(const Ldlt& ldlt) { return (ldlt.vectorD().array() < 0.0).count(); }

double inf_norm(const SparseReal& H) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(H.rows());
  for (std::int64_t k = 0; k < H.outerSize(); ++k) {
    for (SparseReal::InnerIterator it(H, k); it; ++it) rows(it.row()) += std::abs(it.value());
  }
  return rows.maxCoeff();
}

struct RitzPair {
  double value;
  Eigen::VectorXd vector;
  double residual;
};

// Shift-invert Lanczos on (H - sigma)^{-1}, orthogonal to the columns of `locked`.
// Returns up to `want` Ritz pairs nearest sigma whose residuals are below tol.
std::vector<RitzPair> lanczos_near(const SparseReal& H, const Ldlt& ldlt, double sigma, Eigen::Index want,
                                   const Eigen::MatrixXd& locked, double tol, double hnorm, std::mt19937_64& rng) {
  const Eigen::Index n = H.rows();
  const Eigen::Index free_dim = n - locked.cols();
  if (free_dim <= 0) return {};
  want = std::min(want, free_dim);

  auto project = [&](Eigen::VectorXd& w, const Eigen::MatrixXd& V, Eigen::Index cols) {
    for (int pass = 0; pass < 2; ++pass) {
      if (locked.cols() > 0) w -= locked * (locked.transpose() * w);
      if (cols > 0) w -= V.leftCols(cols) * (V.leftCols(cols).transpose() * w);
    }
  };

  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);

  Eigen::Index cap = std::min(free_dim, std::max<Eigen::Index>(2 * want + 40, 80));
  Eigen::MatrixXd V(n, cap);
  std::vector<double> alpha;
  std::vector<double> beta;
  project(v, V, 0);
  V.col(0) = v.normalized();
  Eigen::Index m = 0;
  bool exhausted = false;

  while (true) {
    for (; m < cap; ++m) {
      Eigen::VectorXd w = ldlt.solve(V.col(m));
      const double a = V.col(m).dot(w);
      w -= a * V.col(m);
      if (m > 0) w -= beta.back() * V.col(m - 1);
      project(w, V, m + 1);
      alpha.push_back(a);
      const double b = w.norm();
      if (m + 1 >= free_dim || b < 1e-14 * std::abs(a)) {
        beta.push_back(0.0);
        ++m;
        exhausted = true;
        break;
      }
      beta.push_back(b);
      if (m + 1 < cap) V.col(m + 1) = w / b;
      else {
        V.conservativeResize(Eigen::NoChange, cap + 1);
        V.col(m + 1) = w / b;
      }
    }

    Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd e = Eigen::Map<Eigen::VectorXd>(beta.data(), std::max<Eigen::Index>(m - 1, 0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    const Eigen::VectorXd& theta = tri.eigenvalues();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return std::abs(theta(a)) > std::abs(theta(b)); });

    const Eigen::Index take = std::min(want, m);
    const double tail = beta.empty() ? 0.0 : beta.back();
    bool all_small = true;
    for (Eigen::Index k = 0; k < take; ++k) {
      const auto idx = order[static_cast<std::size_t>(k)];
      const double est = std::abs(tail * tri.eigenvectors()(m - 1, idx)) * (hnorm + std::abs(sigma)) / std::abs(theta(idx));
      if (est > 0.1 * tol) all_small = false;
    }
    if (all_small || exhausted || m >= free_dim) {
      std::vector<RitzPair> out;
      for (Eigen::Index k = 0; k < take; ++k) {
        const auto idx = order[static_cast<std::size_t>(k)];
        Eigen::VectorXd x = V.leftCols(m) * tri.eigenvectors().col(idx);
        x.normalize();
        const double lambda = sigma + 1.0 / theta(idx);
        const double res = (H * x - lambda * x).norm();
        if (res <= tol) out.push_back({lambda, std::move(x), res});
      }
      if (static_cast<Eigen::Index>(out.size()) == take || exhausted || m >= free_dim) return out;
    }
    const Eigen::Index grow = std::min(free_dim, cap + std::max<Eigen::Index>(want, 40));
    if (grow == cap) return {};
    V.conservativeResize(Eigen::NoChange, std::max(grow, V.cols()));
    cap = grow;
  }
}

}  // namespace

Eigen::Index count_below(const SparseReal& H, double sigma) {
  Ldlt ldlt;
  factor(ldlt, H, sigma);
  return negatives(ldlt);
}

EigenDecomposition middle_window(const SparseReal& H, Eigen::Index count, const WindowOptions& opts) {
  const Eigen::Index dim = H.rows();
  const auto [first, last] = middle_window_range(dim, count);
  if (dim <= opts.dense_limit) {
    EigenDecomposition full = diagonalize(H);
    EigenDecomposition win;
    win.values = full.values.segment(first, count);
    win.vectors = full.vectors.middleCols(first, count);
    win.offset = first;
    win.full_dim = dim;
    win.method = "dense";
    const Eigen::MatrixXd R = H * win.vectors - win.vectors * win.values.asDiagonal();
    win.max_residual = R.colwise().norm().maxCoeff();
    win.orthogonality_error =
        (win.vectors.transpose() * win.vectors - Eigen::MatrixXd::Identity(count, count)).cwiseAbs().maxCoeff();
    return win;
  }

  const double hnorm = inf_norm(H);
  // Bisection for a shift with floor((first + last) / 2) eigenvalues below it.
  const Eigen::Index target = (first + last) / 2;
  double lo = -hnorm - 1.0;
  double hi = hnorm + 1.0;
  double sigma = 0.5 * (lo + hi);
  Ldlt ldlt;
  Eigen::Index below = 0;
  for (int it = 0; it < 200; ++it) {
    sigma = 0.5 * (lo + hi);
    factor(ldlt, H, sigma);
    below = negatives(ldlt);
    if (below == target) break;
    if (below < target) lo = sigma;
    else hi = sigma;
    if (hi - lo < 1e-12 * hnorm) break;
  }

  std::mt19937_64 rng(opts.seed);
  Eigen::Index want = count + std::max<Eigen::Index>(count / 2, 20);
  std::vector<RitzPair> found;
  Eigen::MatrixXd locked(dim, 0);
  for (int round = 0; round < 8; ++round) {
    auto fresh = lanczos_near(H, ldlt, sigma, want - static_cast<Eigen::Index>(found.size()), locked, opts.tol, hnorm, rng);
    if (fresh.empty() && found.empty()) throw std::runtime_error("middle_window: Lanczos found no converged eigenpairs");
    for (auto& p : fresh) found.push_back(std::move(p));
    std::sort(found.begin(), found.end(), [](const RitzPair& a, const RitzPair& b) { return a.value < b.value; });

    // Keep the contiguous block around sigma and check it against inertia counts.
    const auto n_found = static_cast<Eigen::Index>(found.size());
    const auto n_below = static_cast<Eigen::Index>(
        std::count_if(found.begin(), found.end(), [&](const RitzPair& p) { return p.value < sigma; }));
    const double gap_pad = 1e-9 * std::max(1.0, hnorm);
    const Eigen::Index c_lo = count_below(H, found.front().value - gap_pad);
    const Eigen::Index c_hi = count_below(H, found.back().value + gap_pad);
    const bool complete = (c_hi - c_lo == n_found) && (c_lo == below - n_below);
    if (complete && c_lo <= first && c_hi >= last) {
      EigenDecomposition win;
      win.values.resize(count);
      win.vectors.resize(dim, count);
      for (Eigen::Index k = 0; k < count; ++k) {
        const auto& p = found[static_cast<std::size_t>(first - c_lo + k)];
        win.values(k) = p.value;
        win.vectors.col(k) = p.vector;
        win.max_residual = std::max(win.max_residual, p.residual);
      }
      win.offset = first;
      win.full_dim = dim;
      win.method = "shift-invert Lanczos";
      win.orthogonality_error =
          (win.vectors.transpose() * win.vectors - Eigen::MatrixXd::Identity(count, count)).cwiseAbs().maxCoeff();
      return win;
    }
    if (!complete) {
      // Missing copies inside the block (multiplicities): search again orthogonally to what is known.
      locked.resize(dim, n_found);
      for (Eigen::Index k = 0; k < n_found; ++k) locked.col(k) = found[static_cast<std::size_t>(k)].vector;
      want = n_found + std::max<Eigen::Index>(count / 4, 10);
    } else {
      want = n_found + std::max<Eigen::Index>(count / 2, 20);
      locked.resize(dim, n_found);
      for (Eigen::Index k = 0; k < n_found; ++k) locked.col(k) = found[static_cast<std::size_t>(k)].vector;
    }
  }
  throw std::runtime_error("middle_window: could not confirm the eigenvalue count of the window");
}

}  // namespace kcm
