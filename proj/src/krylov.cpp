#include "kcm/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace kcm {

namespace {

double round_step(double t) {
  const double s = std::pow(10.0, std::floor(std::log10(t)) - 1.0);
  return std::ceil(t / s) * s;
}

double inf_norm(const SparseOperator& A) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
  for (std::int64_t k = 0; k < A.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(A, k); it; ++it) rows(it.row()) += std::abs(it.value());
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

VectorXc expv(double t, const SparseOperator& A, const VectorXc& v, double tol, int krylov_dim, ExpvStats* stats) {
  if (A.rows() != A.cols() || A.cols() != v.size()) throw std::invalid_argument("expv: dimension mismatch");
  if (t < 0.0) throw std::invalid_argument("expv: negative time");
  ExpvStats local;
  const double beta0 = v.norm();
  const double anorm = inf_norm(A);
  if (t == 0.0 || beta0 == 0.0 || anorm == 0.0) {
    if (stats) *stats = local;
    return v;
  }

  const Eigen::Index n = v.size();
  const int m = static_cast<int>(std::min<Eigen::Index>(krylov_dim, n));
  constexpr int kMaxReject = 10;
  constexpr double kBreakdown = 1e-7;
  constexpr double kSafety = 0.9;
  constexpr double kDelta = 1.2;
  const double rndoff = anorm * std::numeric_limits<double>::epsilon();

  double beta = beta0;
  double xm = 1.0 / m;
  const double fact = std::pow((m + 1) / std::numbers::e, m + 1) * std::sqrt(2.0 * std::numbers::pi * (m + 1));
  double t_new = (1.0 / anorm) * std::pow((fact * tol) / (4.0 * beta * anorm), xm);
  t_new = round_step(t_new);

  VectorXc w = v;
  double t_now = 0.0;
  MatrixXc V(n, m + 1);
  MatrixXc H = MatrixXc::Zero(m + 2, m + 2);

  while (t_now < t) {
    ++local.steps;
    double t_step = std::min(t - t_now, t_new);
    H.setZero();
    V.col(0) = w / beta;
    int mb = m;
    int k1 = 2;
    for (int j = 0; j < m; ++j) {
      VectorXc p = A * V.col(j);
      ++local.matvecs;
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V.col(i).dot(p);
        p -= H(i, j) * V.col(i);
      }
      const double s = p.norm();
      if (s < 1e-10 * anorm) {
        // Invariant subspace found: the remaining interval is exact.
        k1 = 0;
        mb = j + 1;
        t_step = t - t_now;
        break;
      }
      H(j + 1, j) = s;
      V.col(j + 1) = p / s;
    }
    double avnorm = 0.0;
    if (k1 != 0) {
      H(m + 1, m) = 1.0;
      avnorm = (A * V.col(m)).norm();
      ++local.matvecs;
    }

    MatrixXc F;
    double err_loc = 0.0;
    int ireject = 0;
    while (true) {
      const int mx = mb + k1;
      F = (t_step * H.topLeftCorner(mx, mx)).exp();
      if (k1 == 0) {
        err_loc = kBreakdown;
        break;
      }
      const double phi1 = std::abs(beta * F(m, 0));
      const double phi2 = std::abs(beta * F(m + 1, 0) * avnorm);
      if (phi1 > 10.0 * phi2) {
        err_loc = phi2;
        xm = 1.0 / m;
      } else if (phi1 > phi2) {
        err_loc = (phi1 * phi2) / (phi1 - phi2);
        xm = 1.0 / m;
      } else {
        err_loc = phi1;
        xm = 1.0 / (m - 1);
      }
      if (err_loc <= kDelta * t_step * tol) break;
      if (++ireject > kMaxReject) {
        throw std::runtime_error("expv: step size rejected repeatedly; requested tolerance is too small");
      }
      ++local.rejections;
      t_step = round_step(kSafety * t_step * std::pow(t_step * tol / err_loc, xm));
    }

    const int mx = mb + std::max(0, k1 - 1);
    w = V.leftCols(mx) * (beta * F.col(0).head(mx));
    beta = w.norm();
    t_now += t_step;
    t_new = round_step(kSafety * t_step * std::pow(t_step * tol / std::max(err_loc, rndoff), xm));
    local.error_estimate += std::max(err_loc, rndoff);
    if (beta == 0.0) break;
  }
  if (stats) *stats = local;
  return w;
}

}  // namespace kcm
