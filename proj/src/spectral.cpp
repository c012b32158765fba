#include "kcm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace kcm {

namespace {

template <class Vec>
double ipr_impl(const Vec& state, double tol) {
  const double norm = state.norm();
  if (std::abs(norm - 1.0) > tol) {
    throw std::invalid_argument("ipr: state norm " + std::to_string(norm) + " differs from 1");
  }
  double acc = 0.0;
  for (Eigen::Index k = 0; k < state.size(); ++k) {
    const double p = std::norm(state(k));
    acc += p * p;
  }
  return acc;
}

}  // namespace

EigenDecomposition diagonalize(const SparseReal& H) {
  const Eigen::MatrixXd dense = Eigen::MatrixXd(H);
  if ((dense - dense.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("diagonalize: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  if (es.info() != Eigen::Success) throw std::runtime_error("diagonalize: eigensolver did not converge");
  EigenDecomposition dec;
  dec.values = es.eigenvalues();
  dec.vectors = es.eigenvectors();
  dec.full_dim = H.rows();
  dec.method = "dense";
  const Eigen::MatrixXd R = H * dec.vectors - dec.vectors * dec.values.asDiagonal();
  dec.max_residual = R.colwise().norm().maxCoeff();
  dec.orthogonality_error =
      (dec.vectors.transpose() * dec.vectors - Eigen::MatrixXd::Identity(dec.size(), dec.size())).cwiseAbs().maxCoeff();
  return dec;
}

std::pair<Eigen::Index, Eigen::Index> middle_window_range(Eigen::Index dim, Eigen::Index count) {
  if (count < 1 || count > dim) throw std::invalid_argument("middle window size must be in 1..D");
  const Eigen::Index first = dim / 2 - count / 2;
  return {first, first + count};
}

double ipr(const Eigen::VectorXd& state, double tol) { return ipr_impl(state, tol); }
double ipr(const VectorXc& state, double tol) { return ipr_impl(state, tol); }

IprReport mean_ipr_window(const EigenDecomposition& dec, Eigen::Index window) {
  const auto [first, last] = middle_window_range(dec.full_dim, window);
  if (!dec.holds(first) || !dec.holds(last - 1)) {
    throw std::invalid_argument("mean_ipr_window: decomposition does not cover the middle window");
  }
  IprReport rep;
  rep.first = first;
  for (Eigen::Index n = first; n < last; ++n) rep.values.push_back(ipr(Eigen::VectorXd(dec.vectors.col(n - dec.offset))));
  double acc = 0.0;
  for (const double v : rep.values) acc += v;
  rep.mean = acc / static_cast<double>(rep.values.size());
  return rep;
}

std::vector<OverlapRow> overlap_spectrum(Eigen::Index initial, const EigenDecomposition& dec) {
  if (!dec.complete()) throw std::invalid_argument("overlap_spectrum: needs the full spectrum");
  if (initial < 0 || initial >= dec.full_dim) throw std::out_of_range("overlap_spectrum: initial index out of range");
  std::vector<OverlapRow> rows;
  rows.reserve(static_cast<std::size_t>(dec.size()));
  for (Eigen::Index n = 0; n < dec.size(); ++n) {
    const double amp = dec.vectors(initial, n);
    rows.push_back({dec.values(n), amp * amp, ipr(Eigen::VectorXd(dec.vectors.col(n)))});
  }
  return rows;
}

OccupationTable evolve_state(const EigenDecomposition& dec, const FermionModel& model, const VectorXc& psi0,
                             const std::vector<double>& times) {
  if (!dec.complete()) throw std::invalid_argument("evolve_state: needs the full spectrum");
  if (psi0.size() != dec.full_dim || model.dim() != dec.full_dim) {
    throw std::invalid_argument("evolve_state: dimension mismatch between state, model and decomposition");
  }
  const VectorXc coeff = dec.vectors.transpose().cast<cplx>() * psi0;
  const double n0 = psi0.squaredNorm() * model.particles();

  OccupationTable table;
  table.times = times;
  table.occupation = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(times.size()), model.occupation_columns());
  for (std::size_t k = 0; k < times.size(); ++k) {
    VectorXc phased(coeff.size());
    for (Eigen::Index n = 0; n < coeff.size(); ++n) phased(n) = coeff(n) * std::exp(cplx{0.0, -dec.values(n) * times[k]});
    const VectorXc psi = dec.vectors.cast<cplx>() * phased;
    for (Eigen::Index b = 0; b < psi.size(); ++b) {
      const double p = std::norm(psi(b));
      for (const int col : model.occupied_columns(b)) table.occupation(static_cast<Eigen::Index>(k), col) += p;
    }
    table.max_number_drift =
        std::max(table.max_number_drift, std::abs(table.occupation.row(static_cast<Eigen::Index>(k)).sum() - n0));
  }
  return table;
}

ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("scaling_fit: need at least 3 points");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto [x, v] = points[static_cast<std::size_t>(k)];
    if (x <= 0.0 || v <= 0.0) throw std::invalid_argument("scaling_fit: inputs must be positive");
    A(k, 0) = std::log(x);
    A(k, 1) = 1.0;
    y(k) = std::log(v);
  }
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(y);
  ScalingFit fit;
  fit.slope = coef(0);
  fit.intercept = coef(1);
  fit.residual = std::sqrt((A * coef - y).squaredNorm() / static_cast<double>(n));
  return fit;
}

Eigen::MatrixXd eigenstate_heatmap(const EigenDecomposition& dec, const FermionModel& model, Eigen::Index n) {
  if (model.mode != FermionMode::coupled_ladder) throw std::invalid_argument("eigenstate_heatmap: ladder model required");
  if (model.dim() != dec.full_dim) throw std::invalid_argument("eigenstate_heatmap: model and decomposition differ");
  if (!dec.holds(n)) throw std::out_of_range("eigenstate_heatmap: eigenstate not in decomposition");
  const int L = model.n_modes();
  Eigen::MatrixXd grid(L, L);
  const auto v = dec.vectors.col(n - dec.offset);
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) grid(a, b) = v(static_cast<Eigen::Index>(a) * L + b) * v(static_cast<Eigen::Index>(a) * L + b);
  }
  return grid;
}

Eigen::Index support_count(const Eigen::MatrixXd& weights, double fraction) {
  std::vector<double> w(weights.data(), weights.data() + weights.size());
  std::sort(w.begin(), w.end(), std::greater<>());
  const double total = weights.sum();
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    acc += w[k];
    if (acc >= fraction * total) return static_cast<Eigen::Index>(k + 1);
  }
  return static_cast<Eigen::Index>(w.size());
}

}  // namespace kcm
