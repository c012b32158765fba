#include <doctest.h>

#include "kcm/dfs.hpp"
#include "kcm/liouville.hpp"
#include "kcm/perturb2.hpp"
#include "kcm/spin_ops.hpp"

using namespace kcm;

namespace {

SparseOperator chain(int n, double h = 0.0, double V = 0.0) {
  HamiltonianSpec s;
  s.n_sites = n;
  s.h = h;
  s.V = V;
  return build_hamiltonian(s);
}

StatePair pair(const char* a, const char* b) { return {BasisState::from_string(a), BasisState::from_string(b)}; }

}  // namespace

TEST_CASE("dissipator eigenvalues and lambda classes") {
  const Classification cls = classify_basis(build_jump_set(JumpKind::QP, 3));
  CHECK(dissipator_eigenvalue(cls, pair("000", "000"), 2.0) == 0.0);
  CHECK(dissipator_eigenvalue(cls, pair("100", "000"), 2.0) == -1.0);
  CHECK(dissipator_eigenvalue(cls, pair("100", "010"), 2.0) == -2.0);
  CHECK(lambda_class(cls, pair("100", "000"), 2.0) == -1.0);
  CHECK_THROWS_AS(lambda_class(cls, pair("011", "000"), 2.0), std::invalid_argument);
}

TEST_CASE("closed form equals the matrix oracle") {
  for (const auto kind : {JumpKind::QP, JumpKind::QQ}) {
    for (int n = 2; n <= 4; ++n) {
      const auto H = chain(n, 0.6, 0.4);
      const Classification cls = classify_basis(build_jump_set(kind, n));
      const auto closed = second_order_liouvillian(H, cls, 30.0);
      const auto oracle = second_order_oracle(H, cls, 30.0);
      CHECK(closed.rows.size() == cls.stationary_dimension());
      CHECK((n == 2) == (closed.max_abs() == 0.0));
      CHECK(compare_second_order(closed, oracle) <= 1e-12);
    }
  }
}

TEST_CASE("second order scales as 1/gamma") {
  const auto H = chain(3);
  const Classification cls = classify_basis(build_jump_set(JumpKind::QP, 3));
  const double a = second_order_liouvillian(H, cls, 10.0).max_abs();
  const double b = second_order_liouvillian(H, cls, 100.0).max_abs();
  CHECK(a / b == doctest::Approx(10.0));
}

TEST_CASE("per-sector columns are a slice of the full block") {
  const auto H = chain(4, 0.3);
  const Classification cls = classify_basis(build_jump_set(JumpKind::QP, 4));
  const auto full = second_order_liouvillian(H, cls, 10.0);
  for (const auto& sec : cls.sectors) {
    const auto part = second_order_liouvillian(H, cls, 10.0, sec.key);
    CHECK(part.cols.size() == sec.dim() * sec.dim());
    for (std::size_t c = 0; c < part.cols.size(); ++c) {
      const auto fc = std::find(full.cols.begin(), full.cols.end(), part.cols[c]) - full.cols.begin();
      for (std::size_t r = 0; r < part.rows.size(); ++r) {
        const auto fr = std::find(full.rows.begin(), full.rows.end(), part.rows[r]) - full.rows.begin();
        CHECK(part.matrix.coeff(static_cast<std::int64_t>(r), static_cast<std::int64_t>(c)) ==
              full.matrix.coeff(fr, fc));
      }
    }
  }
}

TEST_CASE("lambda scan finds only -1 and -2") {
  for (const auto kind : {JumpKind::QP, JumpKind::QQ}) {
    for (int n = 2; n <= 4; ++n) {
      const auto scan = scan_lambda_classes(classify_basis(build_jump_set(kind, n)), 1.0);
      CHECK(scan.other == 0);
      CHECK(scan.intermediates == scan.minus_one + scan.minus_two);
      CHECK(scan.minus_one > 0);
    }
  }
}

TEST_CASE("perturbative generator reproduces the slow Liouville spectrum") {
  const int n = 3;
  const double gamma = 400.0;
  const auto H = chain(n, 0.5);
  const auto jumps = build_jump_set(JumpKind::QP, n);
  const Classification cls = classify_basis(jumps);
  const Liouvillian L = build_liouvillian(H, jumps, gamma);
  const auto second = second_order_liouvillian(H, cls, gamma);
  const auto dim = static_cast<Eigen::Index>(second.rows.size());
  const MatrixXc LH = MatrixXc(L.unitary);
  const auto d = static_cast<Eigen::Index>(hilbert_dim(n));
  MatrixXc gen = MatrixXc(second.matrix);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto& pr = second.rows[static_cast<std::size_t>(r)];
      const auto& pc = second.cols[static_cast<std::size_t>(c)];
      gen(r, c) += LH(static_cast<Eigen::Index>(pr.first.index()) * d + static_cast<Eigen::Index>(pr.second.index()),
                      static_cast<Eigen::Index>(pc.first.index()) * d + static_cast<Eigen::Index>(pc.second.index()));
    }
  }
  const VectorXc approx = Eigen::ComplexEigenSolver<MatrixXc>(gen, false).eigenvalues();
  const LiouvilleSpectrum sp = spectrum(L);
  int slow = 0;
  for (Eigen::Index k = 0; k < sp.eigenvalues.size(); ++k) slow += std::abs(sp.eigenvalues(k)) < gamma / 4;
  CHECK(slow == dim);
  for (Eigen::Index k = 0; k < approx.size(); ++k) {
    double best = 1e300;
    for (Eigen::Index j = 0; j < sp.eigenvalues.size(); ++j) best = std::min(best, std::abs(sp.eigenvalues(j) - approx(k)));
    CHECK(best <= 1e-4);
  }
}

TEST_CASE("validity times") {
  const auto v = validity_time(1.0, 1000.0, 10);
  CHECK(v.conservative == doctest::Approx(10.0));
  CHECK(v.conjectured == doctest::Approx(1000.0));
}

TEST_CASE("first-order evolution") {
  const int n = 3;
  const auto H = chain(n);
  const Classification cls = classify_basis(build_jump_set(JumpKind::QP, n));
  VectorXc psi = VectorXc::Zero(8);
  psi(0) = psi(4) = 1.0 / std::sqrt(2.0);
  const MatrixXc rho0 = psi * psi.adjoint();
  const MatrixXc at0 = first_order_evolve(H, cls, rho0, 0.0);
  CHECK((at0 - rho0).norm() <= 1e-14);
  const MatrixXc later = first_order_evolve(H, cls, rho0, 1.7);
  CHECK(later.trace().real() == doctest::Approx(1.0));
  CHECK((later - later.adjoint()).norm() <= 1e-13);
  const MatrixXc mixed = MatrixXc::Identity(8, 8) / 8.0;
  CHECK((first_order_evolve(H, cls, mixed, 2.0) - mixed).norm() <= 1e-13);
}

TEST_CASE("first-order error shrinks with gamma") {
  const int n = 3;
  VectorXc psi = VectorXc::Zero(8);
  psi(0) = psi(4) = 1.0 / std::sqrt(2.0);
  const auto rows = first_order_error_scaling(chain(n), build_jump_set(JumpKind::QP, n), psi * psi.adjoint(), 2.0,
                                              {100.0, 1000.0});
  REQUIRE(rows.size() == 2);
  const double ratio = rows[0].trace_distance / rows[1].trace_distance;
  CHECK(ratio >= 6.0);
  CHECK(ratio <= 14.0);
}
