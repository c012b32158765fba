#include <doctest.h>

#include <set>

#include "kcm/dfs.hpp"
#include "kcm/liouville.hpp"

using namespace kcm;

namespace {

// Jump eigenvalues straight from the bit patterns, independent of the operator matrices.
std::vector<int> f_values(BasisState s, JumpKind kind) {
  std::vector<int> f;
  for (int j = 1; j < s.n_sites; ++j) {
    const bool v = kind == JumpKind::QP ? (s.spin(j) == 1 && s.spin(j + 1) == 0) : (s.spin(j) == 1 && s.spin(j + 1) == 1);
    f.push_back(v ? 1 : 0);
  }
  return f;
}

std::size_t pair_count(int n, JumpKind kind) {
  std::size_t count = 0;
  for (const auto& a : enumerate_basis(n)) {
    for (const auto& b : enumerate_basis(n)) count += f_values(a, kind) == f_values(b, kind);
  }
  return count;
}

HamiltonianSpec chain(int n, double h = 0.0, double V = 0.0) {
  HamiltonianSpec s;
  s.n_sites = n;
  s.h = h;
  s.V = V;
  return s;
}

}  // namespace

TEST_CASE("N=2 classification") {
  SUBCASE("QP") {
    const Classification cls = classify_basis(build_jump_set(JumpKind::QP, 2));
    REQUIRE(cls.sectors.size() == 2);
    const auto& excited = cls.sector(SectorKey{1, {{1, 1.0}}});
    REQUIRE(excited.members.size() == 1);
    CHECK(excited.members[0].to_string() == "10");
    CHECK(excited.local_degeneracy == std::vector<int>{1});
    const auto& ground = cls.sector(SectorKey::zeros(1));
    std::set<std::string> names;
    for (const auto& m : ground.members) names.insert(m.to_string());
    CHECK(names == std::set<std::string>{"00", "01", "11"});
    CHECK(ground.local_degeneracy == std::vector<int>{3});
  }
  SUBCASE("QQ") {
    const Classification cls = classify_basis(build_jump_set(JumpKind::QQ, 2));
    CHECK(cls.sector(SectorKey{1, {{1, 1.0}}}).members[0].to_string() == "11");
    CHECK(cls.sector(SectorKey::zeros(1)).dim() == 3);
  }
  SUBCASE("unknown key") {
    const Classification cls = classify_basis(build_jump_set(JumpKind::QP, 3));
    CHECK_THROWS((void)cls.sector(SectorKey{2, {{1, 1.0}, {2, 1.0}}}));
  }
}

TEST_CASE("classification partitions the basis and matches the bit oracle") {
  for (const auto kind : {JumpKind::QP, JumpKind::QQ}) {
    for (int n = 2; n <= 7; ++n) {
      const Classification cls = classify_basis(build_jump_set(kind, n));
      std::size_t total = 0;
      for (const auto& sec : cls.sectors) {
        total += sec.dim();
        for (const auto& m : sec.members) {
          const auto f = f_values(m, kind);
          for (int j = 1; j < n; ++j) CHECK(sec.key.f(j) == f[static_cast<std::size_t>(j - 1)]);
        }
      }
      CHECK(total == hilbert_dim(n));
    }
  }
}

TEST_CASE("non-diagonal jumps are rejected") {
  std::vector<SparseOperator> jumps{sigma_x(1, 2)};
  CHECK_THROWS_AS(classify_basis(jumps), std::invalid_argument);
}

TEST_CASE("total projector rank against pair counting") {
  CHECK(pair_count(2, JumpKind::QP) == 10);
  CHECK(pair_count(2, JumpKind::QQ) == 10);
  CHECK(pair_count(3, JumpKind::QP) == 24);
  for (const auto kind : {JumpKind::QP, JumpKind::QQ}) {
    for (int n = 2; n <= 4; ++n) {
      const Classification cls = classify_basis(build_jump_set(kind, n));
      const MatrixXc P = MatrixXc(total_projector(cls));
      CHECK((P * P - P).norm() == 0.0);
      CHECK(static_cast<std::size_t>(std::llround(P.trace().real())) == pair_count(n, kind));
      CHECK(cls.stationary_dimension() == pair_count(n, kind));
    }
  }
}

TEST_CASE("sector projectors are orthogonal projectors") {
  const Classification cls = classify_basis(build_jump_set(JumpKind::QP, 4));
  MatrixXc sum = MatrixXc::Zero(16, 16);
  for (const auto& sec : cls.sectors) {
    const MatrixXc p = MatrixXc(sector_projector_matrix(sec, 4));
    CHECK((p * p - p).norm() == 0.0);
    CHECK((p - p.adjoint()).norm() == 0.0);
    sum += p;
  }
  CHECK((sum - MatrixXc::Identity(16, 16)).norm() == 0.0);
}

TEST_CASE("effective Hamiltonians") {
  const auto H = build_hamiltonian(chain(8, 0.3));
  const Classification cls = classify_basis(build_jump_set(JumpKind::QP, 8));
  SUBCASE("hermitian blocks; frozen state is 1x1") {
    for (const auto& sec : cls.sectors) CHECK(is_hermitian(effective_hamiltonian_lind(H, cls, sec.key).matrix));
    const auto& key = cls.key_of(BasisState::from_string("10101010"));
    CHECK(effective_hamiltonian_lind(H, cls, key).dim() == 1);
  }
  SUBCASE("zero shell equals zero sector") {
    const auto shell = effective_hamiltonian_ham(H, cls, 0.0);
    const auto sector = effective_hamiltonian_lind(H, cls, SectorKey::zeros(7));
    REQUIRE(shell.basis == sector.basis);
    CHECK(MatrixXc(shell.matrix - sector.matrix).norm() == 0.0);
  }
  SUBCASE("the f-sum shell allows transitions that sectors forbid") {
    const auto shell = effective_hamiltonian_ham(H, cls, 1.0);
    const BasisState a = BasisState::from_string("00010000");
    const BasisState b = BasisState::from_string("00011000");
    REQUIRE(shell.contains(a));
    REQUIRE(shell.contains(b));
    CHECK(std::abs(MatrixXc(shell.matrix)(static_cast<Eigen::Index>(shell.index_of(a)), static_cast<Eigen::Index>(shell.index_of(b)))) == doctest::Approx(1.0));
    CHECK_FALSE(cls.same_sector(a.index(), b.index()));
    CHECK(is_hermitian(shell.matrix));
  }
}

TEST_CASE("frozen blocks") {
  const Classification cls = classify_basis(build_jump_set(JumpKind::QP, 8));
  CHECK(frozen_blocks(cls.key_of(BasisState::from_string("00010001")), cls) == std::vector<int>{4});
  CHECK(frozen_blocks(cls.key_of(BasisState::from_string("00001001")), cls) == std::vector<int>{5});
  CHECK(frozen_blocks(SectorKey::zeros(7), cls).empty());
}

TEST_CASE("sector graphs of the PXQ chain") {
  const auto H = build_hamiltonian(chain(8));
  const Classification cls = classify_basis(build_jump_set(JumpKind::QP, 8));
  auto graph = [&](const char* s) {
    const BasisState start = BasisState::from_string(s);
    return sector_graph(effective_hamiltonian_lind(H, cls, cls.key_of(start)), start, cls);
  };
  const auto a = graph("00010001");
  CHECK(a.vertices.size() == 9);
  CHECK(a.edges.size() == 12);
  CHECK(a.n_frozen() == 1);
  const auto b = graph("00001001");
  CHECK(b.vertices.size() == 8);
  CHECK(b.edges.size() == 10);
  const auto c = graph("00000001");
  CHECK(c.vertices.size() == 7);
  CHECK(c.edges.size() == 6);
  for (const auto& g : {a, b, c}) {
    std::set<std::pair<int, int>> unique(g.edges.begin(), g.edges.end());
    CHECK(unique.size() == g.edges.size());
    for (const auto& [x, y] : g.edges) CHECK(x < y);
    for (const auto& v : g.vertices) CHECK(cls.key_of(v) == g.key);
  }
  for (const auto& v : a.vertices) {
    for (const auto& w : b.vertices) CHECK(v != w);
  }
  const BasisState outside = BasisState::from_string("00000001");
  CHECK_THROWS(sector_graph(effective_hamiltonian_lind(H, cls, cls.key_of(BasisState::from_string("00010001"))), outside, cls));
}

TEST_CASE("local-form identities") {
  for (int n = 4; n <= 6; ++n) {
    for (const auto form : {LocalForm::PXQ, LocalForm::PXP, LocalForm::PXQ_QXP}) {
      const LocalFormReport rep = verify_local_form(form, n);
      CHECK_MESSAGE(rep.passed, rep.first_violation);
      CHECK(rep.max_deviation <= 1e-12);
      CHECK(rep.blocks_checked > 0);
    }
  }
}

TEST_CASE("frozen bonds commute with the sector Hamiltonian") {
  const int n = 7;
  const auto H = build_hamiltonian(chain(n, 0.9));
  const auto jumps = build_jump_set(JumpKind::QP, n);
  const Classification cls = classify_basis(jumps);
  for (const auto& sec : cls.sectors) {
    const auto block = effective_hamiltonian_lind(H, cls, sec.key);
    const MatrixXc Hb = MatrixXc(block.matrix);
    for (const int j : frozen_blocks(sec.key, cls)) {
      Eigen::VectorXd obs(static_cast<Eigen::Index>(block.dim()));
      for (std::size_t k = 0; k < block.dim(); ++k) {
        const auto& s = block.basis[k];
        obs(static_cast<Eigen::Index>(k)) = (s.spin(j) == 1 && s.spin(j + 1) == 0) ? 1.0 : 0.0;
      }
      CHECK((obs.asDiagonal() * Hb - Hb * obs.asDiagonal()).norm() <= 1e-12);
    }
  }
}

TEST_CASE("an N_F=1 sector splits into left and right segments") {
  const int n = 8;
  const auto H = build_hamiltonian(chain(n));
  const Classification cls = classify_basis(build_jump_set(JumpKind::QP, n));
  const auto block = effective_hamiltonian_lind(H, cls, cls.key_of(BasisState::from_string("00010001")));
  const MatrixXc Hb = MatrixXc(block.matrix);
  for (Eigen::Index a = 0; a < Hb.rows(); ++a) {
    for (Eigen::Index b = 0; b < Hb.cols(); ++b) {
      if (a == b || std::abs(Hb(a, b)) == 0.0) continue;
      const auto diff = block.basis[static_cast<std::size_t>(a)].bits ^ block.basis[static_cast<std::size_t>(b)].bits;
      CHECK(__builtin_popcountll(diff) == 1);
      const int site = __builtin_ctzll(diff) + 1;
      CHECK(site != 4);
      CHECK(site != 5);
    }
  }
}

TEST_CASE("first-order Liouvillian never mixes keys") {
  for (const auto kind : {JumpKind::QP, JumpKind::QQ}) {
    for (int n = 2; n <= 4; ++n) {
      const auto H = build_hamiltonian(chain(n, 0.4, 0.2));
      const Classification cls = classify_basis(build_jump_set(kind, n));
      const MatrixXc LH = MatrixXc(build_liouvillian(H, {}, 0.0).unitary);
      const MatrixXc P = MatrixXc(total_projector(cls));
      const MatrixXc first = P * LH * P;
      const Eigen::Index d = static_cast<Eigen::Index>(hilbert_dim(n));
      double cross = 0.0;
      for (Eigen::Index r = 0; r < first.rows(); ++r) {
        for (Eigen::Index c = 0; c < first.cols(); ++c) {
          if (cls.sector_index[static_cast<std::size_t>(r / d)] != cls.sector_index[static_cast<std::size_t>(c / d)]) {
            cross = std::max(cross, std::abs(first(r, c)));
          }
        }
      }
      CHECK(cross == 0.0);
    }
  }
}

TEST_CASE("sector census") {
  const auto H = build_hamiltonian(chain(6));
  const Classification cls = classify_basis(build_jump_set(JumpKind::QP, 6));
  const auto rows = sector_census(H, cls);
  std::size_t total = 0;
  for (const auto& r : rows) {
    total += r.dim;
    CHECK(r.components >= 1);
    CHECK(r.components <= r.dim);
    CHECK(r.n_frozen == static_cast<int>(r.key.excited().size()));
  }
  CHECK(total == 64);
  CHECK(rows.size() == cls.sectors.size());
}
