#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "kcm/dfs.hpp"
#include "kcm/experiments.hpp"
#include "kcm/liouville.hpp"
#include "kcm/noise.hpp"
#include "kcm/perturb2.hpp"
#include "kcm/quasiparticle.hpp"
#include "kcm/spectral.hpp"
#include "kcm/spin_ops.hpp"

using namespace kcm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

HamiltonianSpec spec(int n, double h = 0.0, double V = 0.0) {
  HamiltonianSpec s;
  s.n_sites = n;
  s.h = h;
  s.V = V;
  return s;
}

Outcome liouvillian_spectrum() {
  double worst = 0.0;
  int models = 0;
  for (const auto kind : {JumpKind::QP, JumpKind::QQ}) {
    for (int n = 2; n <= 4; ++n) {
      for (const double gamma : {1.0, 10.0, 1000.0}) {
        for (const double h : {0.0, 3.0}) {
          for (const double V : {0.0, 0.7}) {
            const Liouvillian L = build_liouvillian(build_hamiltonian(spec(n, h, V)), build_jump_set(kind, n), gamma);
            const LiouvilleSpectrum sp = spectrum(L);
            worst = std::max({worst, std::abs(sp.eigenvalues(0)) / gamma, sp.eigenvalues.real().maxCoeff() / gamma});
            ++models;
          }
        }
      }
    }
  }
  return {worst <= 1e-10, fmt("%g models, max(|lambda_0|, max Re lambda)/gamma = %.3g", models, worst)};
}

Outcome stationary_dimension() {
  std::string detail;
  bool ok = true;
  for (const auto kind : {JumpKind::QP, JumpKind::QQ}) {
    for (int n = 2; n <= 4; ++n) {
      const auto jumps = build_jump_set(kind, n);
      const auto d = static_cast<Eigen::Index>(hilbert_dim(n));
      const auto numeric = static_cast<std::size_t>(stationary_states(build_liouvillian(SparseOperator(d, d), jumps, 1.0)).dim());
      const std::size_t combinatorial = classify_basis(jumps).stationary_dimension();
      ok = ok && numeric == combinatorial && (n != 2 || numeric == 10);
      detail += (detail.empty() ? "" : ", ") + std::string(kind == JumpKind::QP ? "QP" : "QQ") + " N=" + std::to_string(n) +
                ": " + std::to_string(numeric) + "/" + std::to_string(combinatorial);
    }
  }
  return {ok, detail};
}

Outcome sector_graphs() {
  const auto H = build_hamiltonian(spec(8));
  const Classification cls = classify_basis(build_jump_set(JumpKind::QP, 8));
  auto graph = [&](const char* s) {
    const BasisState start = BasisState::from_string(s);
    return sector_graph(effective_hamiltonian_lind(H, cls, cls.key_of(start)), start, cls);
  };
  const auto a = graph("00010001");
  const auto b = graph("00001001");
  std::set<BasisState> va(a.vertices.begin(), a.vertices.end());
  bool disjoint = true;
  for (const auto& v : b.vertices) disjoint = disjoint && !va.count(v);
  const bool ok = a.vertices.size() == 9 && a.edges.size() == 12 && b.vertices.size() == 8 && b.edges.size() == 10 && disjoint;
  return {ok, fmt("(%g, %g) and (%g, %g)", static_cast<double>(a.vertices.size()), static_cast<double>(a.edges.size()),
                  static_cast<double>(b.vertices.size()), static_cast<double>(b.edges.size())) +
                  (disjoint ? ", disjoint" : ", overlapping")};
}

Outcome effective_identities() {
  double worst = 0.0;
  bool ok = true;
  for (int n = 4; n <= 6; ++n) {
    for (const auto form : {LocalForm::PXQ, LocalForm::PXP, LocalForm::PXQ_QXP}) {
      const auto rep = verify_local_form(form, n);
      ok = ok && rep.passed;
      worst = std::max(worst, rep.max_deviation);
    }
    for (const double h : {0.0, 1.3}) worst = std::max(worst, stark_mapping_deviation(n, 1.0, h));
  }
  return {ok && worst <= 1e-12, fmt("max deviation %.3g over N = 4..6", worst)};
}

Outcome gksl_domain_wall() {
  const int n = 6;
  const VectorXc psi = basis_vector(BasisState::from_string("000111"));
  const auto times = linspace(0.0, 10.0, 101);
  double mins[2] = {0.0, 0.0};
  const double hs[2] = {3.0, 0.0};
  for (int k = 0; k < 2; ++k) {
    const Liouvillian L = build_liouvillian(build_hamiltonian(spec(n, hs[k])), build_jump_set(JumpKind::QP, n), 1000.0);
    const Trajectory tr = evolve(L, psi * psi.adjoint(), times);
    double m = 1.0;
    for (const auto& rho : tr.states) m = std::min(m, expect_bond_dw(rho, 3));
    mins[k] = m;
  }
  return {mins[0] >= 0.5 && mins[1] < 0.3, fmt("min <P3 Q4> on [0, 10]: h=3 -> %.4f (need >= 0.5), h=0 -> %.4f (need < 0.3)", mins[0], mins[1])};
}

Outcome first_order_validity() {
  const VectorXc psi = parse_state("000+001", 3);
  const auto rows = first_order_error_scaling(build_hamiltonian(spec(3)), build_jump_set(JumpKind::QP, 3), psi * psi.adjoint(),
                                              2.0, {100.0, 1000.0});
  const double ratio = rows[0].trace_distance / rows[1].trace_distance;
  return {ratio >= 6.0 && ratio <= 14.0,
          fmt("D(100) = %.4g, D(1000) = %.4g, ratio %.3f", rows[0].trace_distance, rows[1].trace_distance, ratio)};
}

Outcome lambda_classes() {
  LambdaScan total;
  for (int n = 2; n <= 4; ++n) {
    const auto s = scan_lambda_classes(classify_basis(build_jump_set(JumpKind::QQ, n)), 1.0);
    total.intermediates += s.intermediates;
    total.minus_one += s.minus_one;
    total.minus_two += s.minus_two;
    total.other += s.other;
  }
  const auto H = build_hamiltonian(spec(3, 0.5, 0.3));
  double diff = 0.0;
  for (const auto kind : {JumpKind::QP, JumpKind::QQ}) {
    const Classification cls = classify_basis(build_jump_set(kind, 3));
    diff = std::max(diff, compare_second_order(second_order_liouvillian(H, cls, 100.0), second_order_oracle(H, cls, 100.0)));
  }
  const bool ok = total.other == 0 && total.minus_one > 0 && total.minus_two > 0 && diff <= 1e-10;
  return {ok, fmt("%g intermediates: %g at -1, %g at -2, %g other", static_cast<double>(total.intermediates),
                  static_cast<double>(total.minus_one), static_cast<double>(total.minus_two), static_cast<double>(total.other)) +
                  fmt("; closed vs oracle %.3g", diff)};
}

Outcome noise_convergence() {
  HamiltonianSpec s = spec(2);
  s.boundary_bulk_only = false;
  const auto H = build_hamiltonian(s);
  const auto jumps = build_jump_set(JumpKind::QP, 2);
  const NoiseModel model(H, jumps, 20.0);
  const VectorXc psi = basis_vector(BasisState::from_string("00"));
  const MatrixXc rho0 = psi * psi.adjoint();
  const Liouvillian L = build_liouvillian(H, jumps, 20.0);
  const MatrixXc exact = devectorize(VectorXc(MatrixXc(MatrixXc(L.total)).exp() * vectorize(rho0).data));
  const int repeats = 10;
  double mean[2] = {0.0, 0.0};
  const std::size_t sizes[2] = {1000, 4000};
  EnsembleOptions o;
  o.dt = 1e-3;
  o.T = 1.0;
  o.record_every = 1000;
  o.master_seed = 1;
  std::uint64_t next = 0;
  for (int k = 0; k < 2; ++k) {
    o.trajectories = sizes[k];
    for (int r = 0; r < repeats; ++r) {
      o.first_index = next;
      next += sizes[k];
      mean[k] += trace_distance(ensemble_average(model, psi, o).rho.back(), exact) / repeats;
    }
  }
  const double ratio = mean[0] / mean[1];
  return {ratio >= 1.8, fmt("mean D: M=1000 %.4g, M=4000 %.4g, ratio %.3f (bias %.2g)", mean[0], mean[1], ratio,
                            step_bias(model, rho0, o.dt, o.T))};
}

Outcome kink_dynamics() {
  const FermionModel m = two_particle_kink_model(40, 1.0, 1.5);
  const EigenDecomposition dec = diagonalize(m.matrix);
  const auto times = linspace(0.0, 20.0, 401);
  auto outside = [&](int mu, int nu, int lo, int hi, double& peak, double& at_end) {
    VectorXc psi0 = VectorXc::Zero(m.dim());
    psi0(m.index_of(mu, nu)) = 1.0;
    const auto table = evolve_state(dec, m, psi0, times);
    peak = 0.0;
    for (Eigen::Index t = 0; t < table.occupation.rows(); ++t) {
      double sum = 0.0;
      for (int c = 0; c < table.occupation.cols(); ++c) {
        if (c + 1 < lo || c + 1 > hi) sum += table.occupation(t, c);
      }
      peak = std::max(peak, sum);
      at_end = sum;
    }
  };
  double peak_a = 0.0;
  double end_a = 0.0;
  double peak_b = 0.0;
  double end_b = 0.0;
  outside(16, 25, 12, 29, peak_a, end_a);
  outside(19, 20, 9, 30, peak_b, end_b);
  return {peak_a < 0.05 && peak_b > 0.3,
          fmt("(16,25): max occupation outside [12,29] %.4f; (19,20): max outside [9,30] %.4f (%.4f at t=20)", peak_a, peak_b, end_b)};
}

Outcome ipr_dip() {
  bool ok = true;
  std::string detail;
  for (std::uint64_t r = 0; r < 3; ++r) {
    const std::uint64_t seed = trajectory_seed(1, r);
    const double a = ladder_mean_ipr(40, 1.0, 2.0, 1.5, 60, 1e-4, seed);
    const double b = ladder_mean_ipr(40, 1.0, 3.0, 1.5, 60, 1e-4, seed);
    const double c = ladder_mean_ipr(40, 1.0, 4.0, 1.5, 60, 1e-4, seed);
    ok = ok && b < a && b < c;
    detail += (detail.empty() ? "" : "; ") + fmt("seed %g: %.4f / %.4f / %.4f", static_cast<double>(r), a, b, c);
  }
  return {ok, "mean IPR at h = 2 / 3 / 4: " + detail};
}

Outcome ipr_scaling() {
  std::vector<std::pair<double, double>> pts;
  std::string detail;
  for (const int n : {40, 60, 80, 100, 120}) {
    const double v = ladder_mean_ipr(n, 1.0, 3.0, 1.5, 60, 1e-4, trajectory_seed(1, static_cast<std::uint64_t>(n)));
    pts.emplace_back(n, v);
    detail += fmt(" %g:%.4g", n, v);
  }
  const ScalingFit f = scaling_fit(pts);
  return {std::abs(f.slope + 1.0) <= 0.15, fmt("slope %.3f (rms %.3g);", f.slope, f.residual) + detail};
}

Outcome support_structure() {
  const double g = 1.5;
  std::vector<std::pair<double, double>> pts;
  std::string detail;
  auto support = [&](int n, double h) {
    const FermionModel m = coupled_chain_model(n, 1.0, h, g, 1e-4, trajectory_seed(1, static_cast<std::uint64_t>(n)));
    const EigenDecomposition dec = middle_window(m.matrix, 60);
    return static_cast<double>(representative_eigenstate(dec, m, 60).support);
  };
  for (const int n : {20, 30, 40, 50, 60}) {
    const double s = support(n, 2.0 * g);
    pts.emplace_back(n, s);
    detail += fmt(" %g:%g", n, s);
  }
  const ScalingFit f = scaling_fit(pts);
  const double low = support(51, 0.1 * g);
  const double high = support(51, 2.5 * g);
  const bool ok = std::abs(f.slope - 1.0) <= 0.3 && low <= 10 && high <= 10;
  return {ok, fmt("h=2g exponent %.3f;", f.slope) + detail + fmt("; N=51 support at h=0.1g: %g, h=2.5g: %g", low, high)};
}

Outcome ising_invariance() {
  double worst = 0.0;
  for (int n = 3; n <= 6; ++n) {
    for (const double h : {0.0, 1.0}) worst = std::max(worst, ising_invariance_deviation(n, 1.0, h, 0.7));
  }
  return {worst <= 1e-12, fmt("max deviation %.3g over N = 3..6", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Liouvillian spectral contract", liouvillian_spectrum},
      {"stationary-subspace dimension", stationary_dimension},
      {"sector graphs from 00010001 and 00001001", sector_graphs},
      {"effective-model identities", effective_identities},
      {"domain-wall retention under strong dissipation", gksl_domain_wall},
      {"first-order validity scaling", first_order_validity},
      {"lambda classification and second-order oracle", lambda_classes},
      {"noise-engineering convergence", noise_convergence},
      {"kink-antikink dynamics", kink_dynamics},
      {"mean IPR dip at h = 2g", ipr_dip},
      {"mean IPR scaling law", ipr_scaling},
      {"eigenstate support structure", support_structure},
      {"Ising invariance of sector Hamiltonians", ising_invariance},
  };
  std::set<int> only;
  std::set<int> expected_fail;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--expect-fail" && a + 1 < argc) {
      expected_fail.insert(std::stoi(argv[++a]));
    } else {
      only.insert(std::stoi(arg));
    }
  }
  int unexpected = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool known = expected_fail.count(id) > 0;
    std::printf("[%s] #%d %s: %s [%.1fs]%s\n", out.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(), out.detail.c_str(),
                secs, !out.pass && known ? " (known)" : "");
    std::fflush(stdout);
    if (!out.pass && !known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
