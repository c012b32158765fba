#include "kcm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "kcm/dfs.hpp"
#include "kcm/io.hpp"
#include "kcm/liouville.hpp"
#include "kcm/noise.hpp"
#include "kcm/perturb2.hpp"
#include "kcm/quasiparticle.hpp"
#include "kcm/spin_ops.hpp"

namespace kcm {

namespace {

namespace fs = std::filesystem;

constexpr double kContractTol = 1e-8;

JumpKind jump_kind(const ExperimentConfig& cfg) { return cfg.jumps == "QQ" ? JumpKind::QQ : JumpKind::QP; }

HamiltonianSpec chain_spec(const ExperimentConfig& cfg) {
  HamiltonianSpec s;
  s.n_sites = cfg.n_sites;
  s.J = cfg.J;
  s.h = cfg.h;
  s.V = cfg.V;
  s.boundary_bulk_only = cfg.bulk_fields;
  s.validate();
  return s;
}

std::string default_initial(int n) { return std::string(static_cast<std::size_t>(n / 2), '0') + std::string(static_cast<std::size_t>(n - n / 2), '1'); }

std::string path_in(const ExperimentConfig& cfg, const std::string& name) { return (fs::path(cfg.out) / name).string(); }

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

RunResult run_gksl_evolve(const ExperimentConfig& cfg) {
  const int n = cfg.n_sites;
  const VectorXc psi0 = parse_state(cfg.initial.empty() ? default_initial(n) : cfg.initial, n);
  const Liouvillian L = build_liouvillian(build_hamiltonian(chain_spec(cfg)), build_jump_set(jump_kind(cfg), n), cfg.gamma);
  const Trajectory traj = evolve(L, psi0 * psi0.adjoint(), linspace(0.0, cfg.t_max, cfg.t_points));

  RunResult res;
  const auto file = path_in(cfg, "gksl-evolve.csv");
  CsvWriter csv(file, cfg, {"t", "bond", "dw"},
                {{"max_trace_error", format_double(traj.max_trace_error)},
                 {"max_hermiticity_error", format_double(traj.max_hermiticity_error)},
                 {"min_eigenvalue", format_double(traj.min_eigenvalue)},
                 {"krylov_steps", std::to_string(traj.krylov_steps)}});
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    for (int bond = 1; bond < n; ++bond) csv.cell(traj.times[k]).cell(bond).cell(expect_bond_dw(traj.states[k], bond)).end_row();
  }
  res.files.push_back(file);

  if (L.total.rows() <= 1024) {
    const LiouvilleSpectrum spec = spectrum(L);
    const auto sfile = path_in(cfg, "gksl-spectrum.csv");
    CsvWriter s(sfile, cfg, {"re", "im"},
                {{"stationary_dim", std::to_string(spec.stationary_dim)},
                 {"jordan_warning", spec.jordan_warning ? "true" : "false"}});
    for (Eigen::Index a = 0; a < spec.eigenvalues.size(); ++a) s.cell(spec.eigenvalues(a).real()).cell(spec.eigenvalues(a).imag()).end_row();
    res.files.push_back(sfile);
  }
  if (traj.max_trace_error > kContractTol || traj.max_hermiticity_error > kContractTol || traj.min_eigenvalue < -kContractTol) {
    throw ContractViolation("gksl-evolve: invariant violated (trace error " + format_double(traj.max_trace_error) +
                            ", hermiticity error " + format_double(traj.max_hermiticity_error) + ", min eigenvalue " +
                            format_double(traj.min_eigenvalue) + ")");
  }
  return res;
}

RunResult run_noise_check(const ExperimentConfig& cfg) {
  const int n = cfg.n_sites;
  require(cfg.repeats >= 1 && cfg.trajectories >= 1, "noise-check: repeats and trajectories must be >= 1");
  const auto H = build_hamiltonian(chain_spec(cfg));
  const auto jumps = build_jump_set(jump_kind(cfg), n);
  const VectorXc psi0 = parse_state(cfg.initial.empty() ? std::string(static_cast<std::size_t>(n), '0') : cfg.initial, n);
  const NoiseModel model(H, jumps, cfg.gamma);

  EnsembleOptions opts;
  opts.dt = cfg.dt;
  opts.T = cfg.t_max;
  opts.trajectories = static_cast<std::size_t>(cfg.trajectories);
  opts.master_seed = cfg.seed;
  opts.threads = static_cast<unsigned>(std::max(1, cfg.threads));
  const auto steps = static_cast<int>(std::llround(cfg.t_max / cfg.dt));
  opts.record_every = std::max(1, steps / std::max(1, cfg.t_points - 1));

  const Liouvillian L = build_liouvillian(H, jumps, cfg.gamma);
  RunResult res;
  std::vector<double> final_distance;
  EnsembleAverage first;
  Trajectory exact;
  for (int r = 0; r < cfg.repeats; ++r) {
    opts.first_index = static_cast<std::uint64_t>(r) * opts.trajectories;
    EnsembleAverage avg = ensemble_average(model, psi0, opts);
    if (r == 0) {
      exact = evolve(L, psi0 * psi0.adjoint(), avg.times);
      first = std::move(avg);
      final_distance.push_back(trace_distance(first.rho.back(), exact.states.back()));
    } else {
      final_distance.push_back(trace_distance(avg.rho.back(), exact.states.back()));
    }
  }

  const auto curve = path_in(cfg, "noise-check.csv");
  std::vector<std::string> cols{"t", "trace_distance"};
  for (int b = 1; b < n; ++b) {
    cols.push_back("dw" + std::to_string(b) + "_noise");
    cols.push_back("dw" + std::to_string(b) + "_exact");
  }
  {
    CsvWriter csv(curve, cfg, cols, {{"seed_scheme", "splitmix64(seed + (index + 1) * 0x9E3779B97F4A7C15) -> mt19937_64"}});
    for (std::size_t k = 0; k < first.times.size(); ++k) {
      csv.cell(first.times[k]).cell(trace_distance(first.rho[k], exact.states[k]));
      for (int b = 1; b < n; ++b) csv.cell(expect_bond_dw(first.rho[k], b)).cell(expect_bond_dw(exact.states[k], b));
      csv.end_row();
    }
  }
  res.files.push_back(curve);

  const auto reps = path_in(cfg, "noise-check-repeats.csv");
  {
    CsvWriter csv(reps, cfg, {"repeat", "first_trajectory", "trajectories", "trace_distance"});
    for (int r = 0; r < cfg.repeats; ++r) {
      csv.cell(r).cell(static_cast<long long>(r) * cfg.trajectories).cell(cfg.trajectories).cell(final_distance[static_cast<std::size_t>(r)]).end_row();
    }
  }
  res.files.push_back(reps);

  nlohmann::json meta = metadata_json(cfg);
  meta["M"] = cfg.trajectories;
  meta["dt"] = cfg.dt;
  meta["repeats"] = cfg.repeats;
  double mean = 0.0;
  for (const double d : final_distance) mean += d;
  meta["mean_final_trace_distance"] = mean / static_cast<double>(final_distance.size());
  if (H.rows() <= 16) meta["step_bias_estimate"] = step_bias(model, psi0 * psi0.adjoint(), cfg.dt, cfg.t_max);
  meta["warnings"] = first.warnings;
  meta["max_norm_error"] = first.max_norm_error;
  const auto jfile = path_in(cfg, "noise-check.json");
  write_json(jfile, meta);
  res.files.push_back(jfile);
  res.notes = first.warnings;
  if (first.max_norm_error > 1e-10) throw ContractViolation("noise-check: trajectory norm drifted by " + format_double(first.max_norm_error));
  return res;
}

RunResult run_sector_census(const ExperimentConfig& cfg) {
  const auto H = build_hamiltonian(chain_spec(cfg));
  const Classification cls = classify_basis(build_jump_set(jump_kind(cfg), cfg.n_sites));
  const auto rows = sector_census(H, cls);
  const auto file = path_in(cfg, "sector-census.csv");
  CsvWriter csv(file, cfg, {"key", "dimension", "n_frozen", "components"},
                {{"sectors", std::to_string(rows.size())}, {"stationary_dimension", std::to_string(cls.stationary_dimension())}});
  for (const auto& r : rows) csv.cell(r.key.to_string()).cell(r.dim).cell(r.n_frozen).cell(r.components).end_row();
  return {{file}, {}};
}

RunResult run_sector_graph(const ExperimentConfig& cfg) {
  std::vector<std::string> starts = cfg.starts;
  if (starts.empty()) {
    require(cfg.n_sites == 8, "sector-graph: set `starts` (defaults exist only for N = 8)");
    starts = {"00010001", "00001001"};
  }
  const auto H = build_hamiltonian(chain_spec(cfg));
  const Classification cls = classify_basis(build_jump_set(jump_kind(cfg), cfg.n_sites));
  nlohmann::json out = metadata_json(cfg);
  out["graphs"] = nlohmann::json::array();
  RunResult res;
  std::vector<std::set<std::string>> vertex_sets;
  for (const auto& s : starts) {
    const BasisState start = BasisState::from_string(s);
    require(start.n_sites == cfg.n_sites, "sector-graph: start " + s + " has the wrong length");
    const auto block = effective_hamiltonian_lind(H, cls, cls.key_of(start));
    const ConnectivityGraph g = sector_graph(block, start, cls);
    nlohmann::json gj = graph_json(g);
    gj["start"] = s;
    out["graphs"].push_back(gj);
    std::set<std::string> verts;
    for (const auto& v : g.vertices) verts.insert(v.to_string());
    vertex_sets.push_back(verts);
    const auto edges = path_in(cfg, "sector-graph-" + s + ".edges");
    write_edge_list(edges, g, metadata_header(cfg, {{"start", s}}));
    res.files.push_back(edges);
  }
  std::size_t shared = 0;
  for (std::size_t a = 0; a < vertex_sets.size(); ++a) {
    for (std::size_t b = a + 1; b < vertex_sets.size(); ++b) {
      for (const auto& v : vertex_sets[a]) shared += vertex_sets[b].count(v);
    }
  }
  out["shared_vertices"] = shared;
  const auto file = path_in(cfg, "sector-graph.json");
  write_json(file, out);
  res.files.insert(res.files.begin(), file);
  return res;
}

RunResult run_effective_verify(const ExperimentConfig& cfg) {
  const std::vector<int> sizes = cfg.n_values.empty() ? std::vector<int>{4, 5, 6} : cfg.n_values;
  const auto file = path_in(cfg, "effective-verify.csv");
  CsvWriter csv(file, cfg, {"check", "N", "blocks", "max_deviation", "passed"});
  bool all = true;
  std::string first_failure;
  for (const int n : sizes) {
    for (const auto& [form, name] : std::vector<std::pair<LocalForm, std::string>>{
             {LocalForm::PXQ, "PXQ"}, {LocalForm::PXP, "PXP"}, {LocalForm::PXQ_QXP, "PXQ-QXP"}}) {
      const LocalFormReport rep = verify_local_form(form, n, cfg.J);
      csv.cell(name).cell(n).cell(rep.blocks_checked).cell(rep.max_deviation).cell(std::string(rep.passed ? "true" : "false")).end_row();
      if (!rep.passed && first_failure.empty()) first_failure = name + " at N=" + std::to_string(n) + ": " + rep.first_violation;
      all = all && rep.passed;
    }
    const double stark = stark_mapping_deviation(n, cfg.J, cfg.h);
    csv.cell(std::string("stark-mapping")).cell(n).cell(1).cell(stark).cell(std::string(stark <= 1e-12 ? "true" : "false")).end_row();
    const double ising = ising_invariance_deviation(n, cfg.J, cfg.h, cfg.V == 0.0 ? 0.7 : cfg.V);
    csv.cell(std::string("ising-invariance")).cell(n).cell(1).cell(ising).cell(std::string(ising <= 1e-12 ? "true" : "false")).end_row();
    all = all && stark <= 1e-12 && ising <= 1e-12;
  }
  if (!all) throw ContractViolation("effective-verify: identity violated" + (first_failure.empty() ? std::string() : " (" + first_failure + ")"));
  return {{file}, {}};
}

RunResult run_fermion_dynamics(const ExperimentConfig& cfg) {
  const PairOrdering ordering = cfg.ordering == "both" ? PairOrdering::both : PairOrdering::wedge;
  const FermionModel model = two_particle_kink_model(cfg.n_sites, cfg.J, cfg.h, ordering);
  int mu = 0;
  int nu = 0;
  {
    const std::string init = cfg.initial.empty() ? "16,25" : cfg.initial;
    const auto comma = init.find(',');
    require(comma != std::string::npos, "fermion-dynamics: initial must be `mu,nu`");
    mu = std::stoi(init.substr(0, comma));
    nu = std::stoi(init.substr(comma + 1));
  }
  const Eigen::Index start = model.index_of(mu, nu);
  const EigenDecomposition dec = diagonalize(model.matrix);
  VectorXc psi0 = VectorXc::Zero(model.dim());
  psi0(start) = 1.0;
  const OccupationTable table = evolve_state(dec, model, psi0, linspace(0.0, cfg.t_max, cfg.t_points));
  const auto overlaps = overlap_spectrum(start, dec);

  RunResult res;
  const auto occ = path_in(cfg, "fermion-occupation.csv");
  {
    CsvWriter csv(occ, cfg, {"t", "mu", "n"}, {{"max_number_drift", format_double(table.max_number_drift)}});
    for (std::size_t k = 0; k < table.times.size(); ++k) {
      for (int c = 0; c < model.occupation_columns(); ++c) csv.cell(table.times[k]).cell(c + 1).cell(table.occupation(static_cast<Eigen::Index>(k), c)).end_row();
    }
  }
  res.files.push_back(occ);
  const auto ov = path_in(cfg, "fermion-overlap.csv");
  {
    CsvWriter csv(ov, cfg, {"energy", "overlap", "ipr"});
    for (const auto& r : overlaps) csv.cell(r.energy).cell(r.overlap).cell(r.ipr).end_row();
  }
  res.files.push_back(ov);
  const auto mtx = path_in(cfg, "fermion-model.mtx");
  write_matrix_market(mtx, model.matrix, metadata_header(cfg) + "model: " + model_metadata(model).dump());
  res.files.push_back(mtx);
  nlohmann::json meta = metadata_json(cfg);
  meta["model"] = model_metadata(model);
  meta["max_residual"] = dec.max_residual;
  const auto jfile = path_in(cfg, "fermion-dynamics.json");
  write_json(jfile, meta);
  res.files.push_back(jfile);
  if (table.max_number_drift > kContractTol || dec.max_residual > kContractTol) {
    throw ContractViolation("fermion-dynamics: particle number drift " + format_double(table.max_number_drift) +
                            ", eigen residual " + format_double(dec.max_residual));
  }
  return res;
}

std::vector<double> default_h_grid() {
  std::vector<double> out;
  for (int k = 0; k <= 8; ++k) out.push_back(0.5 + 0.5 * k);
  return out;
}

RunResult run_ipr_scan(const ExperimentConfig& cfg) {
  const std::vector<double> grid = cfg.h_values.empty() ? default_h_grid() : cfg.h_values;
  require(cfg.realizations >= 1, "ipr-scan: realizations must be >= 1");
  const auto file = path_in(cfg, "ipr-scan.csv");
  CsvWriter csv(file, cfg, {"h", "N", "realization", "disorder_seed", "mean_ipr"},
                {{"disorder_seed_scheme", "splitmix64(seed + (realization + 1) * 0x9E3779B97F4A7C15)"}});
  std::map<double, double> avg;
  for (const double h : grid) {
    for (int r = 0; r < cfg.realizations; ++r) {
      const auto dseed = trajectory_seed(cfg.seed, static_cast<std::uint64_t>(r));
      const double m = ladder_mean_ipr(cfg.n_sites, cfg.J, h, cfg.g, cfg.window, cfg.disorder, dseed);
      csv.cell(h).cell(cfg.n_sites).cell(r).cell(std::to_string(dseed)).cell(m).end_row();
      avg[h] += m / cfg.realizations;
    }
  }
  const auto best = std::min_element(avg.begin(), avg.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  return {{file}, {"minimum mean IPR at h = " + format_double(best->first)}};
}

RunResult run_ipr_scaling(const ExperimentConfig& cfg) {
  const std::vector<int> sizes = cfg.n_values.empty() ? std::vector<int>{40, 60, 80, 100, 120} : cfg.n_values;
  const double h = cfg.h != 0.0 ? cfg.h : 2.0 * cfg.g;
  const auto file = path_in(cfg, "ipr-scaling.csv");
  std::vector<std::pair<double, double>> pts;
  std::vector<std::pair<double, double>> supports;
  std::vector<std::vector<std::string>> rows;
  for (const int n : sizes) {
    const FermionModel model = coupled_chain_model(n, cfg.J, h, cfg.g, cfg.disorder, cfg.seed);
    const EigenDecomposition dec = middle_window(model.matrix, cfg.window);
    const double m = mean_ipr_window(dec, cfg.window).mean;
    const RepresentativeState rep = representative_eigenstate(dec, model, cfg.window);
    pts.emplace_back(n, m);
    supports.emplace_back(n, static_cast<double>(rep.support));
    rows.push_back({std::to_string(n), format_double(m), std::to_string(rep.index), std::to_string(rep.support),
                    dec.method, format_double(dec.max_residual)});
  }
  const ScalingFit fit = scaling_fit(pts);
  const ScalingFit sfit = scaling_fit(supports);
  CsvWriter csv(file, cfg, {"N", "mean_ipr", "representative_index", "support90", "method", "max_residual"},
                {{"h", format_double(h)},
                 {"ipr_slope", format_double(fit.slope)},
                 {"ipr_intercept", format_double(fit.intercept)},
                 {"ipr_fit_residual", format_double(fit.residual)},
                 {"support_exponent", format_double(sfit.slope)}});
  for (const auto& r : rows) {
    for (const auto& c : r) csv.cell(c);
    csv.end_row();
  }
  return {{file}, {"slope " + format_double(fit.slope)}};
}

RunResult run_heatmap(const ExperimentConfig& cfg) {
  const FermionModel model = coupled_chain_model(cfg.n_sites, cfg.J, cfg.h, cfg.g, cfg.disorder, cfg.seed);
  const EigenDecomposition dec = middle_window(model.matrix, cfg.window);
  const RepresentativeState rep = representative_eigenstate(dec, model, cfg.window);
  const Eigen::MatrixXd grid = eigenstate_heatmap(dec, model, rep.index);
  const auto file = path_in(cfg, "heatmap.csv");
  CsvWriter csv(file, cfg, {"mu1", "mu2", "weight"},
                {{"eigen_index", std::to_string(rep.index)},
                 {"energy", format_double(dec.values(rep.index - dec.offset))},
                 {"support90", std::to_string(rep.support)}});
  for (Eigen::Index a = 0; a < grid.rows(); ++a) {
    for (Eigen::Index b = 0; b < grid.cols(); ++b) csv.cell(static_cast<long long>(a + 1)).cell(static_cast<long long>(b + 1)).cell(grid(a, b)).end_row();
  }
  return {{file}, {"support90 = " + std::to_string(rep.support)}};
}

RunResult run_perturb_report(const ExperimentConfig& cfg) {
  const int n = cfg.n_sites;
  const auto H = build_hamiltonian(chain_spec(cfg));
  const auto jumps = build_jump_set(jump_kind(cfg), n);
  const Classification cls = classify_basis(jumps);
  const std::vector<double> gammas = cfg.gammas.empty() ? std::vector<double>{100.0, 1000.0} : cfg.gammas;

  nlohmann::json out = metadata_json(cfg);
  const ValidityTimes vt = validity_time(cfg.J, cfg.gamma, n);
  out["validity_time"] = {{"conservative", vt.conservative}, {"conjectured", vt.conjectured}};
  nlohmann::json sectors = nlohmann::json::array();
  for (const auto& sec : cls.sectors) {
    const SecondOrderBlock blk = second_order_liouvillian(H, cls, cfg.gamma, sec.key);
    sectors.push_back({{"key", sec.key.to_string()}, {"dimension", sec.dim()}, {"second_order_max_abs", blk.max_abs()}});
  }
  out["sectors"] = sectors;
  const LambdaScan scan = scan_lambda_classes(cls, cfg.gamma);
  out["lambda_scan"] = {{"intermediates", scan.intermediates}, {"minus_one", scan.minus_one}, {"minus_two", scan.minus_two}, {"other", scan.other}};
  if (n <= 4) {
    out["closed_vs_oracle"] = compare_second_order(second_order_liouvillian(H, cls, cfg.gamma), second_order_oracle(H, cls, cfg.gamma));
  }
  const std::string init = cfg.initial.empty() ? std::string(static_cast<std::size_t>(n), '0') + "+" + std::string(static_cast<std::size_t>(n - 1), '0') + "1" : cfg.initial;
  const VectorXc psi0 = parse_state(init, n);
  nlohmann::json table = nlohmann::json::array();
  for (const auto& row : first_order_error_scaling(H, jumps, psi0 * psi0.adjoint(), cfg.t_max, gammas)) {
    table.push_back({{"gamma", row.gamma}, {"trace_distance", row.trace_distance}});
  }
  out["error_scaling"] = {{"initial", init}, {"t", cfg.t_max}, {"rows", table}};
  const auto file = path_in(cfg, "perturb-report.json");
  write_json(file, out);
  if (scan.other != 0) throw ContractViolation("perturb-report: denominators outside {-1, -2} found");
  return {{file}, {}};
}

}  // namespace

std::vector<double> linspace(double a, double b, int points) {
  if (points < 1) throw std::invalid_argument("linspace: need at least one point");
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) out[static_cast<std::size_t>(k)] = points == 1 ? a : a + (b - a) * k / (points - 1);
  return out;
}

VectorXc parse_state(const std::string& text, int n_sites) {
  VectorXc psi = VectorXc::Zero(static_cast<Eigen::Index>(hilbert_dim(n_sites)));
  std::stringstream ss(text);
  std::string part;
  int terms = 0;
  while (std::getline(ss, part, '+')) {
    const BasisState s = BasisState::from_string(part);
    if (s.n_sites != n_sites) throw std::invalid_argument("state " + part + " does not have " + std::to_string(n_sites) + " sites");
    psi(static_cast<Eigen::Index>(s.index())) += 1.0;
    ++terms;
  }
  if (terms == 0) throw std::invalid_argument("empty state specification");
  return psi.normalized();
}

double stark_mapping_deviation(int n_sites, double J, double h) {
  HamiltonianSpec spec;
  spec.n_sites = n_sites;
  spec.J = J;
  spec.h = h;
  const auto H = build_hamiltonian(spec);
  const Classification cls = classify_basis(build_jump_set(JumpKind::QP, n_sites));
  const BlockHamiltonian block = effective_hamiltonian_lind(H, cls, SectorKey::zeros(n_sites - 1));
  std::vector<BasisState> subset;
  for (const auto& s : block.basis) {
    if (s.spin(1) == 0 && s.spin(n_sites) == 1) subset.push_back(s);
  }
  const BlockHamiltonian sub = restrict_block(block, subset);
  const FermionModel model = single_particle_stark(n_sites, J, h);
  if (static_cast<Eigen::Index>(sub.dim()) != model.dim()) return std::numeric_limits<double>::infinity();
  const MatrixXc spin = MatrixXc(sub.matrix);
  const Eigen::MatrixXd ferm = Eigen::MatrixXd(model.matrix);
  double worst = 0.0;
  for (std::size_t a = 0; a < sub.dim(); ++a) {
    const int ma = domain_wall_to_mode(sub.basis[a]);
    for (std::size_t b = 0; b < sub.dim(); ++b) {
      const int mb = domain_wall_to_mode(sub.basis[b]);
      cplx v = spin(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (a == b) v -= model.dropped_constant;
      worst = std::max(worst, std::abs(v - ferm(ma - 1, mb - 1)));
    }
  }
  return worst;
}

double ising_invariance_deviation(int n_sites, double J, double h, double V) {
  HamiltonianSpec base;
  base.n_sites = n_sites;
  base.J = J;
  base.h = h;
  HamiltonianSpec with_v = base;
  with_v.V = V;
  const auto H0 = build_hamiltonian(base);
  const auto HV = build_hamiltonian(with_v);
  const Classification cls = classify_basis(build_jump_set(JumpKind::QP, n_sites));
  double worst = 0.0;
  for (const auto& sec : cls.sectors) {
    const BlockHamiltonian b0 = effective_hamiltonian_lind(H0, cls, sec.key);
    const BlockHamiltonian bv = effective_hamiltonian_lind(HV, cls, sec.key);
    const MatrixXc diff = MatrixXc(bv.matrix) - MatrixXc(b0.matrix);
    for (Eigen::Index a = 0; a < diff.rows(); ++a) {
      for (Eigen::Index b = 0; b < diff.cols(); ++b) {
        if (a != b) worst = std::max(worst, std::abs(diff(a, b)));
      }
    }
    for (const auto& comp : connected_components(b0, cls)) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& v : comp.vertices) {
        const auto k = static_cast<Eigen::Index>(b0.index_of(v));
        lo = std::min(lo, diff(k, k).real());
        hi = std::max(hi, diff(k, k).real());
      }
      worst = std::max(worst, hi - lo);
    }
  }
  return worst;
}

double ladder_mean_ipr(int n_sites, double J, double h, double g, int window, double disorder, std::uint64_t seed,
                       const WindowOptions& opts) {
  const FermionModel model = coupled_chain_model(n_sites, J, h, g, disorder, seed);
  return mean_ipr_window(middle_window(model.matrix, window, opts), window).mean;
}

RepresentativeState representative_eigenstate(const EigenDecomposition& dec, const FermionModel& model,
                                              Eigen::Index window) {
  const auto [first, last] = middle_window_range(dec.full_dim, window);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> counts;
  for (Eigen::Index n = first; n < last; ++n) counts.emplace_back(support_count(eigenstate_heatmap(dec, model, n)), n);
  std::sort(counts.begin(), counts.end());
  const auto& mid = counts[(counts.size() - 1) / 2];
  const auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == mid.first; });
  return {it->second, it->first};
}

double estimate_memory_mb(const ExperimentConfig& cfg) {
  const double n = cfg.n_sites;
  const double d = std::pow(2.0, n);
  const double d2 = d * d;
  auto ladder = [&](double sites) {
    const double dim = (sites - 1) * (sites - 1);
    if (dim <= WindowOptions{}.dense_limit) return 4.0 * dim * dim * 8.0;
    return dim * (3.0 * cfg.window + 200.0) * 8.0 + dim * sites * 40.0;
  };
  double bytes = 0.0;
  const std::string& e = cfg.experiment;
  if (e == "gksl-evolve") {
    bytes = d2 * 16.0 * (31.0 + 3.0 * (n + 2.0)) + d2 * 24.0 * (2.0 * n + 2.0) + cfg.t_points * d2 * 16.0;
    if (d2 <= 1024) bytes += 4.0 * d2 * d2 * 16.0;
  } else if (e == "noise-check") {
    bytes = d2 * 16.0 * 40.0 + (d <= 16 ? 3.0 * d2 * d2 * 16.0 : 0.0) + cfg.threads * cfg.t_points * d2 * 16.0 * 2.0;
  } else if (e == "sector-census" || e == "sector-graph") {
    bytes = d * (n + 8.0) * 64.0;
  } else if (e == "effective-verify") {
    double top = 0.0;
    for (const int k : cfg.n_values.empty() ? std::vector<int>{4, 5, 6} : cfg.n_values) top = std::max(top, std::pow(2.0, k));
    bytes = 4.0 * top * top * 16.0;
  } else if (e == "fermion-dynamics") {
    const double modes = n - 1;
    const double dim = cfg.ordering == "both" ? modes * (modes - 1) : modes * (modes - 1) / 2.0;
    bytes = 5.0 * dim * dim * 8.0;
  } else if (e == "ipr-scan" || e == "heatmap") {
    bytes = ladder(n);
  } else if (e == "ipr-scaling") {
    for (const int k : cfg.n_values.empty() ? std::vector<int>{40, 60, 80, 100, 120} : cfg.n_values) bytes = std::max(bytes, ladder(k));
  } else if (e == "perturb-report") {
    bytes = (n <= 4 ? 4.0 * d2 * d2 * 16.0 : 0.0) + d2 * 16.0 * 64.0;
  }
  return bytes / 1e6;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
    throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
  }
  const double mb = estimate_memory_mb(cfg);
  if (mb > cfg.memory_cap_mb) {
    throw std::invalid_argument(cfg.experiment + ": estimated memory " + format_double(mb) + " MB exceeds the cap of " +
                                format_double(cfg.memory_cap_mb) + " MB (memory_cap_mb)");
  }
  fs::create_directories(cfg.out);
  const std::string& e = cfg.experiment;
  if (e == "gksl-evolve") return run_gksl_evolve(cfg);
  if (e == "noise-check") return run_noise_check(cfg);
  if (e == "sector-census") return run_sector_census(cfg);
  if (e == "sector-graph") return run_sector_graph(cfg);
  if (e == "effective-verify") return run_effective_verify(cfg);
  if (e == "fermion-dynamics") return run_fermion_dynamics(cfg);
  if (e == "ipr-scan") return run_ipr_scan(cfg);
  if (e == "ipr-scaling") return run_ipr_scaling(cfg);
  if (e == "heatmap") return run_heatmap(cfg);
  return run_perturb_report(cfg);
}

}  // namespace kcm
