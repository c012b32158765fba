#include "kcm/quasiparticle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace kcm {

namespace {

using Trip = Eigen::Triplet<double, std::int64_t>;

std::vector<int> walls(BasisState s, int a, int b) {
  std::vector<int> out;
  for (int i = 1; i < s.n_sites; ++i) {
    if (s.spin(i) == a && s.spin(i + 1) == b) out.push_back(i);
  }
  return out;
}

void finish(FermionModel& m, const std::vector<Trip>& trips) {
  const auto d = static_cast<std::int64_t>(m.labels.size());
  m.matrix = SparseReal(d, d);
  m.matrix.setFromTriplets(trips.begin(), trips.end());
  m.matrix.makeCompressed();
}

}  // namespace

Eigen::Index FermionModel::index_of(int mu, int nu) const {
  const int L = n_modes();
  switch (mode) {
    case FermionMode::single:
      if (mu >= 1 && mu <= L && nu == 0) return mu - 1;
      break;
    case FermionMode::coupled_ladder:
      if (mu >= 1 && mu <= L && nu >= 1 && nu <= L) return static_cast<Eigen::Index>(mu - 1) * L + (nu - 1);
      break;
    case FermionMode::two_particle_kink:
      for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k][0] == mu && labels[k][1] == nu) return static_cast<Eigen::Index>(k);
      }
      break;
  }
  throw std::out_of_range("index_of: (" + std::to_string(mu) + ", " + std::to_string(nu) + ") is not a basis label");
}

std::vector<int> FermionModel::occupied_columns(Eigen::Index k) const {
  const auto& lab = labels.at(static_cast<std::size_t>(k));
  switch (mode) {
    case FermionMode::single:
      return {lab[0] - 1};
    case FermionMode::two_particle_kink:
      return {lab[0] - 1, lab[1] - 1};
    case FermionMode::coupled_ladder:
      return {lab[0] - 1, n_modes() + lab[1] - 1};
  }
  return {};
}

int domain_wall_to_mode(BasisState s) {
  if (s.n_sites < 2 || s.spin(1) != 0 || s.spin(s.n_sites) != 1) {
    throw std::invalid_argument("domain_wall_to_mode: " + s.to_string() + " does not have boundary spins (0, 1)");
  }
  const auto up = walls(s, 0, 1);
  if (up.size() != 1 || !walls(s, 1, 0).empty()) {
    throw std::invalid_argument("domain_wall_to_mode: " + s.to_string() + " is not a single-wall state");
  }
  return up.front();
}

std::pair<int, int> domain_wall_pair(BasisState s) {
  if (s.n_sites < 2 || s.spin(1) != 0 || s.spin(s.n_sites) != 0) {
    throw std::invalid_argument("domain_wall_pair: " + s.to_string() + " does not have boundary spins (0, 0)");
  }
  const auto up = walls(s, 0, 1);
  const auto down = walls(s, 1, 0);
  if (up.size() != 1 || down.size() != 1) {
    throw std::invalid_argument("domain_wall_pair: " + s.to_string() + " is not a kink-antikink state");
  }
  return {up.front(), down.front()};
}

FermionModel single_particle_stark(int n_sites, double J, double h) {
  if (n_sites < 3) throw std::invalid_argument("single_particle_stark: N must be >= 3");
  FermionModel m;
  m.mode = FermionMode::single;
  m.n_sites = n_sites;
  m.J = J;
  m.h = h;
  m.dropped_constant = -0.5 * n_sites * h;
  m.dropped_description = "-N h / 2";
  const int L = m.n_modes();
  std::vector<Trip> trips;
  for (int mu = 1; mu <= L; ++mu) {
    m.labels.push_back({mu, 0});
    if (h != 0.0) trips.emplace_back(mu - 1, mu - 1, h * mu);
    if (mu < L && J != 0.0) {
      trips.emplace_back(mu - 1, mu, J);
      trips.emplace_back(mu, mu - 1, J);
    }
  }
  finish(m, trips);
  return m;
}

FermionModel two_particle_kink_model(int n_sites, double J, double h, PairOrdering ordering) {
  if (n_sites < 4) throw std::invalid_argument("two_particle_kink_model: N must be >= 4");
  FermionModel m;
  m.mode = FermionMode::two_particle_kink;
  m.n_sites = n_sites;
  m.J = J;
  m.h = h;
  m.dropped_constant = 0.5 * (n_sites - 2) * h;
  m.dropped_description = "(N - 2) h / 2";
  const int L = m.n_modes();
  for (int mu = 1; mu <= L; ++mu) {
    for (int nu = 1; nu <= L; ++nu) {
      if (mu == nu) continue;
      if (ordering == PairOrdering::wedge && nu < mu) continue;
      m.labels.push_back({mu, nu});
    }
  }
  std::vector<Trip> trips;
  for (std::size_t k = 0; k < m.labels.size(); ++k) {
    const auto [mu, nu] = m.labels[k];
    const auto row = static_cast<std::int64_t>(k);
    if (h != 0.0) trips.emplace_back(row, row, -h * std::abs(mu - nu));
    if (J == 0.0) continue;
    const std::array<std::array<int, 2>, 4> moves{{{mu + 1, nu}, {mu - 1, nu}, {mu, nu + 1}, {mu, nu - 1}}};
    for (const auto& mv : moves) {
      if (mv[0] < 1 || mv[0] > L || mv[1] < 1 || mv[1] > L || mv[0] == mv[1]) continue;
      if (ordering == PairOrdering::wedge && mv[1] < mv[0]) continue;
      trips.emplace_back(row, m.index_of(mv[0], mv[1]), J);
    }
  }
  finish(m, trips);
  return m;
}

FermionModel coupled_chain_model(int n_sites, double J, double h, double g, double disorder_amplitude,
                                 std::uint64_t seed) {
  if (n_sites < 3) throw std::invalid_argument("coupled_chain_model: N must be >= 3");
  if (disorder_amplitude < 0.0) throw std::invalid_argument("coupled_chain_model: disorder amplitude must be >= 0");
  FermionModel m;
  m.mode = FermionMode::coupled_ladder;
  m.n_sites = n_sites;
  m.J = J;
  m.h = h;
  m.g = g;
  m.disorder_amplitude = disorder_amplitude;
  m.seed = seed;
  m.dropped_constant = static_cast<double>(n_sites) * (g - h);
  m.dropped_description = "N (g - h): -N h / 2 per chain plus g N from the rung coupling";
  const int L = m.n_modes();
  m.disorder.assign(static_cast<std::size_t>(2 * L), 0.0);
  if (disorder_amplitude > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-disorder_amplitude, disorder_amplitude);
    for (auto& d : m.disorder) d = uni(rng);
  }
  std::vector<Trip> trips;
  for (int mu1 = 1; mu1 <= L; ++mu1) {
    for (int mu2 = 1; mu2 <= L; ++mu2) {
      m.labels.push_back({mu1, mu2});
      const auto row = static_cast<std::int64_t>(mu1 - 1) * L + (mu2 - 1);
      const double diag = potential_xi(mu1, mu2, h, g) + m.disorder[static_cast<std::size_t>(mu1 - 1)] +
                          m.disorder[static_cast<std::size_t>(L + mu2 - 1)];
      if (diag != 0.0) trips.emplace_back(row, row, diag);
      if (J == 0.0) continue;
      if (mu1 < L) {
        trips.emplace_back(row, row + L, J);
        trips.emplace_back(row + L, row, J);
      }
      if (mu2 < L) {
        trips.emplace_back(row, row + 1, J);
        trips.emplace_back(row + 1, row, J);
      }
    }
  }
  finish(m, trips);
  return m;
}

double potential_xi(int mu1, int mu2, double h, double g) {
  if (mu1 < 1 || mu2 < 1) throw std::invalid_argument("potential_xi: mode indices start at 1");
  return mu1 * h + mu2 * h - 2.0 * g * std::abs(mu1 - mu2);
}

double stark_inverse_length(double h, double J) { return 2.0 * std::asinh(h / (2.0 * J)); }

std::string to_string(FermionMode mode) {
  switch (mode) {
    case FermionMode::single:
      return "single";
    case FermionMode::two_particle_kink:
      return "two_particle_kink";
    case FermionMode::coupled_ladder:
      return "coupled_ladder";
  }
  return "unknown";
}

}  // namespace kcm
