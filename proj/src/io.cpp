#include "kcm/io.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace kcm {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string metadata_header(const ExperimentConfig& cfg, const std::vector<std::pair<std::string, std::string>>& extra) {
  std::string out = "# experiment: " + cfg.experiment + "\n# config_hash: " + config_hash(cfg) + "\n";
  std::istringstream lines(serialize(cfg));
  std::string line;
  while (std::getline(lines, line)) out += "# config: " + line + "\n";
  for (const auto& [k, v] : extra) out += "# " + k + ": " + v + "\n";
  return out;
}

CsvWriter::CsvWriter(const std::string& path, const ExperimentConfig& cfg, const std::vector<std::string>& columns,
                     const std::vector<std::pair<std::string, std::string>>& extra)
    : out_(open_out(path)) {
  out_ << metadata_header(cfg, extra);
  for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
  out_ << "\n";
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }
CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (!first_) out_ << ',';
  out_ << v;
  first_ = false;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

nlohmann::json graph_json(const ConnectivityGraph& g) {
  nlohmann::json j;
  j["key"] = g.key.to_string();
  j["n_frozen"] = g.n_frozen();
  j["frozen_bonds"] = g.frozen_bonds;
  std::vector<std::string> verts;
  for (const auto& v : g.vertices) verts.push_back(v.to_string());
  j["vertices"] = verts;
  std::vector<std::vector<int>> adjacency(g.vertices.size());
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : g.edges) {
    edges.push_back({a, b});
    adjacency[static_cast<std::size_t>(a)].push_back(b);
    adjacency[static_cast<std::size_t>(b)].push_back(a);
  }
  j["edges"] = edges;
  j["adjacency"] = adjacency;
  return j;
}

void write_edge_list(const std::string& path, const ConnectivityGraph& g, const std::string& header) {
  auto out = open_out(path);
  out << header;
  out << "# vertices: " << g.vertices.size() << "\n# edges: " << g.edges.size() << "\n";
  for (const auto& [a, b] : g.edges) out << a << ' ' << b << '\n';
}

nlohmann::json metadata_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = cfg.experiment;
  j["config_hash"] = config_hash(cfg);
  j["config"] = serialize(cfg);
  j["seed"] = cfg.seed;
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_matrix_market(const std::string& path, const SparseReal& m, const std::string& comment) {
  auto out = open_out(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  std::istringstream lines(comment);
  std::string line;
  while (std::getline(lines, line)) out << "% " << (line.rfind("# ", 0) == 0 ? line.substr(2) : line) << '\n';
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (std::int64_t k = 0; k < m.outerSize(); ++k) {
    for (SparseReal::InnerIterator it(m, k); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << format_double(it.value()) << '\n';
    }
  }
}

nlohmann::json model_metadata(const FermionModel& m) {
  nlohmann::json j;
  j["mode"] = to_string(m.mode);
  j["N"] = m.n_sites;
  j["J"] = m.J;
  j["h"] = m.h;
  j["g"] = m.g;
  j["dimension"] = m.dim();
  j["disorder_amplitude"] = m.disorder_amplitude;
  j["disorder_seed"] = m.seed;
  j["dropped_constant"] = m.dropped_constant;
  j["dropped_constant_form"] = m.dropped_description;
  return j;
}

}  // namespace kcm
