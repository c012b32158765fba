#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kcm/config.hpp"
#include "kcm/dfs.hpp"
#include "kcm/quasiparticle.hpp"

namespace kcm {

/// '#'-prefixed header: experiment, config hash, every config line, then extra `key: value` lines.
std::string metadata_header(const ExperimentConfig& cfg, const std::vector<std::pair<std::string, std::string>>& extra = {});

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const ExperimentConfig& cfg, const std::vector<std::string>& columns,
            const std::vector<std::pair<std::string, std::string>>& extra = {});

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(const std::string& v);
  void end_row();

 private:
  std::ofstream out_;
  bool first_ = true;
};

/// {"key", "n_frozen", "frozen_bonds", "vertices": [bitstrings], "edges": [[i, j]], "adjacency": [[...]]}
nlohmann::json graph_json(const ConnectivityGraph& g);

/// "i j" per line after a '#' header.
void write_edge_list(const std::string& path, const ConnectivityGraph& g, const std::string& header);

/// Metadata object embedding the config, its hash, and extra fields.
nlohmann::json metadata_json(const ExperimentConfig& cfg);

void write_json(const std::string& path, const nlohmann::json& j);

/// Matrix Market coordinate file (general, real) with '%' comment lines.
void write_matrix_market(const std::string& path, const SparseReal& m, const std::string& comment);

nlohmann::json model_metadata(const FermionModel& m);

std::string format_double(double v);

}  // namespace kcm
