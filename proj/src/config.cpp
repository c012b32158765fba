#include "kcm/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace kcm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not a number: " + s);
  return v;
}

long long to_int(const std::string& s) {
  std::size_t pos = 0;
  const long long v = std::stoll(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not an integer: " + s);
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("not a boolean: " + s);
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& f) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ',';
    out += f(v[k]);
  }
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"experiment", [](const auto& c) { return c.experiment; }, [](auto& c, const auto& v) { c.experiment = v; }},
      {"N", [](const auto& c) { return std::to_string(c.n_sites); },
       [](auto& c, const auto& v) { c.n_sites = static_cast<int>(to_int(v)); }},
      {"J", [](const auto& c) { return fmt(c.J); }, [](auto& c, const auto& v) { c.J = to_double(v); }},
      {"h", [](const auto& c) { return fmt(c.h); }, [](auto& c, const auto& v) { c.h = to_double(v); }},
      {"V", [](const auto& c) { return fmt(c.V); }, [](auto& c, const auto& v) { c.V = to_double(v); }},
      {"g", [](const auto& c) { return fmt(c.g); }, [](auto& c, const auto& v) { c.g = to_double(v); }},
      {"gamma", [](const auto& c) { return fmt(c.gamma); }, [](auto& c, const auto& v) { c.gamma = to_double(v); }},
      {"jumps", [](const auto& c) { return c.jumps; },
       [](auto& c, const auto& v) {
         if (v != "QP" && v != "QQ") throw std::invalid_argument("jumps must be QP or QQ");
         c.jumps = v;
       }},
      {"bulk_fields", [](const auto& c) { return std::string(c.bulk_fields ? "true" : "false"); },
       [](auto& c, const auto& v) { c.bulk_fields = to_bool(v); }},
      {"initial", [](const auto& c) { return c.initial; }, [](auto& c, const auto& v) { c.initial = v; }},
      {"starts", [](const auto& c) { return join(c.starts, [](const std::string& s) { return s; }); },
       [](auto& c, const auto& v) { c.starts = split_list(v); }},
      {"t_max", [](const auto& c) { return fmt(c.t_max); }, [](auto& c, const auto& v) { c.t_max = to_double(v); }},
      {"t_points", [](const auto& c) { return std::to_string(c.t_points); },
       [](auto& c, const auto& v) { c.t_points = static_cast<int>(to_int(v)); }},
      {"dt", [](const auto& c) { return fmt(c.dt); }, [](auto& c, const auto& v) { c.dt = to_double(v); }},
      {"trajectories", [](const auto& c) { return std::to_string(c.trajectories); },
       [](auto& c, const auto& v) { c.trajectories = static_cast<int>(to_int(v)); }},
      {"repeats", [](const auto& c) { return std::to_string(c.repeats); },
       [](auto& c, const auto& v) { c.repeats = static_cast<int>(to_int(v)); }},
      {"window", [](const auto& c) { return std::to_string(c.window); },
       [](auto& c, const auto& v) { c.window = static_cast<int>(to_int(v)); }},
      {"disorder", [](const auto& c) { return fmt(c.disorder); }, [](auto& c, const auto& v) { c.disorder = to_double(v); }},
      {"realizations", [](const auto& c) { return std::to_string(c.realizations); },
       [](auto& c, const auto& v) { c.realizations = static_cast<int>(to_int(v)); }},
      {"h_values", [](const auto& c) { return join(c.h_values, fmt); },
       [](auto& c, const auto& v) {
         c.h_values.clear();
         for (const auto& s : split_list(v)) c.h_values.push_back(to_double(s));
       }},
      {"n_values", [](const auto& c) { return join(c.n_values, [](int n) { return std::to_string(n); }); },
       [](auto& c, const auto& v) {
         c.n_values.clear();
         for (const auto& s : split_list(v)) c.n_values.push_back(static_cast<int>(to_int(s)));
       }},
      {"gammas", [](const auto& c) { return join(c.gammas, fmt); },
       [](auto& c, const auto& v) {
         c.gammas.clear();
         for (const auto& s : split_list(v)) c.gammas.push_back(to_double(s));
       }},
      {"ordering", [](const auto& c) { return c.ordering; },
       [](auto& c, const auto& v) {
         if (v != "wedge" && v != "both") throw std::invalid_argument("ordering must be wedge or both");
         c.ordering = v;
       }},
      {"seed", [](const auto& c) { return std::to_string(c.seed); },
       [](auto& c, const auto& v) { c.seed = std::stoull(v); }},
      {"memory_cap_mb", [](const auto& c) { return fmt(c.memory_cap_mb); },
       [](auto& c, const auto& v) { c.memory_cap_mb = to_double(v); }},
      {"out", [](const auto& c) { return c.out; }, [](auto& c, const auto& v) { c.out = v; }},
      {"threads", [](const auto& c) { return std::to_string(c.threads); },
       [](auto& c, const auto& v) { c.threads = static_cast<int>(to_int(v)); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"gksl-evolve",      "noise-check", "sector-census", "sector-graph",
                                                 "effective-verify", "fermion-dynamics", "ipr-scan", "ipr-scaling",
                                                 "heatmap",          "perturb-report"};
  return names;
}

void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      try {
        f.set(cfg, value);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("config key '" + key + "': " + e.what());
      } catch (const std::out_of_range&) {
        throw std::invalid_argument("config key '" + key + "': value out of range");
      }
      return;
    }
  }
  throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string serialize(const ExperimentConfig& cfg) {
  std::string out = "[" + cfg.experiment + "]\n";
  for (const auto& f : fields()) {
    if (std::string(f.key) == "experiment") continue;
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text, const std::string& experiment) {
  struct Line {
    int number;
    std::string section;
    std::string key;
    std::string value;
  };
  std::vector<Line> lines;
  std::string section;
  std::string first_section;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("config line " + std::to_string(number) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      if (first_section.empty()) first_section = section;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(number) + ": expected key = value");
    lines.push_back({number, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
  }

  const std::string target = experiment.empty() ? first_section : experiment;
  ExperimentConfig cfg;
  if (!target.empty()) cfg.experiment = target;
  for (const bool sectioned : {false, true}) {
    for (const auto& l : lines) {
      if (sectioned ? l.section != target || l.section.empty() : !l.section.empty()) continue;
      try {
        set_value(cfg, l.key, l.value);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("config line " + std::to_string(l.number) + ": " + e.what());
      }
    }
  }
  if (!target.empty()) cfg.experiment = target;
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::string& experiment) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), experiment);
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : serialize(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace kcm
