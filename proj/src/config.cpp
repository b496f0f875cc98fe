#include "mfn/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "mfn/presets.hpp"

namespace mfn {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct RawConfig {
  // section -> key -> value, insertion order kept for the resolved dump
  std::vector<std::pair<std::string, std::string>> entries;  // "section.key" -> value
  std::map<std::string, std::string> lookup;

  void add(const std::string& section, const std::string& key, const std::string& value) {
    const std::string full = section + "." + key;
    if (lookup.count(full)) throw ConfigError(full + ": duplicate key");
    entries.push_back({full, value});
    lookup[full] = value;
  }
  const std::string* find(const std::string& full) const {
    auto it = lookup.find(full);
    return it == lookup.end() ? nullptr : &it->second;
  }
};

RawConfig parse_ini(const std::string& text, const std::string& origin) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside any section");
    if (key.empty() || value.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");
    raw.add(section, key, value);
  }
  return raw;
}

double parse_double(const std::string& full, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(full + ": expected a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& full, const std::string& v) {
  try {
    size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(full + ": expected an integer, got '" + v + "'");
  }
}

uint64_t parse_u64(const std::string& full, const std::string& v) {
  try {
    size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<uint64_t>(x);
  } catch (const std::exception&) {
    throw ConfigError(full + ": expected an unsigned integer, got '" + v + "'");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

const std::set<std::string> kGridKeys = {"tau", "n", "horizon"};
const std::set<std::string> kLayoutKeys = {"populations", "cells"};
const std::set<std::string> kNoiseKeys = {"seed", "nu_total", "r_guard"};
const std::set<std::string> kDisorderKeys = {"distribution", "dim", "scale"};
const std::set<std::string> kRunKeys = {"mode",        "particles",      "copies",
                                        "replicas",    "disorder_draws", "n_list",
                                        "out_dir",     "threads",        "epsilon",
                                        "trajectories", "slope_band_lo", "slope_band_hi"};
const std::set<std::string> kSections = {"grid", "layout", "model", "noise", "disorder", "run"};

}  // namespace

const char* run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::network: return "network";
    case RunMode::meanfield: return "meanfield";
    case RunMode::chaos_study: return "chaos-study";
  }
  return "?";
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  const RawConfig raw = parse_ini(text, origin);

  // Section and key vetting against the documented schema.
  for (const auto& [full, value] : raw.entries) {
    (void)value;
    const size_t dot = full.find('.');
    const std::string section = full.substr(0, dot);
    const std::string key = full.substr(dot + 1);
    if (!kSections.count(section)) throw ConfigError(full + ": unknown section '" + section + "'");
    if (section == "grid" && !kGridKeys.count(key)) throw ConfigError(full + ": unknown key");
    if (section == "layout" && !kLayoutKeys.count(key)) throw ConfigError(full + ": unknown key");
    if (section == "noise" && !kNoiseKeys.count(key)) throw ConfigError(full + ": unknown key");
    if (section == "disorder" && !kDisorderKeys.count(key)) throw ConfigError(full + ": unknown key");
    if (section == "run" && !kRunKeys.count(key)) throw ConfigError(full + ": unknown key");
    // model keys are vetted by the model factory below
  }

  RunConfig cfg;
  cfg.source_path = origin;

  auto str_or = [&raw](const std::string& full, const std::string& dflt) {
    const std::string* v = raw.find(full);
    return v ? *v : dflt;
  };
  auto dbl_or = [&raw](const std::string& full, double dflt) {
    const std::string* v = raw.find(full);
    return v ? parse_double(full, *v) : dflt;
  };
  auto int_or = [&raw](const std::string& full, long long dflt) {
    const std::string* v = raw.find(full);
    return v ? parse_int(full, *v) : dflt;
  };

  // [grid] (required)
  {
    const std::string* tau = raw.find("grid.tau");
    const std::string* n = raw.find("grid.n");
    const std::string* horizon = raw.find("grid.horizon");
    if (!tau) throw ConfigError("grid.tau: required key missing");
    if (!n) throw ConfigError("grid.n: required key missing");
    if (!horizon) throw ConfigError("grid.horizon: required key missing");
    cfg.grid = TimeGrid(parse_double("grid.tau", *tau),
                        static_cast<int>(parse_int("grid.n", *n)),
                        parse_double("grid.horizon", *horizon));
  }

  // [layout]
  cfg.populations = static_cast<int>(int_or("layout.populations", 1));
  cfg.cells = static_cast<int>(int_or("layout.cells", 1));
  if (cfg.populations < 1) throw ConfigError("layout.populations: must be >= 1");
  if (cfg.cells < 1) throw ConfigError("layout.cells: must be >= 1");

  // [noise]
  cfg.seed = raw.find("noise.seed") ? parse_u64("noise.seed", *raw.find("noise.seed")) : 0;
  cfg.r_guard = dbl_or("noise.r_guard", 1e6);
  if (!(cfg.r_guard > 0)) throw ConfigError("noise.r_guard: must be positive");

  // [disorder]
  cfg.disorder.dist = DisorderSpec::parse(str_or("disorder.distribution", "none"));
  cfg.disorder.dim = static_cast<int>(int_or("disorder.dim", 1));
  cfg.disorder.scale = dbl_or("disorder.scale", 1.0);
  if (cfg.disorder.dim < 1) throw ConfigError("disorder.dim: must be >= 1");

  // [model]
  {
    const std::string* id = raw.find("model.id");
    if (!id) throw ConfigError("model.id: required key missing");
    cfg.model_id = *id;
    std::optional<std::vector<std::string>> atom_offsets, atom_weights;
    for (const auto& [full, value] : raw.entries) {
      if (full.rfind("model.", 0) != 0) continue;
      const std::string key = full.substr(6);
      if (key == "id") continue;
      if (key == "delay_measure.offsets") {
        atom_offsets = split_list(value);
        continue;
      }
      if (key == "delay_measure.weights") {
        atom_weights = split_list(value);
        continue;
      }
      cfg.model_params[key] = parse_double(full, value);
    }
    if (raw.find("noise.nu_total"))
      cfg.model_params["nu_total"] = parse_double("noise.nu_total", *raw.find("noise.nu_total"));
    cfg.model = make_model(cfg.model_id, cfg.model_params);

    if (atom_offsets.has_value() != atom_weights.has_value())
      throw ConfigError("delay_measure.weights: offsets and weights must be given together");
    if (atom_offsets) {
      if (atom_offsets->size() != atom_weights->size())
        throw ConfigError("delay_measure.weights: length differs from delay_measure.offsets");
      DelayMeasure m;
      for (size_t i = 0; i < atom_offsets->size(); ++i)
        m.atoms.push_back({parse_double("delay_measure.offsets", (*atom_offsets)[i]),
                           parse_double("delay_measure.weights", (*atom_weights)[i])});
      m.validate(cfg.grid.tau);
      m.grid_atoms(cfg.grid);  // atoms must sit on grid offsets
      cfg.delay_override = m;
    } else {
      // The model default must itself be realizable on the grid.
      cfg.model->delay_measure(cfg.grid.tau).grid_atoms(cfg.grid);
    }
  }

  // [run]
  {
    const std::string mode = str_or("run.mode", "network");
    if (mode == "network")
      cfg.mode = RunMode::network;
    else if (mode == "meanfield")
      cfg.mode = RunMode::meanfield;
    else if (mode == "chaos-study")
      cfg.mode = RunMode::chaos_study;
    else
      throw ConfigError("run.mode: unknown mode '" + mode + "'");
    cfg.particles = static_cast<int>(int_or("run.particles", 8));
    cfg.copies = static_cast<int>(int_or("run.copies", 64));
    cfg.replicas = static_cast<int>(int_or("run.replicas", 16));
    cfg.disorder_draws = static_cast<int>(int_or("run.disorder_draws", 4));
    if (cfg.particles < 1) throw ConfigError("run.particles: must be >= 1");
    if (cfg.copies < 2) throw ConfigError("run.copies: must be >= 2");
    if (cfg.replicas < 1) throw ConfigError("run.replicas: must be >= 1");
    if (cfg.disorder_draws < 1) throw ConfigError("run.disorder_draws: must be >= 1");
    if (const std::string* v = raw.find("run.n_list")) {
      for (const auto& tok : split_list(*v))
        cfg.n_list.push_back(static_cast<int>(parse_int("run.n_list", tok)));
      if (!std::is_sorted(cfg.n_list.begin(), cfg.n_list.end()))
        throw ConfigError("run.n_list: must be increasing");
      for (int n : cfg.n_list)
        if (n < 1) throw ConfigError("run.n_list: entries must be >= 1");
    }
    cfg.out_dir = str_or("run.out_dir", "out");
    cfg.threads = static_cast<int>(int_or("run.threads", 0));
    if (cfg.threads < 0) throw ConfigError("run.threads: must be >= 0");
    cfg.epsilon = dbl_or("run.epsilon", -1.0);
    cfg.write_trajectories = int_or("run.trajectories", 0) != 0;
    cfg.slope_band_lo = dbl_or("run.slope_band_lo", -1.3);
    cfg.slope_band_hi = dbl_or("run.slope_band_hi", -0.7);
    if (cfg.slope_band_lo > cfg.slope_band_hi)
      throw ConfigError("run.slope_band_lo: band is empty");
  }

  // Layout is constructible and valid for the configured counts.
  cfg.layout();

  // Normalized dump for manifests; valid config syntax, so a run can be
  // reproduced from the manifest alone.
  {
    std::ostringstream os;
    const char* order[] = {"grid", "layout", "model", "noise", "disorder", "run"};
    for (const char* section : order) {
      bool any = false;
      for (const auto& [full, value] : raw.entries) {
        const std::string prefix = std::string(section) + ".";
        if (full.rfind(prefix, 0) != 0) continue;
        if (!any) os << "[" << section << "]\n";
        any = true;
        os << full.substr(prefix.size()) << " = " << value << "\n";
      }
      if (any) os << "\n";
    }
    cfg.resolved_text = os.str();
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config_text(ss.str(), path);
  cfg.source_path = path;
  return cfg;
}

}  // namespace mfn
