#pragma once

// Plain-text "key = value" configuration overriding the default physical
// setup; CLI flags override the file.

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fsi/study.hpp"

namespace fsi {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("invalid numeric value for " + key + ": " + v);
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("invalid boolean value for " + key + ": " + v);
}

}  // namespace detail

inline void apply_config_entry(StudyConfig& cfg, const std::string& key,
                               const std::string& value) {
  auto num = [&] { return detail::to_double(key, value); };
  bool lame_dirty = false;
  if (key == "fluid.rho") cfg.physics.fluid.rho = num();
  else if (key == "fluid.mu") cfg.physics.fluid.mu = num();
  else if (key == "fluid.stab_gamma") cfg.physics.fluid.stab_gamma = num();
  else if (key == "solid.rho") cfg.physics.solid.rho = num();
  else if (key == "solid.eps") { cfg.physics.solid.eps = num(); lame_dirty = true; }
  else if (key == "solid.E") { cfg.physics.solid.E = num(); lame_dirty = true; }
  else if (key == "solid.nu") { cfg.physics.solid.nu = num(); lame_dirty = true; }
  else if (key == "solid.viscous_enabled")
    cfg.physics.solid.viscous_enabled = detail::to_bool(key, value);
  else if (key == "solid.viscous_beta") cfg.physics.solid.viscous_beta = num();
  else if (key == "inlet.pmax") cfg.physics.inlet.p_max = num();
  else if (key == "inlet.tstar") cfg.physics.inlet.t_star = num();
  else if (key == "run.tfinal") cfg.t_final = num();
  else if (key == "run.extr") cfg.extr = static_cast<int>(num());
  else if (key == "run.nf") cfg.n_f = static_cast<int>(num());
  else if (key == "run.ns") cfg.n_s = static_cast<int>(num());
  else if (key == "robin.rate_grid") {
    if (value == "solid") cfg.physics.robin_rate_on_solid_grid = true;
    else if (value == "fluid") cfg.physics.robin_rate_on_solid_grid = false;
    else throw ConfigError("robin.rate_grid must be 'solid' or 'fluid'");
  }
  else if (key == "blowup.threshold") cfg.physics.blowup_threshold = num();
  else if (key == "reference.tau") cfg.reference_tau = num();
  else if (key == "reference.h") {
    const double h = num();
    const double rate = std::log2(kBaseMeshSize / h);
    if (rate < 0 || std::abs(rate - std::round(rate)) > 1e-9) {
      throw ConfigError("reference.h must be 0.1 / 2^k");
    }
    cfg.reference_rate_space = static_cast<int>(std::lround(rate));
  }
  else if (key == "cache.dir") cfg.cache_dir = value;
  else if (key == "out.dir") cfg.out_dir = value;
  else if (key == "jobs") cfg.jobs = static_cast<int>(num());
  else throw ConfigError("unknown config key: " + key);
  if (lame_dirty) cfg.physics.solid.update_lame();
}

inline void load_config_file(StudyConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    apply_config_entry(cfg, detail::trim(line.substr(0, eq)),
                       detail::trim(line.substr(eq + 1)));
  }
}

}  // namespace fsi
