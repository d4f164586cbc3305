#pragma once

// Convergence-study harness: relative energy-norm errors against a cached
// monolithic reference, time-convergence orders, and CSV emitters.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "fsi/coupling.hpp"

namespace fsi {

enum class Scheme { Ern, Jagged, MonolithicReference };

inline std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Ern: return "ern";
    case Scheme::Jagged: return "jagged";
    case Scheme::MonolithicReference: return "reference";
  }
  return "?";
}

struct StudyConfig {
  Scheme scheme = Scheme::Ern;
  int n_f = 10;
  int n_s = 10;
  std::vector<int> rates = {0, 1, 2, 3};
  int extr = 1;
  double t_final = 0.015;
  Physics physics;
  double reference_tau = 1.5625e-5;
  int reference_rate_space = 4;
  std::string out_dir = ".";
  std::string cache_dir = "fsi_cache";
  int jobs = 1;
  bool strict = false;
};

struct ErrorRow {
  int rate = 0;
  std::optional<double> error;  // absent when unstable
  std::optional<double> order;  // absent on the first rate
  double seconds = 0.0;
  bool stable = true;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
};

// O = log(E_curr / E_prev) / log(1/2)
inline double compute_order(double e_prev, double e_curr) {
  if (e_prev <= 0.0 || e_curr <= 0.0) {
    throw std::invalid_argument("compute_order: errors must be positive");
  }
  return std::log(e_curr / e_prev) / std::log(0.5);
}

// Relative elastic energy-norm error of a coarse displacement against a
// reference on a nested finer interface grid (exact nodal restriction).
inline double relative_error(const Vector& d_test, const Vector& d_ref,
                             const SolidParams& params, double h_test) {
  const auto n_t = d_test.size();
  const auto n_r = d_ref.size();
  if (n_t < 2 || n_r < n_t || (n_r - 1) % (n_t - 1) != 0) {
    throw std::invalid_argument("relative_error: grids are not nested");
  }
  const auto stride = (n_r - 1) / (n_t - 1);
  Vector restricted(n_t);
  for (Eigen::Index k = 0; k < n_t; ++k) restricted[k] = d_ref[k * stride];
  const double ref_norm = elastic_energy_norm(restricted, params, h_test);
  if (ref_norm == 0.0) throw std::invalid_argument("relative_error: zero reference norm");
  return elastic_energy_norm(Vector(d_test - restricted), params, h_test) / ref_norm;
}

namespace detail {

inline std::string format_sig6(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string physics_key(const StudyConfig& cfg) {
  std::ostringstream os;
  os << std::setprecision(17) << "ref tau=" << cfg.reference_tau
     << " hrate=" << cfg.reference_rate_space << " T=" << cfg.t_final
     << " rhof=" << cfg.physics.fluid.rho << " mu=" << cfg.physics.fluid.mu
     << " gamma=" << cfg.physics.fluid.stab_gamma
     << " rhos=" << cfg.physics.solid.rho << " eps=" << cfg.physics.solid.eps
     << " l1=" << cfg.physics.solid.lambda1 << " l0=" << cfg.physics.solid.lambda0
     << " visc=" << cfg.physics.solid.viscous_enabled
     << " beta=" << cfg.physics.solid.viscous_beta
     << " pmax=" << cfg.physics.inlet.p_max << " tstar=" << cfg.physics.inlet.t_star;
  return os.str();
}

inline void write_vector(std::ostream& os, const Vector& v) {
  os << v.size() << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << v[i] << '\n';
}

inline Vector read_vector(std::istream& is) {
  Eigen::Index n = 0;
  is >> n;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) is >> v[i];
  if (!is) throw std::runtime_error("corrupt cache file");
  return v;
}

}  // namespace detail

struct ReferenceSolution {
  SolidState solid_final;
  double wall_seconds = 0.0;
};

// Monolithic reference at (reference_tau, reference_rate_space), computed
// once and cached on disk. First writer wins via atomic rename.
inline ReferenceSolution get_reference(const StudyConfig& cfg) {
  namespace fs = std::filesystem;
  const std::string key = detail::physics_key(cfg);
  fs::create_directories(cfg.cache_dir);
  const fs::path path =
      fs::path(cfg.cache_dir) /
      ("ref_" + std::to_string(detail::fnv1a(key)) + ".txt");

  if (fs::exists(path)) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // key line, informational
    ReferenceSolution ref;
    in >> ref.wall_seconds >> ref.solid_final.t;
    ref.solid_final.d = detail::read_vector(in);
    ref.solid_final.dd = detail::read_vector(in);
    return ref;
  }

  Trajectory traj = run_monolithic_reference(cfg.reference_tau,
                                             cfg.reference_rate_space,
                                             cfg.t_final, cfg.physics);
  if (!traj.stable) throw std::runtime_error("reference run unstable");
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp);
    out << key << '\n'
        << std::setprecision(17) << traj.wall_seconds << ' '
        << traj.solid_final.t << '\n';
    detail::write_vector(out, traj.solid_final.d);
    detail::write_vector(out, traj.solid_final.dd);
  }
  fs::rename(tmp, path);
  return {traj.solid_final, traj.wall_seconds};
}

inline Trajectory run_scheme_at_rate(const StudyConfig& cfg, int rate,
                                     RunOptions opts = {}) {
  switch (cfg.scheme) {
    case Scheme::Ern:
      return run_ern(rate, cfg.extr, cfg.t_final, cfg.physics, opts);
    case Scheme::Jagged: {
      JaggedConfig jc{cfg.n_f, cfg.n_s, coarse_tau_for_rate(rate), cfg.extr};
      return run_jagged(jc, rate, cfg.t_final, cfg.physics, opts);
    }
    case Scheme::MonolithicReference:
      return run_monolithic_reference(cfg.reference_tau, rate, cfg.t_final,
                                      cfg.physics, opts);
  }
  throw std::invalid_argument("run_scheme_at_rate: unknown scheme");
}

// Run the scheme at every requested rate, compare final-time displacements
// against the cached reference, and attach convergence orders. Unstable
// runs are recorded, not fatal.
inline ErrorReport run_study(const StudyConfig& cfg) {
  if (cfg.rates.empty()) throw std::invalid_argument("run_study: empty rate list");
  const ReferenceSolution ref = get_reference(cfg);

  std::vector<Trajectory> runs(cfg.rates.size());
  if (cfg.jobs > 1) {
    std::vector<std::future<Trajectory>> futures;
    futures.reserve(cfg.rates.size());
    for (int rate : cfg.rates) {
      futures.push_back(std::async(std::launch::async, [&cfg, rate] {
        return run_scheme_at_rate(cfg, rate);
      }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) runs[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < cfg.rates.size(); ++i) {
      runs[i] = run_scheme_at_rate(cfg, cfg.rates[i]);
    }
  }

  ErrorReport report;
  std::optional<double> prev_error;
  for (std::size_t i = 0; i < cfg.rates.size(); ++i) {
    const int rate = cfg.rates[i];
    const Trajectory& traj = runs[i];
    ErrorRow row;
    row.rate = rate;
    row.seconds = traj.wall_seconds;
    row.stable = traj.stable;
    if (traj.stable) {
      const double h = kBaseMeshSize / std::pow(2.0, rate);
      row.error = relative_error(traj.solid_final.d, ref.solid_final.d,
                                 cfg.physics.solid, h);
      if (prev_error && *row.error > 0.0 && *prev_error > 0.0) {
        row.order = compute_order(*prev_error, *row.error);
      }
      prev_error = row.error;
    } else {
      prev_error.reset();
    }
    report.rows.push_back(row);
  }
  return report;
}

// CSV with header "rate,E,O,seconds,stable", 6 significant digits.
inline void emit_report(const ErrorReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_report: cannot open " + path);
  out << "rate,E,O,seconds,stable\n";
  for (const auto& row : report.rows) {
    out << row.rate << ',';
    if (row.error) out << detail::format_sig6(*row.error);
    out << ',';
    if (row.order) out << detail::format_sig6(*row.order);
    out << ',' << detail::format_sig6(row.seconds) << ','
        << (row.stable ? "true" : "false") << '\n';
  }
}

// CSV "x,dy" over the interface nodes, ascending x.
inline void emit_displacement_profile(const SolidState& state,
                                      const std::vector<double>& interface_x,
                                      const std::string& path) {
  if (static_cast<Eigen::Index>(interface_x.size()) != state.d.size()) {
    throw std::invalid_argument("emit_displacement_profile: size mismatch");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_displacement_profile: cannot open " + path);
  out << "x,dy\n" << std::setprecision(9);
  for (std::size_t i = 0; i < interface_x.size(); ++i) {
    out << interface_x[i] << ',' << state.d[static_cast<Eigen::Index>(i)] << '\n';
  }
}

// Human-readable event trace for one coarse interval.
inline void emit_schedule_trace(int n_f, int n_s, double tau_coarse,
                                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_schedule_trace: cannot open " + path);
  const auto events = jagged_schedule(n_f, n_s);
  out << "F " << n_f << " S " << n_s << ": " << format_schedule(events) << '\n';
  out << std::setprecision(9);
  for (const auto& ev : events) {
    out << (ev.kind == ScheduleEvent::Kind::FluidStep ? 'F' : 'S') << ev.ordinal
        << " t=" << ev.time_fraction * tau_coarse << '\n';
  }
}

// Plain-text trajectory checkpoint: t, u, p, d, dd per stored step.
inline void emit_checkpoint(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_checkpoint: cannot open " + path);
  out << std::setprecision(17);
  out << traj.fluid_steps.size() << ' ' << traj.solid_steps.size() << '\n';
  for (const auto& f : traj.fluid_steps) {
    out << "fluid " << f.step_index << ' ' << f.t << '\n';
    detail::write_vector(out, f.u);
    detail::write_vector(out, f.p);
  }
  for (const auto& s : traj.solid_steps) {
    out << "solid " << s.step_index << ' ' << s.t << '\n';
    detail::write_vector(out, s.d);
    detail::write_vector(out, s.dd);
  }
}

}  // namespace fsi
