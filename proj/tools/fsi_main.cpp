// Command-line driver for the coupled channel benchmark: single runs,
// convergence studies, and jagged step-count sweeps.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fsi/config.hpp"
#include "fsi/study.hpp"

namespace {

constexpr int kExitUnstable = 2;
constexpr int kExitBadConfig = 3;

fsi::Scheme parse_scheme(const std::string& name) {
  if (name == "ern") return fsi::Scheme::Ern;
  if (name == "jagged") return fsi::Scheme::Jagged;
  if (name == "reference") return fsi::Scheme::MonolithicReference;
  throw fsi::ConfigError("unknown scheme: " + name);
}

std::vector<int> parse_rates(const std::string& csv) {
  std::vector<int> rates;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = fsi::detail::trim(item);
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      const int r = std::stoi(item, &pos);
      if (pos != item.size() || r < 0) throw std::invalid_argument(item);
      rates.push_back(r);
    } catch (const std::exception&) {
      throw fsi::ConfigError("invalid rate list entry: " + item);
    }
  }
  if (rates.empty()) throw fsi::ConfigError("empty rate list");
  return rates;
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& csv) {
  std::vector<std::pair<int, int>> pairs;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = fsi::detail::trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument(item);
      const int nf = std::stoi(item.substr(0, colon));
      const int ns = std::stoi(item.substr(colon + 1));
      if (nf < 1 || ns < 1) throw std::invalid_argument(item);
      pairs.emplace_back(nf, ns);
    } catch (const std::exception&) {
      throw fsi::ConfigError("invalid pair (expected Nf:Ns): " + item);
    }
  }
  if (pairs.empty()) throw fsi::ConfigError("empty pair list");
  return pairs;
}

std::filesystem::path out_path(const fsi::StudyConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return std::filesystem::path(cfg.out_dir) / name;
}

void print_report(const fsi::ErrorReport& report) {
  std::cout << "rate        E           O     seconds  stable\n";
  for (const auto& row : report.rows) {
    std::cout << row.rate << "  ";
    std::cout << (row.error ? fsi::detail::format_sig6(*row.error) : std::string("-"))
              << "  "
              << (row.order ? fsi::detail::format_sig6(*row.order) : std::string("-"))
              << "  " << fsi::detail::format_sig6(row.seconds) << "  "
              << (row.stable ? "true" : "false") << '\n';
  }
}

bool all_stable(const fsi::ErrorReport& report) {
  for (const auto& row : report.rows) {
    if (!row.stable) return false;
  }
  return true;
}

struct CommonFlags {
  std::string config_file;
  std::string scheme = "ern";
  std::string rates = "0,1,2,3";
  int rate = 0;
  int nf = -1, ns = -1, extr = -1, jobs = -1;
  double tfinal = -1.0, reference_tau = -1.0, reference_h = -1.0;
  std::string out_dir, cache_dir;
  bool strict = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_rates) {
  cmd->add_option("--config", f.config_file, "key = value configuration file");
  if (with_rates) {
    cmd->add_option("--rates", f.rates, "comma-separated refinement rates");
  } else {
    cmd->add_option("--rate", f.rate, "refinement rate (halves h and tau per unit)");
  }
  cmd->add_option("--nf", f.nf, "fluid steps per coarse interval");
  cmd->add_option("--ns", f.ns, "solid steps per coarse interval");
  cmd->add_option("--extr", f.extr, "extrapolation order (0, 1 or 2)");
  cmd->add_option("--tfinal", f.tfinal, "final time");
  cmd->add_option("--reference-tau", f.reference_tau, "reference time step");
  cmd->add_option("--reference-h", f.reference_h, "reference mesh size (0.1 / 2^k)");
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_option("--cache", f.cache_dir, "reference cache directory");
  cmd->add_option("--jobs", f.jobs, "parallel runs in a study");
  cmd->add_flag("--strict", f.strict, "exit with status 2 if any run is unstable");
}

// Config file first, then flags on top.
fsi::StudyConfig build_config(const CommonFlags& f, bool with_rates) {
  fsi::StudyConfig cfg;
  if (!f.config_file.empty()) fsi::load_config_file(cfg, f.config_file);
  cfg.scheme = parse_scheme(f.scheme);
  if (with_rates) cfg.rates = parse_rates(f.rates);
  if (f.nf >= 0) cfg.n_f = f.nf;
  if (f.ns >= 0) cfg.n_s = f.ns;
  if (f.extr >= 0) cfg.extr = f.extr;
  if (f.tfinal >= 0.0) cfg.t_final = f.tfinal;
  if (f.reference_tau >= 0.0) cfg.reference_tau = f.reference_tau;
  if (f.reference_h >= 0.0) {
    fsi::apply_config_entry(cfg, "reference.h", fsi::detail::format_sig6(f.reference_h));
  }
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  if (!f.cache_dir.empty()) cfg.cache_dir = f.cache_dir;
  if (f.jobs >= 1) cfg.jobs = f.jobs;
  cfg.strict = f.strict;
  if (cfg.extr < 0 || cfg.extr > 2) throw fsi::ConfigError("extr must be 0, 1 or 2");
  return cfg;
}

int cmd_run(const CommonFlags& flags, bool checkpoint) {
  const fsi::StudyConfig cfg = build_config(flags, false);
  fsi::RunOptions opts;
  if (checkpoint) opts.store_stride = 1;
  const fsi::Trajectory traj = fsi::run_scheme_at_rate(cfg, flags.rate, opts);

  const std::string tag = "rate" + std::to_string(flags.rate);
  fsi::emit_displacement_profile(traj.solid_final, traj.interface_x,
                                 out_path(cfg, "profile_" + tag + ".csv").string());
  if (cfg.scheme == fsi::Scheme::Jagged) {
    fsi::emit_schedule_trace(cfg.n_f, cfg.n_s, fsi::coarse_tau_for_rate(flags.rate),
                             out_path(cfg, "schedule_" + std::to_string(cfg.n_f) + "_" +
                                               std::to_string(cfg.n_s) + ".txt")
                                 .string());
  }
  if (checkpoint) {
    fsi::emit_checkpoint(traj, out_path(cfg, "checkpoint_" + tag + ".txt").string());
  }
  std::cout << fsi::scheme_name(cfg.scheme) << " rate " << flags.rate << ": "
            << (traj.stable ? "stable" : "UNSTABLE") << ", max energy "
            << fsi::detail::format_sig6(traj.max_energy) << ", "
            << fsi::detail::format_sig6(traj.wall_seconds) << " s\n";
  if (!traj.stable) {
    std::cout << traj.instability_note << '\n';
    if (cfg.strict) return kExitUnstable;
  }
  return 0;
}

int cmd_study(const CommonFlags& flags) {
  const fsi::StudyConfig cfg = build_config(flags, true);
  const fsi::ErrorReport report = fsi::run_study(cfg);
  fsi::emit_report(report, out_path(cfg, "report.csv").string());
  print_report(report);
  if (cfg.strict && !all_stable(report)) return kExitUnstable;
  return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& pairs_csv) {
  CommonFlags base = flags;
  base.scheme = "jagged";
  int status = 0;
  for (const auto& [nf, ns] : parse_pairs(pairs_csv)) {
    CommonFlags f = base;
    f.nf = nf;
    f.ns = ns;
    const fsi::StudyConfig cfg = build_config(f, true);
    const std::string tag = std::to_string(nf) + "_" + std::to_string(ns);
    const fsi::ErrorReport report = fsi::run_study(cfg);
    fsi::emit_report(report, out_path(cfg, "report_" + tag + ".csv").string());
    fsi::emit_schedule_trace(nf, ns, fsi::coarse_tau_for_rate(cfg.rates.front()),
                             out_path(cfg, "schedule_" + tag + ".txt").string());
    std::cout << "F " << nf << " S " << ns << ":\n";
    print_report(report);
    if (cfg.strict && !all_stable(report)) status = kExitUnstable;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled channel-flow benchmark driver"};
  app.require_subcommand(1);

  CommonFlags run_flags, study_flags, sweep_flags;
  bool run_checkpoint = false;
  std::string sweep_pairs = "4:16,5:15,6:14,7:13";

  auto* run = app.add_subcommand("run", "single run at one refinement rate");
  run->add_option("--scheme", run_flags.scheme, "ern, jagged or reference");
  add_common(run, run_flags, false);
  run->add_flag("--checkpoint", run_checkpoint, "dump the full trajectory");

  auto* study = app.add_subcommand("study", "error table across refinement rates");
  study->add_option("--scheme", study_flags.scheme, "ern, jagged or reference");
  add_common(study, study_flags, true);

  auto* sweep = app.add_subcommand("sweep", "jagged studies over Nf:Ns pairs");
  sweep->add_option("--pairs", sweep_pairs, "comma-separated Nf:Ns pairs");
  add_common(sweep, sweep_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadConfig;
  }

  try {
    if (run->parsed()) return cmd_run(run_flags, run_checkpoint);
    if (study->parsed()) return cmd_study(study_flags);
    return cmd_sweep(sweep_flags, sweep_pairs);
  } catch (const fsi::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
