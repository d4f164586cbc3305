#pragma once

// The coupling schemes: discrete lifting, the explicit Robin-Neumann loop,
// the jagged-time-step scheduler, and the monolithic implicit reference.

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsi/extrapolation.hpp"
#include "fsi/fluid.hpp"
#include "fsi/mesh.hpp"
#include "fsi/solid.hpp"

namespace fsi {

// Nodal zero-extension of an interface transverse field into the bulk
// velocity space: value preserved on Sigma, zero elsewhere.
struct LiftingOperator {
  const StructuredMesh* mesh = nullptr;

  Vector apply(const Vector& w) const {
    if (mesh == nullptr) throw std::invalid_argument("LiftingOperator: no mesh");
    if (w.size() != static_cast<Eigen::Index>(mesh->interface_nodes.size())) {
      throw std::invalid_argument("LiftingOperator: size mismatch");
    }
    Vector out = Vector::Zero(2 * mesh->n_nodes());
    for (std::size_t k = 0; k < mesh->interface_nodes.size(); ++k) {
      out[uy_dof(mesh->interface_nodes[k])] = w[static_cast<Eigen::Index>(k)];
    }
    return out;
  }
};

inline Vector lifting_apply(const StructuredMesh& mesh, const Vector& w) {
  return LiftingOperator{&mesh}.apply(w);
}

struct JaggedConfig {
  int n_f = 10;
  int n_s = 10;
  double tau_coarse = kBaseCoarseTau;
  int extr = 1;

  // Efficiency regime from the multirate setting; flagged, not enforced.
  bool efficient() const { return n_f < 10 && n_f + n_s <= 20; }
};

inline double coarse_tau_for_rate(int rate) {
  return kBaseCoarseTau / std::pow(2.0, rate);
}

struct ScheduleEvent {
  enum class Kind { FluidStep, SolidStep };
  Kind kind = Kind::FluidStep;
  int ordinal = 0;           // 1-based within the coarse interval
  double time_fraction = 0;  // event time as a fraction of tau_coarse, in (0, 1]
};

// Event order for one coarse interval: ahead of each structure step m, fire
// every fluid step n with (m-1) tau_s < n tau_f <= m tau_s. The comparison
// is done in integers (n * N_s vs m * N_f) so ties are exact.
inline std::vector<ScheduleEvent> jagged_schedule(int n_f, int n_s) {
  if (n_f < 1 || n_s < 1) throw std::invalid_argument("jagged_schedule: N_f, N_s >= 1");
  std::vector<ScheduleEvent> events;
  events.reserve(static_cast<std::size_t>(n_f + n_s));
  int n = 1;
  for (int m = 1; m <= n_s; ++m) {
    while (n <= n_f && n * n_s <= m * n_f) {
      events.push_back({ScheduleEvent::Kind::FluidStep, n,
                        static_cast<double>(n) / n_f});
      ++n;
    }
    events.push_back({ScheduleEvent::Kind::SolidStep, m,
                      static_cast<double>(m) / n_s});
  }
  return events;
}

inline std::string format_schedule(const std::vector<ScheduleEvent>& events) {
  std::ostringstream os;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i) os << ' ';
    os << (events[i].kind == ScheduleEvent::Kind::FluidStep ? 'F' : 'S')
       << events[i].ordinal;
  }
  return os.str();
}

struct Physics {
  FluidParams fluid;
  SolidParams solid;
  InletLoad inlet;
  bool robin_rate_on_solid_grid = true;  // spacing in d_tau of the extrapolated dd
  double blowup_threshold = 1e10;
};

struct RunOptions {
  int store_stride = 0;  // 0 disables trajectory storage
};

struct Trajectory {
  bool stable = true;
  std::string instability_note;
  FluidState fluid_final;
  SolidState solid_final;
  std::vector<double> interface_x;
  std::vector<double> energy;  // total discrete energy per structure step
  double max_energy = 0.0;
  double wall_seconds = 0.0;
  std::vector<FluidState> fluid_steps;  // only with store_stride > 0
  std::vector<SolidState> solid_steps;
};

namespace detail {

inline bool blown_up(const Vector& v, double threshold) {
  return !v.allFinite() || v.cwiseAbs().maxCoeff() > threshold;
}

// Shared per-run state around one fluid stepper and one solid stepper.
struct CoupledRun {
  const Physics* physics = nullptr;
  FluidStepper* fluid = nullptr;
  SolidStepper* solid = nullptr;
  double tau_f = 0.0;
  HistoryBuffer solid_hist;
  FluidState fluid_prev, fluid_now;
  SolidState solid_now;
  Trajectory traj;
  RunOptions opts;

  void init(int n_nodes, int n_interface, const StructuredMesh& mesh) {
    fluid_prev = zero_fluid_state(n_nodes);
    fluid_now = fluid_prev;
    solid_now = zero_solid_state(n_interface);
    solid_hist.push(0.0, solid_now.dd);
    traj.interface_x.reserve(mesh.interface_nodes.size());
    for (int node : mesh.interface_nodes) {
      traj.interface_x.push_back(mesh.nodes[static_cast<std::size_t>(node)][0]);
    }
  }

  bool fluid_step(double t, int index) {
    FluidState state = fluid->advance(solid_hist, t, index);
    fluid_prev = std::move(fluid_now);
    fluid_now = std::move(state);
    if (opts.store_stride > 0 && index % opts.store_stride == 0) {
      traj.fluid_steps.push_back(fluid_now);
    }
    if (detail::blown_up(fluid_now.u, physics->blowup_threshold)) {
      traj.stable = false;
      traj.instability_note = "fluid state exceeded blow-up threshold at t=" +
                              std::to_string(t);
      return false;
    }
    return true;
  }

  bool solid_step(double t, int index) {
    const Vector load = fluid_residual_load(fluid->ops(), physics->fluid,
                                            fluid_prev, fluid_now, tau_f);
    solid_now = solid->advance(solid_now, load, t, index);
    solid_hist.push(t, solid_now.dd);
    if (opts.store_stride > 0 && index % opts.store_stride == 0) {
      traj.solid_steps.push_back(solid_now);
    }
    const double e = physics->fluid.rho *
                         fluid_now.u.dot(fluid->ops().velocity_mass * fluid_now.u) +
                     physics->solid.rho * physics->solid.eps *
                         solid_now.dd.dot(solid->mass() * solid_now.dd) +
                     solid_now.d.dot(solid->elastic() * solid_now.d);
    traj.energy.push_back(e);
    if (e > traj.max_energy) traj.max_energy = e;
    if (detail::blown_up(solid_now.dd, physics->blowup_threshold)) {
      traj.stable = false;
      traj.instability_note = "solid state exceeded blow-up threshold at t=" +
                              std::to_string(t);
      return false;
    }
    return true;
  }

  Trajectory finish(std::chrono::steady_clock::time_point start) {
    traj.fluid_final = fluid_now;
    traj.solid_final = solid_now;
    traj.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return std::move(traj);
  }
};

inline int checked_step_count(double t_final, double tau, const char* what) {
  const double steps = t_final / tau;
  const auto n = static_cast<int>(std::lround(steps));
  if (n < 1 || std::abs(steps - n) > 1e-9 * steps) {
    throw std::invalid_argument(std::string(what) +
                                ": t_final must be divisible by the step length");
  }
  return n;
}

}  // namespace detail

// Jagged-time-step scheme: within each coarse interval the fluid takes N_f
// steps and the structure N_s steps, interleaved by time order, each side
// consuming the other's latest state.
inline Trajectory run_jagged(const JaggedConfig& config, int rate,
                             double t_final, const Physics& physics,
                             RunOptions opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const double tau_c = config.tau_coarse;
  const int n_coarse = detail::checked_step_count(t_final, tau_c, "run_jagged");
  const double tau_f = tau_c / config.n_f;
  const double tau_s = tau_c / config.n_s;

  const StructuredMesh mesh = build_mesh(rate);
  FluidStepper::Options fopts;
  fopts.extr = config.extr;
  fopts.robin_rate_tau = physics.robin_rate_on_solid_grid ? tau_s : tau_f;
  const double robin_coeff = physics.solid.rho * physics.solid.eps / tau_f;
  FluidStepper fluid(mesh, physics.fluid, physics.inlet, tau_f, robin_coeff, fopts);
  SolidStepper solid(interface_submesh(mesh), physics.solid, tau_s);

  detail::CoupledRun run;
  run.physics = &physics;
  run.fluid = &fluid;
  run.solid = &solid;
  run.tau_f = tau_f;
  run.opts = opts;
  run.init(mesh.n_nodes(), static_cast<int>(mesh.interface_nodes.size()), mesh);

  const auto schedule = jagged_schedule(config.n_f, config.n_s);
  for (int i = 1; i <= n_coarse && run.traj.stable; ++i) {
    for (const auto& ev : schedule) {
      if (ev.kind == ScheduleEvent::Kind::FluidStep) {
        const int n = (i - 1) * config.n_f + ev.ordinal;
        if (!run.fluid_step(n * tau_f, n)) break;
      } else {
        const int m = (i - 1) * config.n_s + ev.ordinal;
        if (!run.solid_step(m * tau_s, m)) break;
      }
    }
  }
  return run.finish(start);
}

// Original explicit Robin-Neumann loop on the fine grid: alternate one fluid
// and one structure step of length tau_3 = tau_coarse / 10.
inline Trajectory run_ern(int rate, int extr, double t_final,
                          const Physics& physics, RunOptions opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const double tau = coarse_tau_for_rate(rate) / 10.0;
  const int n_steps = detail::checked_step_count(t_final, tau, "run_ern");

  const StructuredMesh mesh = build_mesh(rate);
  FluidStepper::Options fopts;
  fopts.extr = extr;
  fopts.robin_rate_tau = tau;
  const double robin_coeff = physics.solid.rho * physics.solid.eps / tau;
  FluidStepper fluid(mesh, physics.fluid, physics.inlet, tau, robin_coeff, fopts);
  SolidStepper solid(interface_submesh(mesh), physics.solid, tau);

  detail::CoupledRun run;
  run.physics = &physics;
  run.fluid = &fluid;
  run.solid = &solid;
  run.tau_f = tau;
  run.opts = opts;
  run.init(mesh.n_nodes(), static_cast<int>(mesh.interface_nodes.size()), mesh);

  for (int n = 1; n <= n_steps && run.traj.stable; ++n) {
    if (!run.fluid_step(n * tau, n)) break;
    if (!run.solid_step(n * tau, n)) break;
  }
  return run.finish(start);
}

// Fully implicit scheme: one coupled backward-Euler system per step with the
// kinematic constraint built in by merging interface transverse velocity
// DOFs with the structure velocity.
inline Trajectory run_monolithic_reference(double tau, int rate_space,
                                           double t_final, const Physics& physics,
                                           RunOptions opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  if (tau <= 0.0) throw std::invalid_argument("run_monolithic_reference: tau > 0");
  const int n_steps =
      detail::checked_step_count(t_final, tau, "run_monolithic_reference");

  const StructuredMesh mesh = build_mesh(rate_space);
  const FluidOperators ops = assemble_fluid_operators(mesh, physics.fluid);
  const auto submesh = interface_submesh(mesh);
  const int n_if = static_cast<int>(submesh.size());
  SparseMatrix mass1d, stiff1d;
  string_matrices(submesh, mass1d, stiff1d);
  const SparseMatrix elastic =
      physics.solid.lambda1 * stiff1d + physics.solid.lambda0 * mass1d;
  const double inertia = physics.solid.rho * physics.solid.eps / tau;

  const int n = mesh.n_nodes();
  const int nu = ops.n_u();
  std::vector<Triplet> trips;
  auto scatter = [&trips](const SparseMatrix& m, double scale, int row_off,
                          int col_off, bool transpose = false) {
    for (int col = 0; col < m.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
        const int r = transpose ? col : static_cast<int>(it.row());
        const int c = transpose ? static_cast<int>(it.row()) : col;
        trips.emplace_back(r + row_off, c + col_off, scale * it.value());
      }
    }
  };
  scatter(ops.velocity_mass, physics.fluid.rho / tau, 0, 0);
  scatter(ops.viscous, 1.0, 0, 0);
  scatter(ops.pressure_grad, 1.0, 0, nu);
  scatter(ops.pressure_grad, -1.0, nu, 0, /*transpose=*/true);
  scatter(ops.stabilization, 1.0, nu, nu);
  // structure contribution on the merged transverse interface rows
  for (int col = 0; col < mass1d.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(mass1d, col); it; ++it) {
      const int r = ops.interface_uy_rows[static_cast<std::size_t>(it.row())];
      const int c = ops.interface_uy_rows[static_cast<std::size_t>(col)];
      trips.emplace_back(r, c, inertia * it.value());
    }
  }
  for (int col = 0; col < elastic.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(elastic, col); it; ++it) {
      const int r = ops.interface_uy_rows[static_cast<std::size_t>(it.row())];
      const int c = ops.interface_uy_rows[static_cast<std::size_t>(col)];
      trips.emplace_back(r, c, tau * it.value());
    }
  }
  SparseMatrix A(3 * n, 3 * n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  std::vector<DirichletBC> bcs = ops.symmetry_bcs;
  for (int node : mesh.interface_nodes) bcs.push_back({ux_dof(node), 0.0});
  bcs.push_back({uy_dof(mesh.interface_nodes.front()), 0.0});
  bcs.push_back({uy_dof(mesh.interface_nodes.back()), 0.0});
  Vector dummy = Vector::Zero(3 * n);
  apply_dirichlet(A, dummy, bcs);
  const DirectSolver solver(A);
  std::vector<int> constrained;
  constrained.reserve(bcs.size());
  for (const auto& bc : bcs) constrained.push_back(bc.dof);

  Trajectory traj;
  traj.interface_x.reserve(submesh.size());
  for (const auto& [node, x] : submesh) traj.interface_x.push_back(x);

  FluidState fl = zero_fluid_state(n);
  SolidState so = zero_solid_state(n_if);
  for (int step = 1; step <= n_steps; ++step) {
    const double t = step * tau;
    Vector rhs = Vector::Zero(3 * n);
    rhs.head(nu) = (physics.fluid.rho / tau) * (ops.velocity_mass * fl.u);
    rhs.head(nu) += inlet_pressure(physics.inlet, t) * ops.inlet_form;
    const Vector srhs = inertia * (mass1d * so.dd) - elastic * so.d;
    for (int k = 0; k < n_if; ++k) {
      rhs[ops.interface_uy_rows[static_cast<std::size_t>(k)]] += srhs[k];
    }
    for (int dof : constrained) rhs[dof] = 0.0;
    const Vector x = solver.solve(rhs);
    fl.u = x.head(nu);
    fl.p = x.tail(n);
    fl.step_index = step;
    fl.t = t;
    for (int k = 0; k < n_if; ++k) {
      so.dd[k] = fl.u[ops.interface_uy_rows[static_cast<std::size_t>(k)]];
    }
    so.d += tau * so.dd;
    so.step_index = step;
    so.t = t;
    if (opts.store_stride > 0 && step % opts.store_stride == 0) {
      traj.fluid_steps.push_back(fl);
      traj.solid_steps.push_back(so);
    }
    const double e = physics.fluid.rho * fl.u.dot(ops.velocity_mass * fl.u) +
                     inertia * tau * so.dd.dot(mass1d * so.dd) +
                     so.d.dot(elastic * so.d);
    traj.energy.push_back(e);
    if (e > traj.max_energy) traj.max_energy = e;
    if (detail::blown_up(fl.u, physics.blowup_threshold)) {
      traj.stable = false;
      traj.instability_note = "reference state exceeded blow-up threshold";
      break;
    }
  }
  traj.fluid_final = std::move(fl);
  traj.solid_final = std::move(so);
  traj.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return traj;
}

}  // namespace fsi
