#pragma once

// Stabilized P1-P1 Stokes solver with the explicit Robin interface
// condition on the elastic wall: interface mass scaled by rho^s*eps/tau on
// the left, latest structure velocity plus extrapolated correction and the
// lifted fluid variational residual on the right.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fsi/extrapolation.hpp"
#include "fsi/fem.hpp"
#include "fsi/mesh.hpp"

namespace fsi {

struct FluidParams {
  double rho = 1.0;          // g/cm^3
  double mu = 0.035;         // poise
  double stab_gamma = 1e-2;  // pressure stabilization coefficient
};

struct InletLoad {
  double p_max = 2e4;    // dyn/cm^2
  double t_star = 5e-3;  // s
};

// Half-sinusoid pressure ramp, zero after t_star.
inline double inlet_pressure(const InletLoad& load, double t) {
  if (t < 0.0) throw std::invalid_argument("inlet_pressure: negative time");
  if (t > load.t_star) return 0.0;
  return load.p_max * (1.0 - std::cos(2.0 * std::numbers::pi * t / load.t_star)) / 2.0;
}

struct FluidState {
  Vector u;  // [ux0, uy0, ux1, ...]
  Vector p;
  int step_index = 0;
  double t = 0.0;
};

inline FluidState zero_fluid_state(int n_nodes) {
  return {Vector::Zero(2 * n_nodes), Vector::Zero(n_nodes), 0, 0.0};
}

inline Vector pack_state(const FluidState& s) {
  Vector x(s.u.size() + s.p.size());
  x << s.u, s.p;
  return x;
}

// DOF layout: velocity components first, then pressures.
inline int ux_dof(int node) { return 2 * node; }
inline int uy_dof(int node) { return 2 * node + 1; }

// Brezzi-Pitkaranta form gamma * (h^2 / mu) * (grad p, grad q).
inline SparseMatrix stabilization_form(const StructuredMesh& mesh,
                                       const FluidParams& params) {
  const double coeff = params.stab_gamma * mesh.h * mesh.h / params.mu;
  DofMap pressure{mesh.n_nodes(), 1};
  return assemble(mesh, pressure,
                  [&](const StructuredMesh& m, int t, const ElementMatrices& em,
                      Assembler& acc) {
                    const auto& tri = m.triangles[static_cast<std::size_t>(t)];
                    for (int i = 0; i < 3; ++i) {
                      for (int j = 0; j < 3; ++j) {
                        acc.add(tri[static_cast<std::size_t>(i)],
                                tri[static_cast<std::size_t>(j)],
                                coeff * em.stiffness(i, j));
                      }
                    }
                  });
}

// Mesh-level bilinear forms shared by every fluid time step on a grid.
struct FluidOperators {
  int n_nodes = 0;
  double h = 0.0;
  SparseMatrix velocity_mass;    // (u, v)
  SparseMatrix viscous;          // 2 mu (eps(u), eps(v))
  SparseMatrix pressure_grad;    // b(p, v) = -(p, div v), velocity x pressure
  SparseMatrix stabilization;    // s_h(p, q)
  SparseMatrix interface_mass;   // (u, v)_Sigma, both components
  SparseMatrix interface_mass_y; // (w, v_y)_Sigma, velocity x interface scalar
  Vector inlet_form;             // int_{Gamma2} v_x ds
  std::vector<int> interface_uy_rows;
  std::vector<DirichletBC> symmetry_bcs;  // u_y = 0 on Gamma1

  int n_u() const { return 2 * n_nodes; }
  int n_dofs() const { return 3 * n_nodes; }
};

inline FluidOperators assemble_fluid_operators(const StructuredMesh& mesh,
                                               const FluidParams& params) {
  FluidOperators ops;
  ops.n_nodes = mesh.n_nodes();
  ops.h = mesh.h;
  const int n = ops.n_nodes;

  Assembler mass(2 * n, 2 * n);
  Assembler visc(2 * n, 2 * n);
  Assembler grad(2 * n, n);
  Assembler stab(n, n);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const ElementMatrices em = element_matrices(mesh, t);
    const double two_mu_area = 2.0 * params.mu * em.area;
    for (int i = 0; i < 3; ++i) {
      const int ni = tri[static_cast<std::size_t>(i)];
      for (int j = 0; j < 3; ++j) {
        const int nj = tri[static_cast<std::size_t>(j)];
        mass.add(ux_dof(ni), ux_dof(nj), em.mass(i, j));
        mass.add(uy_dof(ni), uy_dof(nj), em.mass(i, j));
        // 2 mu eps(u):eps(v) for P1 component basis functions
        visc.add(ux_dof(ni), ux_dof(nj),
                 two_mu_area * (em.dx(i) * em.dx(j) + 0.5 * em.dy(i) * em.dy(j)));
        visc.add(ux_dof(ni), uy_dof(nj),
                 two_mu_area * 0.5 * em.dy(i) * em.dx(j));
        visc.add(uy_dof(ni), ux_dof(nj),
                 two_mu_area * 0.5 * em.dx(i) * em.dy(j));
        visc.add(uy_dof(ni), uy_dof(nj),
                 two_mu_area * (em.dy(i) * em.dy(j) + 0.5 * em.dx(i) * em.dx(j)));
        // b(p, v) = -(p, div v); int phi_j = area / 3
        grad.add(ux_dof(ni), nj, -(em.area / 3.0) * em.dx(i));
        grad.add(uy_dof(ni), nj, -(em.area / 3.0) * em.dy(i));
        stab.add(ni, nj,
                 params.stab_gamma * mesh.h * mesh.h / params.mu * em.stiffness(i, j));
      }
    }
  }
  ops.velocity_mass = mass.build();
  ops.viscous = visc.build();
  ops.pressure_grad = grad.build();
  ops.stabilization = stab.build();

  const int n_if = static_cast<int>(mesh.interface_nodes.size());
  Assembler imass(2 * n, 2 * n);
  Assembler imass_y(2 * n, n_if);
  for (int k = 0; k + 1 < n_if; ++k) {
    const int a = mesh.interface_nodes[static_cast<std::size_t>(k)];
    const int b = mesh.interface_nodes[static_cast<std::size_t>(k) + 1];
    const double len = mesh.nodes[static_cast<std::size_t>(b)][0] -
                       mesh.nodes[static_cast<std::size_t>(a)][0];
    const double m11 = len / 3.0, m12 = len / 6.0;
    const int na[2] = {a, b};
    const int ka[2] = {k, k + 1};
    const double loc[2][2] = {{m11, m12}, {m12, m11}};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        imass.add(ux_dof(na[i]), ux_dof(na[j]), loc[i][j]);
        imass.add(uy_dof(na[i]), uy_dof(na[j]), loc[i][j]);
        imass_y.add(uy_dof(na[i]), ka[j], loc[i][j]);
      }
    }
  }
  ops.interface_mass = imass.build();
  ops.interface_mass_y = imass_y.build();

  ops.inlet_form = Vector::Zero(2 * n);
  for (const auto& edge : mesh.boundary_edges) {
    if (edge.tag != BoundaryTag::Gamma2) continue;
    const double len = std::abs(mesh.nodes[static_cast<std::size_t>(edge.b)][1] -
                                mesh.nodes[static_cast<std::size_t>(edge.a)][1]);
    // traction (P, 0) on the inlet: l(v) = P(t) * int phi v_x ds
    ops.inlet_form[ux_dof(edge.a)] += len / 2.0;
    ops.inlet_form[ux_dof(edge.b)] += len / 2.0;
  }

  ops.interface_uy_rows.reserve(mesh.interface_nodes.size());
  for (int node : mesh.interface_nodes) ops.interface_uy_rows.push_back(uy_dof(node));

  for (int ix = 0; ix <= mesh.nx; ++ix) {
    ops.symmetry_bcs.push_back({uy_dof(mesh.node_index(ix, 0)), 0.0});
  }
  return ops;
}

// Block system over (u, p) for one fluid step of length tau, symmetry and
// Dirichlet constraints applied. robin_coeff is rho^s * eps / tau.
inline SparseMatrix assemble_fluid_operator(
    const FluidOperators& ops, const FluidParams& params, double tau,
    double robin_coeff, const std::vector<DirichletBC>& extra_bcs = {}) {
  if (tau <= 0.0) throw std::invalid_argument("assemble_fluid_operator: tau must be positive");
  const int n = ops.n_nodes;
  const int nu = ops.n_u();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(
      ops.velocity_mass.nonZeros() + ops.viscous.nonZeros() +
      2 * ops.pressure_grad.nonZeros() + ops.stabilization.nonZeros() +
      ops.interface_mass.nonZeros()));
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
  scatter(ops.velocity_mass, params.rho / tau, 0, 0);
  scatter(ops.viscous, 1.0, 0, 0);
  if (robin_coeff != 0.0) scatter(ops.interface_mass, robin_coeff, 0, 0);
  scatter(ops.pressure_grad, 1.0, 0, nu);
  scatter(ops.pressure_grad, -1.0, nu, 0, /*transpose=*/true);
  scatter(ops.stabilization, 1.0, nu, nu);

  SparseMatrix A(3 * n, 3 * n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  Vector dummy = Vector::Zero(3 * n);
  std::vector<DirichletBC> bcs = ops.symmetry_bcs;
  bcs.insert(bcs.end(), extra_bcs.begin(), extra_bcs.end());
  apply_dirichlet(A, dummy, bcs);
  return A;
}

// Right-hand side of the fluid step at time t_new. fluid_hist holds packed
// (u; p) states on the fluid grid, solid_hist the interface velocity on the
// structure grid. robin_rate_tau is the spacing used in the divided
// difference of the extrapolated structure velocity.
inline Vector fluid_rhs(const FluidOperators& ops, const FluidParams& params,
                        double tau, double robin_coeff,
                        const HistoryBuffer& fluid_hist,
                        const HistoryBuffer& solid_hist, int extr,
                        double robin_rate_tau, const InletLoad& load,
                        double t_new,
                        const Vector* extra_velocity_load = nullptr) {
  const int n = ops.n_nodes;
  const int nu = ops.n_u();
  if (fluid_hist.depth() == 0 || solid_hist.depth() == 0) {
    throw std::invalid_argument("fluid_rhs: histories must be seeded");
  }
  Vector rhs = Vector::Zero(3 * n);

  const Vector& prev = fluid_hist.back();
  rhs.head(nu) = (params.rho / tau) * (ops.velocity_mass * prev.head(nu));
  rhs.head(nu) += inlet_pressure(load, t_new) * ops.inlet_form;

  // Robin data: latest structure velocity plus tau * d_tau of its extrapolation.
  Vector robin_data = solid_hist.back() +
                      tau * extrapolate_rate(solid_hist, extr, robin_rate_tau);
  rhs.head(nu) += robin_coeff * (ops.interface_mass_y * robin_data);

  // Lifted variational residual of the extrapolated fluid state, interface
  // transverse rows only.
  if (extr > 0) {
    const Vector star = extrapolate(fluid_hist, extr);
    const Vector dstar = extrapolate_rate(fluid_hist, extr, tau);
    const Vector residual = params.rho * (ops.velocity_mass * dstar.head(nu)) +
                            ops.viscous * star.head(nu) +
                            ops.pressure_grad * star.tail(n);
    for (int row : ops.interface_uy_rows) rhs[row] += residual[row];
  }

  if (extra_velocity_load != nullptr) rhs.head(nu) += *extra_velocity_load;
  return rhs;
}

struct FluidStepperOptions {
  int extr = 1;
  double robin_rate_tau = 0.0;  // defaults to tau
  std::vector<DirichletBC> extra_dirichlet;
  std::function<Vector(double)> extra_velocity_load;  // weak-form hook
};

// One fluid solver instance: operator factorized once per (mesh, tau).
class FluidStepper {
 public:
  using Options = FluidStepperOptions;

  FluidStepper(const StructuredMesh& mesh, const FluidParams& params,
               const InletLoad& inlet, double tau, double robin_coeff,
               Options options = {})
      : params_(params),
        inlet_(inlet),
        tau_(tau),
        robin_coeff_(robin_coeff),
        options_(std::move(options)),
        ops_(assemble_fluid_operators(mesh, params)),
        solver_(assemble_fluid_operator(ops_, params, tau, robin_coeff,
                                        options_.extra_dirichlet)) {
    if (options_.robin_rate_tau <= 0.0) options_.robin_rate_tau = tau;
    constrained_.reserve(ops_.symmetry_bcs.size() + options_.extra_dirichlet.size());
    for (const auto& bc : ops_.symmetry_bcs) constrained_.push_back(bc.dof);
    for (const auto& bc : options_.extra_dirichlet) constrained_.push_back(bc.dof);
    history_.push(0.0, pack_state(zero_fluid_state(ops_.n_nodes)));
  }

  void reset(const FluidState& initial) {
    history_ = HistoryBuffer();
    history_.push(initial.t, pack_state(initial));
  }

  FluidState advance(const HistoryBuffer& solid_hist, double t_new,
                     int step_index) {
    Vector extra;
    const Vector* extra_ptr = nullptr;
    if (options_.extra_velocity_load) {
      extra = options_.extra_velocity_load(t_new);
      extra_ptr = &extra;
    }
    Vector rhs = fluid_rhs(ops_, params_, tau_, robin_coeff_, history_,
                           solid_hist, options_.extr, options_.robin_rate_tau,
                           inlet_, t_new, extra_ptr);
    for (int dof : constrained_) rhs[dof] = 0.0;
    const Vector x = solver_.solve(rhs);
    FluidState state;
    state.u = x.head(ops_.n_u());
    state.p = x.tail(ops_.n_nodes);
    state.step_index = step_index;
    state.t = t_new;
    history_.push(t_new, x);
    return state;
  }

  const FluidOperators& ops() const { return ops_; }
  double tau() const { return tau_; }

 private:
  FluidParams params_;
  InletLoad inlet_;
  double tau_;
  double robin_coeff_;
  Options options_;
  FluidOperators ops_;
  DirectSolver solver_;
  std::vector<int> constrained_;
  HistoryBuffer history_;
};

}  // namespace fsi
