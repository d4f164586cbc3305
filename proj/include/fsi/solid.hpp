#pragma once

// Generalized-string model on the elastic wall: transverse displacement
// only, fixed endpoints, driven by the fluid's variational residual.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fsi/fem.hpp"
#include "fsi/fluid.hpp"
#include "fsi/mesh.hpp"

namespace fsi {

// lambda1 = E*eps / (2(1+nu)), lambda0 = E*eps / (R^2 (1-nu^2))
inline std::pair<double, double> lame_coefficients(double E, double eps,
                                                   double nu, double R) {
  if (E <= 0.0 || eps <= 0.0 || R <= 0.0 || nu < 0.0 || nu >= 1.0) {
    throw std::invalid_argument("lame_coefficients: invalid parameters");
  }
  const double lambda1 = E * eps / (2.0 * (1.0 + nu));
  const double lambda0 = E * eps / (R * R * (1.0 - nu * nu));
  return {lambda1, lambda0};
}

struct SolidParams {
  double rho = 1.1;    // g/cm^3
  double eps = 0.1;    // wall thickness, cm
  double E = 0.75e6;   // dyn/cm^2
  double nu = 0.5;
  double lambda1 = 25000.0;
  double lambda0 = 400000.0;
  bool viscous_enabled = false;
  double viscous_beta = 0.0;  // Rayleigh-type a^v = beta * a^e

  void update_lame(double R = kChannelHeight) {
    std::tie(lambda1, lambda0) = lame_coefficients(E, eps, nu, R);
  }
};

struct SolidState {
  Vector d;   // transverse displacement on the interface nodes
  Vector dd;  // transverse velocity
  int step_index = 0;
  double t = 0.0;
};

inline SolidState zero_solid_state(int n_interface) {
  return {Vector::Zero(n_interface), Vector::Zero(n_interface), 0, 0.0};
}

// 1D P1 mass and stiffness over the ordered interface submesh.
inline void string_matrices(const std::vector<std::pair<int, double>>& submesh,
                            SparseMatrix& mass, SparseMatrix& stiffness) {
  const int n = static_cast<int>(submesh.size());
  if (n < 2) throw std::invalid_argument("string_matrices: need at least 2 nodes");
  Assembler m(n, n), k(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    const double len = submesh[static_cast<std::size_t>(i) + 1].second -
                       submesh[static_cast<std::size_t>(i)].second;
    if (len <= 0.0) throw std::invalid_argument("string_matrices: x must increase");
    m.add(i, i, len / 3.0);
    m.add(i, i + 1, len / 6.0);
    m.add(i + 1, i, len / 6.0);
    m.add(i + 1, i + 1, len / 3.0);
    k.add(i, i, 1.0 / len);
    k.add(i, i + 1, -1.0 / len);
    k.add(i + 1, i, -1.0 / len);
    k.add(i + 1, i + 1, 1.0 / len);
  }
  mass = m.build();
  stiffness = k.build();
}

// a^e(d, w) = lambda1 (d', w') + lambda0 (d, w)
inline SparseMatrix elastic_form(const std::vector<std::pair<int, double>>& submesh,
                                 const SolidParams& params) {
  SparseMatrix mass, stiffness;
  string_matrices(submesh, mass, stiffness);
  return SparseMatrix(params.lambda1 * stiffness + params.lambda0 * mass);
}

// Operator in the velocity unknown after substituting d^n = d^{n-1} + tau * dd^n:
// (rho^s eps / tau) M + tau A_e (+ beta A_e), endpoints eliminated.
inline SparseMatrix assemble_string_operator(
    const std::vector<std::pair<int, double>>& submesh, const SolidParams& params,
    double tau) {
  if (tau <= 0.0) throw std::invalid_argument("assemble_string_operator: tau must be positive");
  SparseMatrix mass, stiffness;
  string_matrices(submesh, mass, stiffness);
  SparseMatrix elastic = params.lambda1 * stiffness + params.lambda0 * mass;
  SparseMatrix op = (params.rho * params.eps / tau) * mass + tau * elastic;
  if (params.viscous_enabled) op += params.viscous_beta * elastic;
  const int n = static_cast<int>(submesh.size());
  Vector dummy = Vector::Zero(n);
  apply_dirichlet(op, dummy, {{0, 0.0}, {n - 1, 0.0}});
  return op;
}

// sqrt(lambda1 ||d'||^2 + lambda0 ||d||^2), P1-exact segment integrals.
inline double elastic_energy_norm(const Vector& d, const SolidParams& params,
                                  const std::vector<std::pair<int, double>>& submesh) {
  if (d.size() != static_cast<Eigen::Index>(submesh.size())) {
    throw std::invalid_argument("elastic_energy_norm: size mismatch");
  }
  double acc = 0.0;
  for (int i = 0; i + 1 < d.size(); ++i) {
    const double len = submesh[static_cast<std::size_t>(i) + 1].second -
                       submesh[static_cast<std::size_t>(i)].second;
    const double a = d[i], b = d[i + 1];
    acc += params.lambda1 * (b - a) * (b - a) / len;
    acc += params.lambda0 * len * (a * a + a * b + b * b) / 3.0;
  }
  return std::sqrt(acc);
}

// Uniform-spacing convenience overload.
inline double elastic_energy_norm(const Vector& d, const SolidParams& params,
                                  double h) {
  std::vector<std::pair<int, double>> submesh(static_cast<std::size_t>(d.size()));
  for (std::size_t i = 0; i < submesh.size(); ++i) {
    submesh[i] = {static_cast<int>(i), static_cast<double>(i) * h};
  }
  return elastic_energy_norm(d, params, submesh);
}

// Negated fluid variational residual through the transverse lifting:
// load_k = -[rho^f M (u^n - u^{n-1}) / tau + a u^n + b p^n]_{(k, y)}.
inline Vector fluid_residual_load(const FluidOperators& ops,
                                  const FluidParams& params,
                                  const FluidState& prev, const FluidState& now,
                                  double tau_f) {
  if (prev.u.size() != now.u.size() || now.u.size() != ops.n_u()) {
    throw std::invalid_argument("fluid_residual_load: mismatched meshes");
  }
  if (tau_f <= 0.0) throw std::invalid_argument("fluid_residual_load: tau must be positive");
  const Vector residual =
      (params.rho / tau_f) * (ops.velocity_mass * (now.u - prev.u)) +
      ops.viscous * now.u + ops.pressure_grad * now.p;
  Vector load(static_cast<Eigen::Index>(ops.interface_uy_rows.size()));
  for (std::size_t k = 0; k < ops.interface_uy_rows.size(); ++k) {
    load[static_cast<Eigen::Index>(k)] = -residual[ops.interface_uy_rows[k]];
  }
  return load;
}

// One structure solver instance; operator factorized once per (grid, tau).
class SolidStepper {
 public:
  SolidStepper(std::vector<std::pair<int, double>> submesh,
               const SolidParams& params, double tau)
      : submesh_(std::move(submesh)),
        params_(params),
        tau_(tau),
        solver_(assemble_string_operator(submesh_, params, tau)) {
    string_matrices(submesh_, mass_, stiffness_);
    elastic_ = params.lambda1 * stiffness_ + params.lambda0 * mass_;
  }

  // rhs = (rho^s eps / tau) M dd^{n-1} - A_e d^{n-1} + load, endpoints fixed;
  // then d^n = d^{n-1} + tau dd^n.
  SolidState advance(const SolidState& prev, const Vector& load, double t_new,
                     int step_index) const {
    const int n = static_cast<int>(submesh_.size());
    if (load.size() != n || prev.d.size() != n) {
      throw std::invalid_argument("SolidStepper::advance: size mismatch");
    }
    Vector rhs = (params_.rho * params_.eps / tau_) * (mass_ * prev.dd) -
                 elastic_ * prev.d + load;
    rhs[0] = 0.0;
    rhs[n - 1] = 0.0;
    SolidState state;
    state.dd = solver_.solve(rhs);
    state.d = prev.d + tau_ * state.dd;
    state.d[0] = 0.0;
    state.d[n - 1] = 0.0;
    state.step_index = step_index;
    state.t = t_new;
    return state;
  }

  const std::vector<std::pair<int, double>>& submesh() const { return submesh_; }
  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& elastic() const { return elastic_; }
  double tau() const { return tau_; }

 private:
  std::vector<std::pair<int, double>> submesh_;
  SolidParams params_;
  double tau_;
  SparseMatrix mass_, stiffness_, elastic_;
  DirectSolver solver_;
};

}  // namespace fsi
