#include "doctest.h"

#include <cmath>
#include <numbers>

#include "fsi/mesh.hpp"
#include "fsi/solid.hpp"

using namespace fsi;

namespace {

std::vector<std::pair<int, double>> uniform_submesh(int n, double h) {
  std::vector<std::pair<int, double>> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = {i, i * h};
  return s;
}

}  // namespace

TEST_CASE("lame coefficients") {
  SUBCASE("reference configuration") {
    const auto [l1, l0] = lame_coefficients(0.75e6, 0.1, 0.5, 0.5);
    CHECK(l1 == doctest::Approx(25000.0));
    CHECK(l0 == doctest::Approx(400000.0));
  }
  SUBCASE("unit substitution") {
    const auto [l1, l0] = lame_coefficients(2.0, 1.0, 0.0, 1.0);
    CHECK(l1 == doctest::Approx(1.0));
    CHECK(l0 == doctest::Approx(2.0));
  }
  SUBCASE("linear in E") {
    const auto [a1, a0] = lame_coefficients(1e5, 0.1, 0.3, 0.5);
    const auto [b1, b0] = lame_coefficients(2e5, 0.1, 0.3, 0.5);
    CHECK(b1 == doctest::Approx(2.0 * a1));
    CHECK(b0 == doctest::Approx(2.0 * a0));
  }
  SUBCASE("nu = 1 rejected") {
    CHECK_THROWS_AS(lame_coefficients(1.0, 1.0, 1.0, 1.0), std::invalid_argument);
  }
}

TEST_CASE("string operator") {
  const auto sub = uniform_submesh(11, 0.1);
  SUBCASE("degenerate elastic terms leave the scaled mass") {
    SolidParams p;
    p.lambda1 = 0.0;
    p.lambda0 = 0.0;
    const double tau = 1e-3;
    const auto op = assemble_string_operator(sub, p, tau);
    SparseMatrix mass, stiff;
    string_matrices(sub, mass, stiff);
    SparseMatrix expected = (p.rho * p.eps / tau) * mass;
    Vector dummy = Vector::Zero(11);
    apply_dirichlet(expected, dummy, {{0, 0.0}, {10, 0.0}});
    CHECK((op - expected).norm() < 1e-12 * expected.norm());
  }
  SUBCASE("SPD for positive parameters") {
    const SolidParams p;
    const auto op = assemble_string_operator(sub, p, 5e-4);
    const Eigen::MatrixXd dense = Eigen::MatrixXd(op);
    CHECK((dense - dense.transpose()).norm() < 1e-12 * dense.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
  SUBCASE("1D stiffness annihilates constants before elimination") {
    SparseMatrix mass, stiff;
    string_matrices(sub, mass, stiff);
    CHECK(Vector(stiff * Vector::Ones(11)).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("elastic energy norm") {
  SolidParams p;
  SUBCASE("zero displacement") {
    CHECK(elastic_energy_norm(Vector::Zero(5), p, 0.1) == 0.0);
  }
  SUBCASE("interior hat with mass term only") {
    p.lambda1 = 0.0;
    p.lambda0 = 1.0;
    const double h = 0.1;
    Vector d = Vector::Zero(5);
    d[2] = 1.0;
    CHECK(elastic_energy_norm(d, p, h) == doctest::Approx(std::sqrt(2.0 * h / 3.0)));
  }
  SUBCASE("absolutely homogeneous") {
    Vector d = Vector::Random(9);
    CHECK(elastic_energy_norm(Vector(2.0 * d), p, 0.05) ==
          doctest::Approx(2.0 * elastic_energy_norm(d, p, 0.05)));
  }
}

TEST_CASE("fluid residual load") {
  const auto mesh = build_mesh(0);
  const FluidParams fp;
  const auto ops = assemble_fluid_operators(mesh, fp);
  const int n_if = static_cast<int>(mesh.interface_nodes.size());

  SUBCASE("fluid at rest gives zero load") {
    const auto zero = zero_fluid_state(mesh.n_nodes());
    CHECK(fluid_residual_load(ops, fp, zero, zero, 5e-4).norm() == 0.0);
  }

  SUBCASE("uniform pressure produces the analytic interface force") {
    const double c = 3.5;
    FluidState prev = zero_fluid_state(mesh.n_nodes());
    FluidState now = prev;
    now.p.setConstant(c);
    const Vector load = fluid_residual_load(ops, fp, prev, now, 5e-4);
    // -b(c, L w) = c int_Sigma w ds: h for interior hats, h/2 at the ends
    for (int k = 1; k + 1 < n_if; ++k) {
      CHECK(load[k] == doctest::Approx(c * mesh.h).epsilon(1e-9));
    }
    CHECK(load[0] == doctest::Approx(c * mesh.h / 2.0).epsilon(1e-9));
    CHECK(load[n_if - 1] == doctest::Approx(c * mesh.h / 2.0).epsilon(1e-9));
  }

  SUBCASE("linearity in the fluid state") {
    FluidState prev = zero_fluid_state(mesh.n_nodes());
    FluidState now = prev;
    now.u.setRandom();
    now.p.setRandom();
    FluidState doubled = now;
    doubled.u *= 2.0;
    doubled.p *= 2.0;
    const Vector l1 = fluid_residual_load(ops, fp, prev, now, 5e-4);
    const Vector l2 = fluid_residual_load(ops, fp, prev, doubled, 5e-4);
    CHECK((l2 - 2.0 * l1).lpNorm<Eigen::Infinity>() < 1e-9 * l1.lpNorm<Eigen::Infinity>());
  }

  SUBCASE("mismatched meshes rejected") {
    const auto fine = build_mesh(1);
    const auto fine_ops = assemble_fluid_operators(fine, fp);
    const auto s0 = zero_fluid_state(mesh.n_nodes());
    CHECK_THROWS_AS(fluid_residual_load(fine_ops, fp, s0, s0, 5e-4),
                    std::invalid_argument);
  }
}

TEST_CASE("solid stepper") {
  const auto mesh = build_mesh(0);
  const auto sub = interface_submesh(mesh);
  const SolidParams params;
  const int n = static_cast<int>(sub.size());

  SUBCASE("zero state and zero load stay zero") {
    SolidStepper stepper(sub, params, 5e-4);
    const auto s = stepper.advance(zero_solid_state(n), Vector::Zero(n), 5e-4, 1);
    CHECK(s.d.norm() == 0.0);
    CHECK(s.dd.norm() == 0.0);
  }

  SUBCASE("free vibration energy is non-increasing") {
    const double tau = 5e-4;
    SolidStepper stepper(sub, params, tau);
    SolidState s = zero_solid_state(n);
    for (int i = 0; i < n; ++i) {
      s.d[i] = 0.01 * std::sin(std::numbers::pi * sub[static_cast<std::size_t>(i)].second /
                               kChannelLength);
    }
    double prev_energy = params.rho * params.eps * s.dd.dot(stepper.mass() * s.dd) +
                         s.d.dot(stepper.elastic() * s.d);
    for (int step = 1; step <= 100; ++step) {
      s = stepper.advance(s, Vector::Zero(n), step * tau, step);
      const double e = params.rho * params.eps * s.dd.dot(stepper.mass() * s.dd) +
                       s.d.dot(stepper.elastic() * s.d);
      CHECK(e <= prev_energy * (1.0 + 1e-12));
      prev_energy = e;
    }
    CHECK(prev_energy > 0.0);
  }

  SUBCASE("constant load converges to the static solution") {
    const double tau = 2e-3;
    SolidStepper stepper(sub, params, tau);
    Vector load(n);
    for (int i = 0; i < n; ++i) load[i] = mesh.h;  // roughly uniform pressure
    load[0] = 0.0;
    load[n - 1] = 0.0;

    SparseMatrix elastic = stepper.elastic();
    Vector static_rhs = load;
    apply_dirichlet(elastic, static_rhs, {{0, 0.0}, {n - 1, 0.0}});
    const Vector d_static = solve_linear(elastic, static_rhs);

    SolidState s = zero_solid_state(n);
    for (int step = 1; step <= 4000; ++step) {
      s = stepper.advance(s, load, step * tau, step);
    }
    CHECK((s.d - d_static).lpNorm<Eigen::Infinity>() <
          1e-3 * d_static.lpNorm<Eigen::Infinity>());
  }

  SUBCASE("superposition holds to solver tolerance") {
    const double tau = 5e-4;
    SolidStepper stepper(sub, params, tau);
    SolidState a = zero_solid_state(n);
    a.d.setRandom();
    a.d[0] = a.d[n - 1] = 0.0;
    SolidState b = zero_solid_state(n);
    b.dd.setRandom();
    b.dd[0] = b.dd[n - 1] = 0.0;
    Vector load = Vector::Random(n);
    load[0] = load[n - 1] = 0.0;

    const auto sa = stepper.advance(a, load, tau, 1);
    const auto sb = stepper.advance(b, Vector::Zero(n), tau, 1);
    SolidState ab = a;
    ab.d += b.d;
    ab.dd += b.dd;
    const auto sab = stepper.advance(ab, load, tau, 1);
    CHECK((sab.d - sa.d - sb.d).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((sab.dd - sa.dd - sb.dd).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("manufactured solid solution converges at first order in tau") {
  // semi-discrete exact solution d(t) = t^3 s(x) with forcing built from the
  // discrete operators, so the remaining error is pure time discretization
  // (the velocity must be nonlinear in t or backward Euler is exact)
  const auto mesh = build_mesh(0);
  const auto sub = interface_submesh(mesh);
  const SolidParams params;
  const int n = static_cast<int>(sub.size());
  Vector shape(n);
  for (int i = 0; i < n; ++i) {
    shape[i] = std::sin(std::numbers::pi * sub[static_cast<std::size_t>(i)].second /
                        kChannelLength);
  }
  const double t_final = 0.015;

  SparseMatrix mass, stiff;
  string_matrices(sub, mass, stiff);
  const SparseMatrix elastic = params.lambda1 * stiff + params.lambda0 * mass;

  std::vector<double> errors;
  for (int level = 0; level < 3; ++level) {
    const double tau = 1.5e-3 / std::pow(2.0, level);
    const int n_steps = static_cast<int>(std::lround(t_final / tau));
    SolidStepper stepper(sub, params, tau);
    SolidState s = zero_solid_state(n);
    for (int step = 1; step <= n_steps; ++step) {
      const double t = step * tau;
      // rho^s eps (dd' , w) + a^e(d, w) = (f, w) with dd' = 6 t s(x)
      const Vector load = params.rho * params.eps * 6.0 * t * (mass * shape) +
                          t * t * t * (elastic * shape);
      s = stepper.advance(s, load, t, step);
    }
    const Vector exact = t_final * t_final * t_final * shape;
    errors.push_back(elastic_energy_norm(Vector(s.d - exact), params, sub) /
                     elastic_energy_norm(exact, params, sub));
  }
  CHECK(std::log2(errors[0] / errors[1]) == doctest::Approx(1.0).epsilon(0.2));
  CHECK(std::log2(errors[1] / errors[2]) == doctest::Approx(1.0).epsilon(0.2));
}
