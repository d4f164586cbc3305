#pragma once

// P1 Lagrange finite-element machinery: analytic element matrices, global
// sparse assembly, symmetric Dirichlet elimination, and a sparse direct
// solver (Eigen SparseLU).

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fsi/mesh.hpp"

namespace fsi {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

// Maps (node, component) to a global DOF index. Velocity components come
// first ([ux0, uy0, ux1, ...]), scalar fields are the identity layout.
struct DofMap {
  int n_nodes = 0;
  int components = 1;
  int operator()(int node, int comp = 0) const {
    return node * components + comp;
  }
  int size() const { return n_nodes * components; }
};

struct ElementMatrices {
  double area = 0.0;
  Eigen::Matrix3d mass;       // exact P1 mass
  Eigen::Matrix3d stiffness;  // grad-grad
  Eigen::Vector3d dx, dy;     // constant basis gradients
};

inline ElementMatrices element_matrices(const std::array<double, 2>& p0,
                                        const std::array<double, 2>& p1,
                                        const std::array<double, 2>& p2) {
  const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) -
                     (p2[0] - p0[0]) * (p1[1] - p0[1]);
  if (det <= 0.0) throw std::invalid_argument("element_matrices: degenerate triangle");
  ElementMatrices em;
  em.area = 0.5 * det;
  em.dx << (p1[1] - p2[1]) / det, (p2[1] - p0[1]) / det, (p0[1] - p1[1]) / det;
  em.dy << (p2[0] - p1[0]) / det, (p0[0] - p2[0]) / det, (p1[0] - p0[0]) / det;
  em.mass << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  em.mass *= em.area / 12.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      em.stiffness(i, j) = em.area * (em.dx(i) * em.dx(j) + em.dy(i) * em.dy(j));
    }
  }
  return em;
}

inline ElementMatrices element_matrices(const StructuredMesh& mesh, int t) {
  const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
  return element_matrices(mesh.nodes[static_cast<std::size_t>(tri[0])],
                          mesh.nodes[static_cast<std::size_t>(tri[1])],
                          mesh.nodes[static_cast<std::size_t>(tri[2])]);
}

// Triplet accumulator. Element traversal order is fixed by the caller, so
// repeated assembly of the same rule is bitwise reproducible.
class Assembler {
 public:
  Assembler(int rows, int cols) : rows_(rows), cols_(cols) {}

  void add(int i, int j, double v) {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_) {
      throw std::out_of_range("Assembler::add: index out of DOF range");
    }
    triplets_.emplace_back(i, j, v);
  }

  template <class Mat, class Idx>
  void scatter(const Idx& row_dofs, const Idx& col_dofs, const Mat& local) {
    for (int i = 0; i < local.rows(); ++i) {
      for (int j = 0; j < local.cols(); ++j) {
        add(row_dofs[static_cast<std::size_t>(i)],
            col_dofs[static_cast<std::size_t>(j)], local(i, j));
      }
    }
  }

  SparseMatrix build() const {
    SparseMatrix m(rows_, cols_);
    m.setFromTriplets(triplets_.begin(), triplets_.end());
    m.makeCompressed();
    return m;
  }

 private:
  int rows_, cols_;
  std::vector<Triplet> triplets_;
};

// Global matrix as the sum of scattered element contributions.
// rule(mesh, element index, element matrices, assembler)
template <class Rule>
SparseMatrix assemble(const StructuredMesh& mesh, const DofMap& dofs,
                      Rule&& rule) {
  Assembler acc(dofs.size(), dofs.size());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    rule(mesh, t, element_matrices(mesh, t), acc);
  }
  return acc.build();
}

struct DirichletBC {
  int dof = -1;
  double value = 0.0;
};

// Symmetric elimination: constrained rows/columns are replaced by the
// identity, and column contributions of prescribed values move to the RHS.
inline void apply_dirichlet(SparseMatrix& A, Vector& b,
                            const std::vector<DirichletBC>& bcs) {
  if (A.rows() != A.cols() || A.rows() != b.size()) {
    throw std::invalid_argument("apply_dirichlet: dimension mismatch");
  }
  std::vector<char> constrained(static_cast<std::size_t>(A.rows()), 0);
  Vector values = Vector::Zero(A.rows());
  for (const auto& bc : bcs) {
    if (bc.dof < 0 || bc.dof >= A.rows()) {
      throw std::out_of_range("apply_dirichlet: DOF index out of range");
    }
    auto& flag = constrained[static_cast<std::size_t>(bc.dof)];
    if (flag && values[bc.dof] != bc.value) {
      throw std::invalid_argument("apply_dirichlet: conflicting values for DOF");
    }
    flag = 1;
    values[bc.dof] = bc.value;
  }

  for (int col = 0; col < A.outerSize(); ++col) {
    if (!constrained[static_cast<std::size_t>(col)]) continue;
    const double g = values[col];
    if (g == 0.0) continue;
    for (SparseMatrix::InnerIterator it(A, col); it; ++it) {
      if (!constrained[static_cast<std::size_t>(it.row())]) {
        b[it.row()] -= it.value() * g;
      }
    }
  }

  std::vector<Triplet> kept;
  kept.reserve(static_cast<std::size_t>(A.nonZeros()));
  for (int col = 0; col < A.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(A, col); it; ++it) {
      const bool ci = constrained[static_cast<std::size_t>(it.row())];
      const bool cj = constrained[static_cast<std::size_t>(col)];
      if (!ci && !cj) kept.emplace_back(static_cast<int>(it.row()), col, it.value());
    }
  }
  for (int k = 0; k < A.rows(); ++k) {
    if (constrained[static_cast<std::size_t>(k)]) {
      kept.emplace_back(k, k, 1.0);
      b[k] = values[k];
    }
  }
  SparseMatrix out(A.rows(), A.cols());
  out.setFromTriplets(kept.begin(), kept.end());
  out.makeCompressed();
  A.swap(out);
}

using SparseLU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

// Reusable factorization; one per (mesh, time step) pair.
class DirectSolver {
 public:
  explicit DirectSolver(const SparseMatrix& A) {
    lu_.analyzePattern(A);
    lu_.factorize(A);
    if (lu_.info() != Eigen::Success) {
      throw std::runtime_error("DirectSolver: singular or rank-deficient matrix");
    }
  }
  Vector solve(const Vector& b) const {
    Vector x = lu_.solve(b);
    if (lu_.info() != Eigen::Success) {
      throw std::runtime_error("DirectSolver: solve failed");
    }
    return x;
  }

 private:
  SparseLU lu_;
};

inline Vector solve_linear(const SparseMatrix& A, const Vector& b) {
  if (A.rows() != A.cols() || A.rows() != b.size()) {
    throw std::invalid_argument("solve_linear: dimension mismatch");
  }
  return DirectSolver(A).solve(b);
}

}  // namespace fsi
