#pragma once

// Structured triangulation of the rectangular channel [0,L] x [0,R] with
// tagged boundary segments and the moving-wall interface exposed as an
// ordered 1D submesh.

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fsi {

// Channel geometry and baseline discretization (CGS units).
inline constexpr double kChannelLength = 6.0;
inline constexpr double kChannelHeight = 0.5;
inline constexpr double kBaseMeshSize = 0.1;
inline constexpr double kBaseFineTau = 5e-4;
inline constexpr double kBaseCoarseTau = 5e-3;

enum class BoundaryTag {
  Gamma1,  // bottom wall y = 0 (symmetry)
  Gamma2,  // inlet x = 0
  Sigma,   // elastic wall y = R
  Gamma4,  // outlet x = L
};

struct BoundaryEdge {
  int a = -1;
  int b = -1;
  BoundaryTag tag = BoundaryTag::Gamma1;
};

struct StructuredMesh {
  double h = 0.0;
  int nx = 0;  // cells along x
  int ny = 0;  // cells along y
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<int> interface_nodes;  // nodes on Sigma, ascending x

  int node_index(int ix, int iy) const { return iy * (nx + 1) + ix; }
  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }

  double triangle_area(int t) const {
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    const auto& p0 = nodes[static_cast<std::size_t>(tri[0])];
    const auto& p1 = nodes[static_cast<std::size_t>(tri[1])];
    const auto& p2 = nodes[static_cast<std::size_t>(tri[2])];
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                  (p2[0] - p0[0]) * (p1[1] - p0[1]));
  }
};

// Square cells of side h = 0.1 / 2^rate, each split along the
// lower-left-to-upper-right diagonal. Node numbering is row-major from
// (0,0), so interface nodes (top row) are naturally ordered by x.
inline StructuredMesh build_mesh(int rate,
                                 std::size_t node_cap = 20'000'000) {
  if (rate < 0) throw std::invalid_argument("build_mesh: rate must be >= 0");
  const double scale = std::pow(2.0, rate);
  StructuredMesh mesh;
  mesh.h = kBaseMeshSize / scale;
  mesh.nx = static_cast<int>(std::lround(kChannelLength / mesh.h));
  mesh.ny = static_cast<int>(std::lround(kChannelHeight / mesh.h));

  const std::size_t n_nodes =
      static_cast<std::size_t>(mesh.nx + 1) * static_cast<std::size_t>(mesh.ny + 1);
  if (n_nodes > node_cap) {
    throw std::invalid_argument("build_mesh: rate " + std::to_string(rate) +
                                " exceeds node cap");
  }

  mesh.nodes.reserve(n_nodes);
  for (int iy = 0; iy <= mesh.ny; ++iy) {
    for (int ix = 0; ix <= mesh.nx; ++ix) {
      mesh.nodes.push_back({ix * mesh.h, iy * mesh.h});
    }
  }

  mesh.triangles.reserve(2u * static_cast<std::size_t>(mesh.nx) *
                         static_cast<std::size_t>(mesh.ny));
  for (int iy = 0; iy < mesh.ny; ++iy) {
    for (int ix = 0; ix < mesh.nx; ++ix) {
      const int a = mesh.node_index(ix, iy);
      const int b = mesh.node_index(ix + 1, iy);
      const int c = mesh.node_index(ix + 1, iy + 1);
      const int d = mesh.node_index(ix, iy + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }

  for (int ix = 0; ix < mesh.nx; ++ix) {
    mesh.boundary_edges.push_back(
        {mesh.node_index(ix, 0), mesh.node_index(ix + 1, 0), BoundaryTag::Gamma1});
    mesh.boundary_edges.push_back({mesh.node_index(ix, mesh.ny),
                                   mesh.node_index(ix + 1, mesh.ny),
                                   BoundaryTag::Sigma});
  }
  for (int iy = 0; iy < mesh.ny; ++iy) {
    mesh.boundary_edges.push_back(
        {mesh.node_index(0, iy), mesh.node_index(0, iy + 1), BoundaryTag::Gamma2});
    mesh.boundary_edges.push_back({mesh.node_index(mesh.nx, iy),
                                   mesh.node_index(mesh.nx, iy + 1),
                                   BoundaryTag::Gamma4});
  }

  mesh.interface_nodes.reserve(static_cast<std::size_t>(mesh.nx) + 1);
  for (int ix = 0; ix <= mesh.nx; ++ix) {
    mesh.interface_nodes.push_back(mesh.node_index(ix, mesh.ny));
  }
  return mesh;
}

// Ordered (node index, x) pairs along Sigma.
inline std::vector<std::pair<int, double>> interface_submesh(
    const StructuredMesh& mesh) {
  std::vector<std::pair<int, double>> out;
  out.reserve(mesh.interface_nodes.size());
  for (int n : mesh.interface_nodes) {
    out.emplace_back(n, mesh.nodes[static_cast<std::size_t>(n)][0]);
  }
  return out;
}

// Debug dump: one node per line "x y", then one triangle per line "i j k".
inline void dump_mesh(const StructuredMesh& mesh, std::ostream& os) {
  os << mesh.n_nodes() << ' ' << mesh.n_triangles() << '\n';
  for (const auto& p : mesh.nodes) os << p[0] << ' ' << p[1] << '\n';
  for (const auto& t : mesh.triangles)
    os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace fsi
