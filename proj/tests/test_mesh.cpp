#include "doctest.h"

#include <map>
#include <set>
#include <sstream>

#include "fsi/mesh.hpp"

using namespace fsi;

TEST_CASE("rate-0 mesh counts") {
  const auto mesh = build_mesh(0);
  CHECK(mesh.h == doctest::Approx(0.1));
  CHECK(mesh.n_nodes() == 366);
  CHECK(mesh.n_triangles() == 600);
  CHECK(mesh.interface_nodes.size() == 61);
}

TEST_CASE("rate-1 halves the mesh size") {
  const auto mesh = build_mesh(1);
  CHECK(mesh.h == doctest::Approx(0.05));
  CHECK(mesh.n_nodes() == 121 * 11);
}

TEST_CASE("triangle areas are positive and sum to the domain area") {
  const auto mesh = build_mesh(0);
  double total = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double a = mesh.triangle_area(t);
    CHECK(a > 0.0);
    total += a;
  }
  CHECK(total == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("boundary edges partition the boundary with one tag each") {
  const auto mesh = build_mesh(0);
  // 2*(nx + ny) boundary edges in total
  CHECK(mesh.boundary_edges.size() == 2u * (60 + 5));
  std::map<std::pair<int, int>, int> seen;
  for (const auto& e : mesh.boundary_edges) {
    seen[{std::min(e.a, e.b), std::max(e.a, e.b)}]++;
    const auto& pa = mesh.nodes[static_cast<std::size_t>(e.a)];
    const auto& pb = mesh.nodes[static_cast<std::size_t>(e.b)];
    switch (e.tag) {
      case BoundaryTag::Gamma1: CHECK(pa[1] == 0.0); CHECK(pb[1] == 0.0); break;
      case BoundaryTag::Gamma2: CHECK(pa[0] == 0.0); CHECK(pb[0] == 0.0); break;
      case BoundaryTag::Sigma:
        CHECK(pa[1] == doctest::Approx(0.5));
        CHECK(pb[1] == doctest::Approx(0.5));
        break;
      case BoundaryTag::Gamma4:
        CHECK(pa[0] == doctest::Approx(6.0));
        CHECK(pb[0] == doctest::Approx(6.0));
        break;
    }
  }
  for (const auto& [edge, count] : seen) CHECK(count == 1);
}

TEST_CASE("interface submesh is ordered and spans [0, L]") {
  const auto mesh = build_mesh(0);
  const auto sub = interface_submesh(mesh);
  REQUIRE(sub.size() == 61);
  CHECK(sub.front().second == doctest::Approx(0.0));
  CHECK(sub.back().second == doctest::Approx(6.0));
  for (std::size_t i = 0; i + 1 < sub.size(); ++i) {
    CHECK(sub[i + 1].second - sub[i].second == doctest::Approx(0.1));
    CHECK(mesh.nodes[static_cast<std::size_t>(sub[i].first)][1] ==
          doctest::Approx(0.5));
  }
}

TEST_CASE("refinement quadruples triangles and nests node positions") {
  const auto coarse = build_mesh(0);
  const auto fine = build_mesh(1);
  CHECK(fine.n_triangles() == 4 * coarse.n_triangles());
  std::set<std::pair<long, long>> fine_keys;
  for (const auto& p : fine.nodes) {
    fine_keys.insert({std::lround(p[0] * 1e6), std::lround(p[1] * 1e6)});
  }
  for (const auto& p : coarse.nodes) {
    CHECK(fine_keys.count({std::lround(p[0] * 1e6), std::lround(p[1] * 1e6)}) == 1);
  }
}

TEST_CASE("rebuilding the same rate is deterministic") {
  const auto a = build_mesh(1);
  const auto b = build_mesh(1);
  CHECK(a.nodes == b.nodes);
  CHECK(a.triangles == b.triangles);
  CHECK(a.interface_nodes == b.interface_nodes);
}

TEST_CASE("node cap rejects oversized meshes") {
  CHECK_THROWS_AS(build_mesh(6, 1000), std::invalid_argument);
  CHECK_THROWS_AS(build_mesh(-1), std::invalid_argument);
}

TEST_CASE("mesh dump lists nodes then triangles") {
  const auto mesh = build_mesh(0);
  std::ostringstream os;
  dump_mesh(mesh, os);
  std::istringstream is(os.str());
  int n_nodes = 0, n_tris = 0;
  is >> n_nodes >> n_tris;
  CHECK(n_nodes == 366);
  CHECK(n_tris == 600);
  double x, y;
  is >> x >> y;
  CHECK(x == 0.0);
  CHECK(y == 0.0);
}
