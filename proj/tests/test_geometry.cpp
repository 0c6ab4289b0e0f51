#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "clogsim/geometry.hpp"

using namespace clogsim;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("mesh counts for the coarsest valid resolution") {
  const CellMesh mesh = build_cell_mesh(0.25, 8, 2);
  CHECK(mesh.node_count() == 24);  // 8 rays, 3 layers
  CHECK(mesh.triangles.size() == 32);
  CHECK(mesh.inner_boundary.size() == 8);
  CHECK(mesh.dof_count < mesh.node_count());
}

TEST_CASE("inner boundary nodes sit on the circle") {
  const CellMesh mesh = build_cell_mesh(0.25, 32, 6);
  for (const int idx : mesh.inner_boundary) {
    const Vec2& p = mesh.nodes[idx];
    CHECK(std::abs(std::hypot(p.x - 0.5, p.y - 0.5) - 0.25) < 1e-10);
  }
}

TEST_CASE("large radius still yields a valid mesh") {
  const CellMesh mesh = build_cell_mesh(0.49, 16, 4);
  for (const auto& tri : mesh.triangles)
    CHECK(triangle_area(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]) >
          0.0);
}

TEST_CASE("fluid area approximates 1 - pi r^2 and improves with refinement") {
  const double r = 0.3;
  const double exact = 1.0 - kPi * r * r;
  const double coarse = std::abs(mesh_fluid_area(build_cell_mesh(r, 32, 8)) - exact);
  const double fine = std::abs(mesh_fluid_area(build_cell_mesh(r, 64, 16)) - exact);
  CHECK(std::abs(mesh_fluid_area(build_cell_mesh(r, 64, 16)) - exact) / exact < 0.02);
  CHECK(fine < coarse);
}

TEST_CASE("periodic pairing is a bipartite matching with lattice shifts") {
  const CellMesh mesh = build_cell_mesh(0.2, 64, 8);
  std::set<int> masters, slaves;
  for (const auto& [m, s] : mesh.periodic_pairs) {
    masters.insert(m);
    CHECK(slaves.insert(s).second);  // each slave appears once
    CHECK(mesh.node_dof[m] == mesh.node_dof[s]);
  }
  for (const int s : slaves) CHECK(masters.count(s) == 0);
  // paired nodes differ by a unit shift in at least one coordinate
  for (const auto& [m, s] : mesh.periodic_pairs) {
    const double dx = std::abs(mesh.nodes[m].x - mesh.nodes[s].x);
    const double dy = std::abs(mesh.nodes[m].y - mesh.nodes[s].y);
    CHECK((std::abs(dx - 1.0) < 1e-12 || std::abs(dy - 1.0) < 1e-12));
  }
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(build_cell_mesh(0.0, 8, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_cell_mesh(0.4999, 8, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_cell_mesh(0.25, 12, 2), std::invalid_argument);  // not /8
  CHECK_THROWS_AS(build_cell_mesh(0.25, 8, 1), std::invalid_argument);
}

TEST_CASE("radial map: identity, scaling, and corner branches") {
  const RadialMap map{0.25, 0.2};
  // pure scaling inside the source circle
  const Vec2 inner = map(Vec2{0.75, 0.5});
  CHECK(inner.x == doctest::Approx(0.70).epsilon(1e-12));
  CHECK(inner.y == doctest::Approx(0.5).epsilon(1e-12));
  // corners are at distance > 1/2 from the center and stay put
  const Vec2 corner = map(Vec2{0.0, 0.0});
  CHECK(corner.x == 0.0);
  CHECK(corner.y == 0.0);
  // same radii -> identity
  const RadialMap id{0.25, 0.25};
  const Vec2 p = id(Vec2{0.62, 0.41});
  CHECK(p.x == doctest::Approx(0.62).epsilon(1e-14));
  CHECK(p.y == doctest::Approx(0.41).epsilon(1e-14));
}

TEST_CASE("jacobian determinant bounds") {
  const auto [same_lo, same_hi] = jacobian_determinant_bounds({0.25, 0.25});
  CHECK(same_lo == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(same_hi == doctest::Approx(1.0).epsilon(1e-12));

  // shrink: the inner scaling region attains the minimum, and shrinking the
  // hole with the outer boundary fixed must expand some annulus area, so the
  // maximum sits at the annulus slope (0.5 - r_t)/(0.5 - r_s) > 1
  const auto [lo, hi] = jacobian_determinant_bounds({0.25, 0.2});
  CHECK(lo == doctest::Approx((0.2 / 0.25) * (0.2 / 0.25)).epsilon(1e-10));
  // the supremum sits at the outer rim where det jumps back to 1, so the
  // sampled maximum approaches the annulus slope from below
  CHECK(hi == doctest::Approx(0.3 / 0.25).epsilon(1e-3));
  CHECK(hi <= 0.3 / 0.25 + 1e-12);

  // invertibility over the working radius range: det stays positive and within
  // the extremes set by the inner scaling and the annulus slope
  for (double r1 = 0.05; r1 <= 0.49; r1 += 0.11) {
    for (double r2 = 0.05; r2 <= 0.49; r2 += 0.11) {
      const auto [mn, mx] = jacobian_determinant_bounds({r1, r2});
      const double scale2 = (r2 / r1) * (r2 / r1);
      const double slope = (0.5 - r2) / (0.5 - r1);
      CHECK(mn > 0.0);
      CHECK(mn >= std::min(scale2, slope) - 1e-8);
      CHECK(mx <= std::max(scale2, slope) + 1e-8);
    }
  }
}

TEST_CASE("jacobian determinant matches a finite-difference cross-check") {
  const RadialMap map{0.3, 0.22};
  for (double z = 0.31; z < 0.5; z += 0.02) {
    // radial map: det = (g(z)/z) g'(z) with g the mapped radius
    auto g = [&](double zz) { return map(Vec2{0.5 + zz, 0.5}).x - 0.5; };
    const double eps = 1e-6;
    const double gp = (g(z + eps) - g(z - eps)) / (2.0 * eps);
    const double det_fd = g(z) / z * gp;
    CHECK(map.jacobian_det(z) == doctest::Approx(det_fd).epsilon(1e-5));
  }
}

TEST_CASE("apply_radial_map transforms the mesh and round-trips") {
  const CellMesh base = build_cell_mesh(0.25, 32, 8);
  const CellMesh mapped = apply_radial_map(base, 0.2);
  CHECK(mapped.radius == doctest::Approx(0.2));
  CHECK(mapped.triangles.size() == base.triangles.size());
  CHECK(mapped.periodic_pairs == base.periodic_pairs);
  for (const int idx : mapped.inner_boundary) {
    const Vec2& p = mapped.nodes[idx];
    CHECK(std::abs(std::hypot(p.x - 0.5, p.y - 0.5) - 0.2) < 1e-10);
  }
  const CellMesh back = apply_radial_map(mapped, 0.25);
  for (int i = 0; i < base.node_count(); ++i) {
    CHECK(std::abs(back.nodes[i].x - base.nodes[i].x) < 1e-10);
    CHECK(std::abs(back.nodes[i].y - base.nodes[i].y) < 1e-10);
  }
  // same target radius leaves coordinates untouched
  const CellMesh same = apply_radial_map(base, 0.25);
  for (int i = 0; i < base.node_count(); ++i) {
    CHECK(same.nodes[i].x == base.nodes[i].x);
    CHECK(same.nodes[i].y == base.nodes[i].y);
  }
}

TEST_CASE("mesh dump writes a parsable listing") {
  const CellMesh mesh = build_cell_mesh(0.25, 8, 2);
  const std::string path = "mesh_dump_test.txt";
  dump_mesh(mesh, path);
  FILE* f = std::fopen(path.c_str(), "r");
  REQUIRE(f != nullptr);
  int count = -1;
  CHECK(std::fscanf(f, "nodes %d", &count) == 1);
  CHECK(count == mesh.node_count());
  std::fclose(f);
  std::remove(path.c_str());
}
