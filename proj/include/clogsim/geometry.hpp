#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace clogsim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr Vec2 kCellCenter{0.5, 0.5};

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Triangulated perforated unit cell Y \ B(r) with periodic node
/// identification across opposite square edges.
struct CellMesh {
  double radius = 0.0;
  int n_theta = 0;
  int n_rho = 0;
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<int> inner_boundary;            // ordered by angle around the hole
  std::vector<std::pair<int, int>> periodic_pairs;  // (master, slave)
  std::vector<int> node_dof;                  // node -> dof after identification
  int dof_count = 0;

  int node_count() const { return static_cast<int>(nodes.size()); }
};

/// Structured polar-blended mesh: n_theta angular rays from the cell center,
/// n_rho layers from the hole boundary out to the square edge.
/// n_theta must be a positive multiple of 8 so that opposite-edge nodes land
/// on shared heights/abscissae.
CellMesh build_cell_mesh(double radius, int n_theta, int n_rho);

/// Throws MeshError if any CellMesh invariant is violated.
void validate_cell_mesh(const CellMesh& mesh);

/// Radial blend map carrying the cell at radius r_source onto radius r_target.
/// Identity outside the inscribed circle |y-a| >= 1/2, pure scaling inside the
/// source circle, and an affine reparameterization of |y-a| on the annulus in
/// between. The affine blend keeps the radial profile monotone for every
/// radius pair, so the map is globally invertible and the {r_target, r_source}
/// map is its exact inverse.
struct RadialMap {
  double r_source = 0.0;
  double r_target = 0.0;

  double mapped_radius(double z) const;  // g(z): r_target at z=r_source, 1/2 at z=1/2
  Vec2 operator()(const Vec2& y) const;
  double jacobian_det(double z) const;   // depends on |y-a| only
};

/// Moves the nodes of `mesh` so the hole boundary lands on r_target.
/// Connectivity, periodic pairing, and boundary ordering are untouched.
/// Throws MeshError when the map degenerates a triangle (caller should
/// rebuild from scratch instead).
CellMesh apply_radial_map(const CellMesh& mesh, double r_target);

/// Sampled (min, max) of det D(xi) over the blend annulus.
std::pair<double, double> jacobian_determinant_bounds(const RadialMap& map,
                                                      int samples = 4096);

double triangle_area(const Vec2& p, const Vec2& q, const Vec2& s);
double mesh_fluid_area(const CellMesh& mesh);

/// Plain-text node/triangle listing for external inspection.
void dump_mesh(const CellMesh& mesh, const std::string& path);

}  // namespace clogsim
