#include "clogsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>

namespace clogsim {
namespace {

constexpr double kPi = std::numbers::pi;

double ray_extent(double c, double s) {
  return 0.5 / std::max(std::abs(c), std::abs(s));
}

double snap_unit(double v) {
  if (std::abs(v) < 1e-9) return 0.0;
  if (std::abs(v - 1.0) < 1e-9) return 1.0;
  return v;
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

void assign_dofs(CellMesh& mesh) {
  const int nn = mesh.node_count();
  std::vector<int> parent(nn);
  for (int i = 0; i < nn; ++i) parent[i] = i;
  for (const auto& [master, slave] : mesh.periodic_pairs)
    parent[find_root(parent, slave)] = find_root(parent, master);

  mesh.node_dof.assign(nn, -1);
  int next = 0;
  for (int i = 0; i < nn; ++i) {
    const int root = find_root(parent, i);
    if (mesh.node_dof[root] < 0) mesh.node_dof[root] = next++;
    mesh.node_dof[i] = mesh.node_dof[root];
  }
  mesh.dof_count = next;
}

}  // namespace

double triangle_area(const Vec2& p, const Vec2& q, const Vec2& s) {
  return 0.5 * ((q.x - p.x) * (s.y - p.y) - (q.y - p.y) * (s.x - p.x));
}

double mesh_fluid_area(const CellMesh& mesh) {
  double area = 0.0;
  for (const auto& tri : mesh.triangles)
    area += triangle_area(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
  return area;
}

CellMesh build_cell_mesh(double radius, int n_theta, int n_rho) {
  if (!(radius > 0.0 && radius < 0.5 - 1e-4))
    throw std::invalid_argument("cell radius must lie in (0, 1/2 - 1e-4)");
  if (n_theta <= 0 || n_theta % 8 != 0)
    throw std::invalid_argument("n_theta must be a positive multiple of 8");
  if (n_rho < 2) throw std::invalid_argument("n_rho must be at least 2");

  CellMesh mesh;
  mesh.radius = radius;
  mesh.n_theta = n_theta;
  mesh.n_rho = n_rho;

  const int n = n_theta;
  const int cols = n_rho + 1;
  auto id = [cols](int i, int j) { return i * cols + j; };
  mesh.nodes.resize(static_cast<size_t>(n) * cols);

  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * kPi * i / n;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double extent = ray_extent(c, s);
    for (int j = 0; j <= n_rho; ++j) {
      const double rho = radius + (extent - radius) * j / n_rho;
      Vec2 p{0.5 + rho * c, 0.5 + rho * s};
      if (j == n_rho) {
        p.x = snap_unit(p.x);
        p.y = snap_unit(p.y);
      }
      mesh.nodes[id(i, j)] = p;
    }
  }

  // Periodic pairing via ray indices: left <-> right through theta -> pi-theta,
  // bottom <-> top through theta -> -theta. The (0,0) corner needs the diagonal
  // shift to reach its master at (1,1); all other slaves shift by one unit
  // vector. Masters live on the right and top edges and are never slaves.
  const int q = n / 8;
  auto outer = [&](int ray) { return id(((ray % n) + n) % n, n_rho); };
  auto add_pair = [&](int master_ray, int slave_ray, double sx, double sy) {
    const int m = outer(master_ray);
    const int sl = outer(slave_ray);
    mesh.nodes[sl] = {mesh.nodes[m].x - sx, mesh.nodes[m].y - sy};
    mesh.periodic_pairs.emplace_back(m, sl);
  };
  for (int i = 3 * q; i < 5 * q; ++i) add_pair(n / 2 - i, i, 1.0, 0.0);  // left edge
  add_pair(q, 5 * q, 1.0, 1.0);                                          // (0,0) corner
  for (int i = 5 * q + 1; i <= 7 * q; ++i) add_pair(n - i, i, 0.0, 1.0); // bottom edge

  for (int i = 0; i < n; ++i) {
    const int i2 = (i + 1) % n;
    for (int j = 0; j < n_rho; ++j) {
      mesh.triangles.push_back({id(i, j), id(i, j + 1), id(i2, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i2, j + 1), id(i2, j)});
    }
  }

  mesh.inner_boundary.resize(n);
  for (int i = 0; i < n; ++i) mesh.inner_boundary[i] = id(i, 0);

  assign_dofs(mesh);
  validate_cell_mesh(mesh);
  return mesh;
}

void validate_cell_mesh(const CellMesh& mesh) {
  const Vec2 a = kCellCenter;
  for (const auto& p : mesh.nodes) {
    const double dist = std::hypot(p.x - a.x, p.y - a.y);
    if (dist < mesh.radius - 1e-12)
      throw MeshError("node inside the obstacle ball");
    if (p.x < -1e-12 || p.x > 1.0 + 1e-12 || p.y < -1e-12 || p.y > 1.0 + 1e-12)
      throw MeshError("node outside the unit cell");
  }
  for (const auto& tri : mesh.triangles) {
    if (triangle_area(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]) <= 0.0)
      throw MeshError("non-positive triangle area");
  }
  std::vector<char> is_master(mesh.nodes.size(), 0), is_slave(mesh.nodes.size(), 0);
  for (const auto& [m, s] : mesh.periodic_pairs) {
    is_master[m] = 1;
    is_slave[s] = 1;
    const double dx = mesh.nodes[m].x - mesh.nodes[s].x;
    const double dy = mesh.nodes[m].y - mesh.nodes[s].y;
    const bool ux = std::abs(std::abs(dx) - 1.0) < 1e-12;
    const bool uy = std::abs(std::abs(dy) - 1.0) < 1e-12;
    const bool zx = std::abs(dx) < 1e-12;
    const bool zy = std::abs(dy) < 1e-12;
    if (!((ux && zy) || (zx && uy) || (ux && uy)))
      throw MeshError("periodic pair not related by a lattice shift");
  }
  for (size_t i = 0; i < mesh.nodes.size(); ++i)
    if (is_master[i] && is_slave[i])
      throw MeshError("node is both periodic master and slave");
  for (const int node : mesh.inner_boundary) {
    const Vec2& p = mesh.nodes[node];
    const double dist = std::hypot(p.x - a.x, p.y - a.y);
    if (std::abs(dist - mesh.radius) > 1e-10)
      throw MeshError("inner boundary node off the circle");
  }
}

double RadialMap::mapped_radius(double z) const {
  const double slope = (0.5 - r_target) / (0.5 - r_source);
  return r_target + slope * (z - r_source);
}

Vec2 RadialMap::operator()(const Vec2& y) const {
  const double rx = y.x - 0.5;
  const double ry = y.y - 0.5;
  const double z = std::hypot(rx, ry);
  if (z >= 0.5) return y;
  const double scale = r_target / r_source;
  if (z <= r_source) return {0.5 + scale * rx, 0.5 + scale * ry};
  const double f = mapped_radius(z) / z;
  return {0.5 + f * rx, 0.5 + f * ry};
}

double RadialMap::jacobian_det(double z) const {
  const double scale = r_target / r_source;
  if (z >= 0.5) return 1.0;
  if (z <= r_source) return scale * scale;
  // det of a radial map z -> g(z) is (g/z) * g'
  return mapped_radius(z) / z * (0.5 - r_target) / (0.5 - r_source);
}

std::pair<double, double> jacobian_determinant_bounds(const RadialMap& map, int samples) {
  if (!(map.r_source > 0.0 && map.r_source < 0.5) ||
      !(map.r_target > 0.0 && map.r_target < 0.5))
    throw std::invalid_argument("radial map radii must lie in (0, 1/2)");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int k = 0; k <= samples; ++k) {
    const double z = map.r_source + (0.5 - map.r_source) * k / samples;
    const double det = map.jacobian_det(z);
    lo = std::min(lo, det);
    hi = std::max(hi, det);
  }
  return {lo, hi};
}

CellMesh apply_radial_map(const CellMesh& mesh, double r_target) {
  if (!(r_target > 0.0 && r_target < 0.5))
    throw std::invalid_argument("target radius must lie in (0, 1/2)");
  const RadialMap map{mesh.radius, r_target};
  CellMesh out = mesh;
  out.radius = r_target;
  for (auto& p : out.nodes) p = map(p);
  for (const auto& tri : out.triangles) {
    if (triangle_area(out.nodes[tri[0]], out.nodes[tri[1]], out.nodes[tri[2]]) <= 0.0)
      throw MeshError("radial map degenerated a triangle; rebuild the mesh instead");
  }
  validate_cell_mesh(out);
  return out;
}

void dump_mesh(const CellMesh& mesh, const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f) throw std::runtime_error("cannot open mesh dump file: " + path);
  std::fprintf(f.get(), "nodes %d\n", mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i)
    std::fprintf(f.get(), "%d %.17g %.17g\n", i, mesh.nodes[i].x, mesh.nodes[i].y);
  std::fprintf(f.get(), "triangles %zu\n", mesh.triangles.size());
  for (size_t t = 0; t < mesh.triangles.size(); ++t)
    std::fprintf(f.get(), "%zu %d %d %d\n", t, mesh.triangles[t][0],
                 mesh.triangles[t][1], mesh.triangles[t][2]);
}

}  // namespace clogsim
