#include "clogsim/cell_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <numbers>

namespace clogsim {
namespace {

constexpr double kPi = std::numbers::pi;

struct TriGeom {
  double area;
  double gx[3];  // gradient of the nodal basis functions
  double gy[3];
};

TriGeom tri_geometry(const CellMesh& mesh, const std::array<int, 3>& tri) {
  const Vec2& p0 = mesh.nodes[tri[0]];
  const Vec2& p1 = mesh.nodes[tri[1]];
  const Vec2& p2 = mesh.nodes[tri[2]];
  TriGeom g{};
  g.area = triangle_area(p0, p1, p2);
  const double inv = 1.0 / (2.0 * g.area);
  g.gx[0] = (p1.y - p2.y) * inv;
  g.gx[1] = (p2.y - p0.y) * inv;
  g.gx[2] = (p0.y - p1.y) * inv;
  g.gy[0] = (p2.x - p1.x) * inv;
  g.gy[1] = (p0.x - p2.x) * inv;
  g.gy[2] = (p1.x - p0.x) * inv;
  return g;
}

double wrap_positive(double angle) {
  while (angle <= 0.0) angle += 2.0 * kPi;
  while (angle > 2.0 * kPi) angle -= 2.0 * kPi;
  return angle;
}

}  // namespace

CellSolution solve_cell_problem(const CellMesh& mesh) {
  const int nd = mesh.dof_count;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.triangles.size() * 9);
  for (const auto& tri : mesh.triangles) {
    const TriGeom g = tri_geometry(mesh, tri);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double k = g.area * (g.gx[a] * g.gx[b] + g.gy[a] * g.gy[b]);
        trips.emplace_back(mesh.node_dof[tri[a]], mesh.node_dof[tri[b]], k);
      }
    }
  }
  Eigen::SparseMatrix<double> stiffness(nd, nd);
  stiffness.setFromTriplets(trips.begin(), trips.end());

  // Boundary load: one-point quadrature per circle segment, normal pointing
  // from the fluid into the ball.
  const int nb = static_cast<int>(mesh.inner_boundary.size());
  std::array<Eigen::VectorXd, 2> load{Eigen::VectorXd::Zero(nd),
                                      Eigen::VectorXd::Zero(nd)};
  for (int m = 0; m < nb; ++m) {
    const int na = mesh.inner_boundary[m];
    const int nbn = mesh.inner_boundary[(m + 1) % nb];
    const Vec2& pa = mesh.nodes[na];
    const Vec2& pb = mesh.nodes[nbn];
    const double ta = std::atan2(pa.y - 0.5, pa.x - 0.5);
    const double tb = std::atan2(pb.y - 0.5, pb.x - 0.5);
    const double dtheta = wrap_positive(tb - ta);
    const double arc = mesh.radius * dtheta;
    const double tm = ta + 0.5 * dtheta;
    // outward normal of the fluid region points into the ball, so the load
    // -e_k . n picks up the +(cos, sin) direction
    const double normal[2] = {std::cos(tm), std::sin(tm)};
    for (int k = 0; k < 2; ++k) {
      const double contrib = 0.5 * arc * normal[k];
      load[k][mesh.node_dof[na]] += contrib;
      load[k][mesh.node_dof[nbn]] += contrib;
    }
  }
  for (int k = 0; k < 2; ++k) {
    if (std::abs(load[k].sum()) > 1e-8)
      throw SolverError("cell problem compatibility violated (boundary quadrature)");
  }

  // Pin one dof to kill the constant null space, solve, then demean.
  const int pin = mesh.node_dof[0];
  std::vector<Eigen::Triplet<double>> pinned;
  pinned.reserve(trips.size() + 1);
  for (const auto& t : trips) {
    if (t.row() == pin || t.col() == pin) continue;
    pinned.push_back(t);
  }
  pinned.emplace_back(pin, pin, 1.0);
  Eigen::SparseMatrix<double> pinned_mat(nd, nd);
  pinned_mat.setFromTriplets(pinned.begin(), pinned.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(pinned_mat);
  if (solver.info() != Eigen::Success)
    throw SolverError("cell problem factorization failed (mesh defect?)");

  const double fluid_area = mesh_fluid_area(mesh);
  CellSolution sol;
  sol.radius = mesh.radius;
  double worst_residual = 0.0;
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd rhs = load[k];
    rhs[pin] = 0.0;
    Eigen::VectorXd w = solver.solve(rhs);
    if (solver.info() != Eigen::Success)
      throw SolverError("cell problem solve failed");

    const double load_norm = std::max(load[k].norm(), 1e-30);
    worst_residual = std::max(worst_residual,
                              (stiffness * w - load[k]).norm() / load_norm);

    // area-weighted nodal mean over the fluid region
    double mean = 0.0;
    for (const auto& tri : mesh.triangles) {
      const double area = triangle_area(mesh.nodes[tri[0]], mesh.nodes[tri[1]],
                                        mesh.nodes[tri[2]]);
      mean += area / 3.0 *
              (w[mesh.node_dof[tri[0]]] + w[mesh.node_dof[tri[1]]] +
               w[mesh.node_dof[tri[2]]]);
    }
    mean /= fluid_area;
    w.array() -= mean;

    double check = 0.0;
    sol.w[k].resize(mesh.node_count());
    for (int i = 0; i < mesh.node_count(); ++i) sol.w[k][i] = w[mesh.node_dof[i]];
    for (const auto& tri : mesh.triangles) {
      const double area = triangle_area(mesh.nodes[tri[0]], mesh.nodes[tri[1]],
                                        mesh.nodes[tri[2]]);
      check += area / 3.0 *
               (sol.w[k][tri[0]] + sol.w[k][tri[1]] + sol.w[k][tri[2]]);
    }
    sol.mean[k] = check / fluid_area;
  }
  sol.residual = worst_residual;
  return sol;
}

TortuosityTensor tortuosity(const CellMesh& mesh, const CellSolution& sol) {
  double tau[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  for (const auto& tri : mesh.triangles) {
    const TriGeom g = tri_geometry(mesh, tri);
    for (int k = 0; k < 2; ++k) {
      double wx = 0.0, wy = 0.0;
      for (int a = 0; a < 3; ++a) {
        wx += sol.w[k][tri[a]] * g.gx[a];
        wy += sol.w[k][tri[a]] * g.gy[a];
      }
      tau[0][k] += g.area * ((k == 0 ? 1.0 : 0.0) + wx);
      tau[1][k] += g.area * ((k == 1 ? 1.0 : 0.0) + wy);
    }
  }
  TortuosityTensor t;
  t.asymmetry = std::abs(tau[0][1] - tau[1][0]);
  t.t11 = tau[0][0];
  t.t22 = tau[1][1];
  t.t12 = t.t21 = 0.5 * (tau[0][1] + tau[1][0]);
  return t;
}

double porosity(double r, double domain_area) {
  return (1.0 - kPi * r * r) / domain_area;
}

std::array<std::array<double, 2>, 2> effective_diffusivity(
    const TortuosityTensor& tau, double r, double d_i, double domain_area) {
  if (!(r >= 0.0 && r <= 0.5)) throw std::invalid_argument("radius out of [0, 1/2]");
  if (!(d_i > 0.0)) throw std::invalid_argument("diffusivity must be positive");
  if (!(domain_area > 0.0)) throw std::invalid_argument("domain area must be positive");
  const double f = d_i * porosity(r, domain_area);
  return {{{f * tau.t11, f * tau.t12}, {f * tau.t21, f * tau.t22}}};
}

}  // namespace clogsim
