#pragma once

#include <array>
#include <vector>

#include "clogsim/geometry.hpp"

namespace clogsim {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Nodal solution of the two periodic Neumann cell problems on a CellMesh.
struct CellSolution {
  double radius = 0.0;
  std::array<std::vector<double>, 2> w;   // nodal fields w_1, w_2
  std::array<double, 2> mean{0.0, 0.0};   // area means after normalization
  double residual = 0.0;                  // |K w - f| / |f| against the unpinned system
};

/// Dimensionless 2x2 tortuosity tensor, symmetrized after assembly.
struct TortuosityTensor {
  double t11 = 1.0;
  double t12 = 0.0;
  double t21 = 0.0;
  double t22 = 1.0;
  double asymmetry = 0.0;  // |t12 - t21| before symmetrization; mesh-quality diagnostic

  static TortuosityTensor identity() { return {}; }
  static TortuosityTensor zero() { return {0.0, 0.0, 0.0, 0.0, 0.0}; }
};

/// Piecewise-linear FEM solve of the cell problems for w_1, w_2 with periodic
/// identification, one pinned degree of freedom, and zero area-mean.
CellSolution solve_cell_problem(const CellMesh& mesh);

/// tau_jk = sum over triangles of area * (delta_jk + d_j w_k),
/// symmetrized via (tau + tau^T)/2.
TortuosityTensor tortuosity(const CellMesh& mesh, const CellSolution& sol);

/// Fluid area fraction (1 - pi r^2) / domain_area.
double porosity(double r, double domain_area);

/// D = d_i * porosity(r) * tau as a symmetric 2x2 matrix {{xx, xy}, {yx, yy}}.
std::array<std::array<double, 2>, 2> effective_diffusivity(
    const TortuosityTensor& tau, double r, double d_i, double domain_area);

}  // namespace clogsim
