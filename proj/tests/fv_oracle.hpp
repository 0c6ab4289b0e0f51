// Test-only reference solver for the periodic cell problem, deliberately on a
// different discretization than the production FEM path: a Cartesian staircase
// finite-volume scheme with harmonic-mean face transmissibilities (solid cells
// carry zero conductivity) and a mean-gradient forcing. Used as an
// independent cross-check of the tortuosity values.
#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace clogsim_test {

inline double fv_tortuosity(double radius, int n) {
  if (!(radius > 0.0 && radius < 0.5)) throw std::invalid_argument("radius");
  const double h = 1.0 / n;
  std::vector<char> fluid(static_cast<size_t>(n) * n);
  std::vector<int> dof(fluid.size(), -1);
  int unknowns = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x = (i + 0.5) * h - 0.5;
      const double y = (j + 0.5) * h - 0.5;
      const bool f = x * x + y * y > radius * radius;
      fluid[j * n + i] = f;
      if (f) dof[j * n + i] = unknowns++;
    }
  }

  // faces normal to x, periodic in both directions; transmissibility is the
  // harmonic mean of the two cell conductivities (1 fluid, 0 solid)
  auto trans = [&](int c1, int c2) { return (fluid[c1] && fluid[c2]) ? 1.0 : 0.0; };

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);
  auto cell = [n](int i, int j) {
    return ((j % n) + n) % n * n + ((i % n) + n) % n;
  };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int c = cell(i, j);
      if (!fluid[c]) continue;
      const int row = dof[c];
      double diag = 0.0;
      const int nb[4] = {cell(i + 1, j), cell(i - 1, j), cell(i, j + 1),
                         cell(i, j - 1)};
      // mean-gradient source: flux through face f is T_f (w_nb - w_c + h s_f)
      // with s_f = +1 on the +x face, -1 on the -x face, 0 on y faces
      const double shift[4] = {h, -h, 0.0, 0.0};
      for (int k = 0; k < 4; ++k) {
        const double T = trans(c, nb[k]);
        if (T == 0.0) continue;
        diag += T;
        trips.emplace_back(row, dof[nb[k]], -T);
        rhs[row] += T * shift[k];
      }
      trips.emplace_back(row, row, diag);
    }
  }

  // pin the first unknown to fix the constant null space
  std::vector<Eigen::Triplet<double>> pinned;
  pinned.reserve(trips.size());
  for (const auto& t : trips)
    if (t.row() != 0 && t.col() != 0) pinned.push_back(t);
  pinned.emplace_back(0, 0, 1.0);
  rhs[0] = 0.0;

  Eigen::SparseMatrix<double> A(unknowns, unknowns);
  A.setFromTriplets(pinned.begin(), pinned.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("reference cell solve failed to factorize");
  const Eigen::VectorXd w = solver.solve(rhs);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("reference cell solve failed");

  // effective coefficient: net x-flux per unit applied mean gradient
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int c = cell(i, j);
      const int e = cell(i + 1, j);
      const double T = trans(c, e);
      if (T == 0.0) continue;
      total += T * (w[dof[e]] - w[dof[c]] + h);
    }
  }
  // each face carries flux density T (dw/h + 1) over length h; dividing the
  // summed flux by the n columns gives the cell-averaged coefficient
  return total * h;
}

}  // namespace clogsim_test
