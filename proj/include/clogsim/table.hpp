#pragma once

#include <string>
#include <vector>

#include "clogsim/cell_solver.hpp"

namespace clogsim {

struct TableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MeshMeta {
  int n_theta = 64;
  int n_rho = 24;

  bool operator==(const MeshMeta&) const = default;
};

/// Radius-indexed tortuosity samples with linear interpolation between nodes.
/// When clog_anchor is set the final entry is (1/2, zero tensor), encoding
/// fully closed throats; interpolation ramps linearly down to it.
struct TortuosityTable {
  std::vector<double> radii;               // strictly increasing
  std::vector<TortuosityTensor> tensors;
  MeshMeta mesh_meta{};
  bool clog_anchor = false;
};

/// Solves the cell problem at r_min, r_min + delta_r, ... up to 1/2 - delta_r
/// (cell meshes degenerate at exactly 1/2), then appends the clog anchor.
/// Individual solves run concurrently.
TortuosityTable build_table(double r_min, double delta_r, MeshMeta meta);

/// Entrywise linear interpolation; clamps to the first entry below range and
/// returns the zero tensor for r >= 1/2.
TortuosityTensor interpolate(const TortuosityTable& table, double r);

void validate_table(const TortuosityTable& table);

/// Cache file: header `clogsim-tau v1 n_theta=<int> n_rho=<int>`, then one
/// line per entry `r tau11 tau12 tau21 tau22` at 17 significant digits.
void save_table(const TortuosityTable& table, const std::string& path);

/// Loads and validates a table. When `expected` is given and the stored
/// mesh_meta differs, *meta_mismatch is set (the table is still returned).
TortuosityTable load_table(const std::string& path,
                           const MeshMeta* expected = nullptr,
                           bool* meta_mismatch = nullptr);

}  // namespace clogsim
