#include "clogsim/table.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <future>
#include <memory>
#include <sstream>

namespace clogsim {

TortuosityTable build_table(double r_min, double delta_r, MeshMeta meta) {
  if (!(r_min > 0.0 && r_min < 0.5))
    throw std::invalid_argument("r_min must lie in (0, 1/2)");
  if (!(delta_r > 0.0 && delta_r < 0.5 - r_min))
    throw std::invalid_argument("delta_r must lie in (0, 1/2 - r_min)");

  std::vector<double> radii;
  for (int m = 0;; ++m) {
    const double r = r_min + m * delta_r;
    if (r > 0.5 - delta_r + 1e-12) break;
    radii.push_back(r);
  }

  std::vector<std::future<TortuosityTensor>> jobs;
  jobs.reserve(radii.size());
  for (const double r : radii) {
    jobs.push_back(std::async(std::launch::async, [r, meta]() {
      const CellMesh mesh = build_cell_mesh(r, meta.n_theta, meta.n_rho);
      return tortuosity(mesh, solve_cell_problem(mesh));
    }));
  }

  TortuosityTable table;
  table.mesh_meta = meta;
  table.radii = radii;
  table.tensors.reserve(radii.size() + 1);
  for (size_t i = 0; i < jobs.size(); ++i) {
    try {
      table.tensors.push_back(jobs[i].get());
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "cell solve failed at radius " << radii[i] << ": " << e.what();
      throw TableError(msg.str());
    }
  }
  table.radii.push_back(0.5);
  table.tensors.push_back(TortuosityTensor::zero());
  table.clog_anchor = true;
  validate_table(table);
  return table;
}

TortuosityTensor interpolate(const TortuosityTable& table, double r) {
  if (table.radii.empty()) throw TableError("interpolation on an empty table");
  if (r >= 0.5) return TortuosityTensor::zero();
  if (r <= table.radii.front()) return table.tensors.front();
  if (r >= table.radii.back()) return table.tensors.back();
  size_t hi = 1;
  while (table.radii[hi] < r) ++hi;
  const size_t lo = hi - 1;
  const double s = (r - table.radii[lo]) / (table.radii[hi] - table.radii[lo]);
  const TortuosityTensor& A = table.tensors[lo];
  const TortuosityTensor& B = table.tensors[hi];
  TortuosityTensor out;
  out.t11 = A.t11 + s * (B.t11 - A.t11);
  out.t12 = A.t12 + s * (B.t12 - A.t12);
  out.t21 = A.t21 + s * (B.t21 - A.t21);
  out.t22 = A.t22 + s * (B.t22 - A.t22);
  out.asymmetry = 0.0;
  return out;
}

void validate_table(const TortuosityTable& table) {
  if (table.radii.size() != table.tensors.size())
    throw TableError("radius/tensor count mismatch");
  if (table.radii.empty()) throw TableError("empty table");
  for (size_t i = 1; i < table.radii.size(); ++i)
    if (!(table.radii[i] > table.radii[i - 1]))
      throw TableError("table radii not strictly increasing");
  if (table.clog_anchor) {
    if (table.radii.back() != 0.5)
      throw TableError("clog anchor set but last radius is not 1/2");
    const TortuosityTensor& z = table.tensors.back();
    if (z.t11 != 0.0 || z.t12 != 0.0 || z.t21 != 0.0 || z.t22 != 0.0)
      throw TableError("clog anchor tensor is not zero");
  } else if (table.radii.back() == 0.5) {
    throw TableError("last radius is 1/2 but clog anchor is not set");
  }
  for (const auto& t : table.tensors) {
    if (std::abs(t.t12 - t.t21) > 1e-10) throw TableError("tensor not symmetric");
    const double tr = t.t11 + t.t22;
    const double det = t.t11 * t.t22 - t.t12 * t.t21;
    if (tr < -1e-12 || det < -1e-10) throw TableError("tensor not positive semidefinite");
    const double eig_max = 0.5 * (tr + std::sqrt(std::max(tr * tr - 4.0 * det, 0.0)));
    if (eig_max > 1.0 + 1e-2) throw TableError("tensor eigenvalue above 1");
  }
  for (size_t i = 1; i < table.tensors.size(); ++i)
    if (!(table.tensors[i].t11 < table.tensors[i - 1].t11))
      throw TableError("tau11 not strictly decreasing along radii");
}

void save_table(const TortuosityTable& table, const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f) throw TableError("cannot open table file for writing: " + path);
  std::fprintf(f.get(), "clogsim-tau v1 n_theta=%d n_rho=%d\n", table.mesh_meta.n_theta,
               table.mesh_meta.n_rho);
  for (size_t i = 0; i < table.radii.size(); ++i) {
    const TortuosityTensor& t = table.tensors[i];
    std::fprintf(f.get(), "%.17g %.17g %.17g %.17g %.17g\n", table.radii[i], t.t11,
                 t.t12, t.t21, t.t22);
  }
}

TortuosityTable load_table(const std::string& path, const MeshMeta* expected,
                           bool* meta_mismatch) {
  if (meta_mismatch) *meta_mismatch = false;
  std::ifstream in(path);
  if (!in) throw TableError("cannot open table file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw TableError("empty table file: " + path);
  TortuosityTable table;
  if (std::sscanf(header.c_str(), "clogsim-tau v1 n_theta=%d n_rho=%d",
                  &table.mesh_meta.n_theta, &table.mesh_meta.n_rho) != 2)
    throw TableError("malformed table header: " + header);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double r;
    TortuosityTensor t;
    if (std::sscanf(line.c_str(), "%lg %lg %lg %lg %lg", &r, &t.t11, &t.t12, &t.t21,
                    &t.t22) != 5)
      throw TableError("malformed table entry: " + line);
    table.radii.push_back(r);
    table.tensors.push_back(t);
  }
  if (!table.radii.empty() && table.radii.back() == 0.5) table.clog_anchor = true;
  validate_table(table);
  if (expected && meta_mismatch && !(table.mesh_meta == *expected))
    *meta_mismatch = true;
  return table;
}

}  // namespace clogsim
