#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "clogsim/table.hpp"

namespace clogsim {

struct NumericsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kRadiusFloor = 1e-3;
inline constexpr double kClogRadius = 0.5;

/// All physical coefficients of the macro system.
struct ModelParams {
  int N = 1;
  std::vector<double> d;        // molecular diffusivities d_i
  std::vector<double> a;        // deposition coefficients a_i
  std::vector<double> alpha_v;  // absorption rates in the v-equation
  std::vector<double> beta;     // dissolution rates beta_i
  std::vector<std::vector<double>> gamma;  // N x N coagulation kernel, symmetric
  double alpha_r = 1.0;         // radius growth coefficient
  double b_r = 0.0;             // Robin coefficient at the inflow edge
  double t0 = std::numeric_limits<double>::infinity();  // inflow shutoff time
  double domain_area = 1.0;
  double kappa = 1.0;           // accepted in configs, plays no role in the equations

  double beta_sum() const;
  double a_sum() const;
  void validate() const;
};

struct GridSpec {
  int points = 41;   // points per side; spacing 1/(points-1)
  double dt = 0.0;
  double T = 0.0;

  double dx() const { return 1.0 / (points - 1); }
};

/// Inflow data sampled on the x2=0 edge; the run loop gates it by t <= t0.
struct BoundaryConfig {
  // species (0-based), x1 -> u_i^b(x1)
  std::function<double(int, double)> inflow_profile;
};

struct MacroState {
  double t = 0.0;
  std::vector<std::vector<double>> U;  // per species, row-major (x2 rows)
  std::vector<double> V;
  std::vector<double> R;
  std::vector<std::uint8_t> clogged;
};

MacroState make_uniform_state(int points, const std::vector<double>& u0,
                              double v0, const std::vector<double>& r0);

/// Truncated Smoluchowski rates: gain over ordered pairs j+l=i halved, loss
/// capped at size N-i so no aggregate exceeds N. First moment sums to zero.
std::vector<double> smoluchowski_rates(const std::vector<double>& u,
                                       const std::vector<std::vector<double>>& gamma);

/// Interface-to-pore ratio L(r)/A(r) = 2 pi r / (1 - pi r^2).
double length_area_ratio(double r);

/// (L/A)(a_i u_i - beta_i v); zero for clogged cells (frozen exchange).
double exchange_term(double r, double u_i, double v, double a_i, double beta_i,
                     bool clogged = false);

/// 0.95 * dx^2 / (4 * D_max) with D_max = max_i d_i * max over the table of
/// porosity(r) * tau(r).
double stability_guard(const GridSpec& grid, const ModelParams& params,
                       const TortuosityTable& table);

/// One forward-Euler step of the coupled (u, v, r) system.
MacroState step_explicit(const MacroState& state, const ModelParams& params,
                         const GridSpec& grid, const TortuosityTable& table,
                         const BoundaryConfig& bc);

struct PicardResult {
  MacroState state;
  int iterations = 0;
};

/// One semi-implicit step: fixed-point iteration over the frozen-coefficient
/// backward-Euler diffusion solve, with v and r advanced by their closed-form
/// solution operators discretized over the step.
PicardResult step_picard(const MacroState& state, const ModelParams& params,
                         const GridSpec& grid, const TortuosityTable& table,
                         const BoundaryConfig& bc, double tol, int max_iter);

namespace detail {

/// Flux-form div(D grad u) with mirror ghosts on three edges and a Robin ghost
/// on x2=0. `inflow` supplies the Robin data samples (null = homogeneous).
void apply_diffusion(int n, double dx, const std::vector<double>& D,
                     const std::vector<double>& u, double b_r,
                     const std::vector<double>* inflow, std::vector<double>& out);

}  // namespace detail

}  // namespace clogsim
