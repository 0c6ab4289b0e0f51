#include "clogsim/macro.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace clogsim {
namespace {

constexpr double kPi = std::numbers::pi;

void check_finite(const std::vector<double>& field, const char* what) {
  for (const double v : field) {
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "non-finite value in " << what << " (numerical abort)";
      throw NumericsError(msg.str());
    }
  }
}

}  // namespace

double ModelParams::beta_sum() const {
  double b = 0.0;
  for (const double v : beta) b += v;
  return b;
}

double ModelParams::a_sum() const {
  double s = 0.0;
  for (const double v : a) s += v;
  return s;
}

void ModelParams::validate() const {
  if (N < 1) throw std::invalid_argument("species count must be >= 1");
  auto check_list = [&](const std::vector<double>& v, const char* name) {
    if (static_cast<int>(v.size()) != N)
      throw std::invalid_argument(std::string(name) + " must have N entries");
    for (const double x : v)
      if (!(x >= 0.0)) throw std::invalid_argument(std::string(name) + " must be nonnegative");
  };
  check_list(d, "d");
  check_list(a, "a");
  check_list(alpha_v, "alpha_v");
  check_list(beta, "beta");
  if (static_cast<int>(gamma.size()) != N)
    throw std::invalid_argument("gamma must be N x N");
  for (int i = 0; i < N; ++i) {
    if (static_cast<int>(gamma[i].size()) != N)
      throw std::invalid_argument("gamma must be N x N");
    for (int j = 0; j < N; ++j) {
      if (!(gamma[i][j] >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
      if (std::abs(gamma[i][j] - gamma[j][i]) > 1e-12)
        throw std::invalid_argument("gamma must be symmetric");
    }
  }
  if (!(alpha_r >= 0.0) || !(b_r >= 0.0))
    throw std::invalid_argument("alpha_r and b_r must be nonnegative");
  if (!(domain_area > 0.0)) throw std::invalid_argument("domain area must be positive");
}

MacroState make_uniform_state(int points, const std::vector<double>& u0, double v0,
                              const std::vector<double>& r0) {
  const int cells = points * points;
  MacroState s;
  s.U.resize(u0.size());
  for (size_t i = 0; i < u0.size(); ++i) s.U[i].assign(cells, u0[i]);
  s.V.assign(cells, v0);
  s.R = r0;
  if (static_cast<int>(s.R.size()) != cells)
    throw std::invalid_argument("r0 field size does not match the grid");
  s.clogged.assign(cells, 0);
  for (int c = 0; c < cells; ++c)
    if (s.R[c] >= kClogRadius) s.clogged[c] = 1;
  return s;
}

std::vector<double> smoluchowski_rates(const std::vector<double>& u,
                                       const std::vector<std::vector<double>>& gamma) {
  const int N = static_cast<int>(u.size());
  std::vector<double> rates(N, 0.0);
  for (int i = 1; i <= N; ++i) {
    double gain = 0.0;
    for (int j = 1; j < i; ++j) {
      const int l = i - j;
      gain += gamma[j - 1][l - 1] * u[j - 1] * u[l - 1];
    }
    double loss = 0.0;
    for (int j = 1; j <= N - i; ++j) loss += gamma[i - 1][j - 1] * u[j - 1];
    rates[i - 1] = 0.5 * gain - u[i - 1] * loss;
  }
  return rates;
}

double length_area_ratio(double r) {
  return 2.0 * kPi * r / (1.0 - kPi * r * r);
}

double exchange_term(double r, double u_i, double v, double a_i, double beta_i,
                     bool clogged) {
  if (clogged) return 0.0;
  if (r <= 0.0) return 0.0;
  return length_area_ratio(r) * (a_i * u_i - beta_i * v);
}

double stability_guard(const GridSpec& grid, const ModelParams& params,
                       const TortuosityTable& table) {
  double max_phitau = 0.0;
  for (size_t i = 0; i < table.radii.size(); ++i) {
    const double phi = porosity(table.radii[i], params.domain_area);
    const double t = std::max(table.tensors[i].t11, table.tensors[i].t22);
    max_phitau = std::max(max_phitau, phi * t);
  }
  double d_max = 0.0;
  for (const double di : params.d) d_max = std::max(d_max, di);
  const double dmax_eff = d_max * max_phitau;
  if (dmax_eff <= 0.0) return std::numeric_limits<double>::infinity();
  const double dx = grid.dx();
  return 0.95 * dx * dx / (4.0 * dmax_eff);
}

namespace detail {

void apply_diffusion(int n, double dx, const std::vector<double>& D,
                     const std::vector<double>& u, double b_r,
                     const std::vector<double>* inflow, std::vector<double>& out) {
  const double inv_dx2 = 1.0 / (dx * dx);
  out.assign(static_cast<size_t>(n) * n, 0.0);
  auto at = [n](int l1, int l2) { return l2 * n + l1; };
  for (int l2 = 0; l2 < n; ++l2) {
    for (int l1 = 0; l1 < n; ++l1) {
      const int c = at(l1, l2);
      const double uc = u[c];
      const double Dc = D[c];

      // x-direction with mirror ghosts
      const int e = (l1 + 1 < n) ? at(l1 + 1, l2) : at(l1 - 1, l2);
      const int w = (l1 - 1 >= 0) ? at(l1 - 1, l2) : at(l1 + 1, l2);
      const double flux_x = 0.5 * (D[e] + Dc) * (u[e] - uc) -
                            0.5 * (Dc + D[w]) * (uc - u[w]);

      // y-direction: mirror at the top, Robin ghost at the bottom
      double flux_y;
      if (l2 == 0) {
        const int nn = at(l1, 1);
        const double ub = inflow ? (*inflow)[l1] : 0.0;
        const double ghost = u[nn] + 2.0 * dx * (ub - b_r * uc);
        const double Dhalf = 0.5 * (Dc + D[nn]);  // ghost diffusivity mirrors D[nn]
        flux_y = 0.5 * (D[nn] + Dc) * (u[nn] - uc) - Dhalf * (uc - ghost);
      } else {
        const int s = at(l1, l2 - 1);
        const int nn = (l2 + 1 < n) ? at(l1, l2 + 1) : at(l1, l2 - 1);
        flux_y = 0.5 * (D[nn] + Dc) * (u[nn] - uc) - 0.5 * (Dc + D[s]) * (uc - u[s]);
      }
      out[c] = (flux_x + flux_y) * inv_dx2;
    }
  }
}

}  // namespace detail

namespace {

std::vector<double> sample_inflow(const BoundaryConfig& bc, int species, int n,
                                  double dx, bool active) {
  std::vector<double> samples(n, 0.0);
  if (active && bc.inflow_profile)
    for (int l1 = 0; l1 < n; ++l1) samples[l1] = bc.inflow_profile(species, l1 * dx);
  return samples;
}

// scalar diffusivity: the square cell makes tau isotropic up to mesh error,
// so use d_i * phi(r) * (tau11 + tau22)/2 per grid point
double scalar_diffusivity(const TortuosityTable& table, double r, double d_i,
                          double domain_area) {
  const TortuosityTensor tau = interpolate(table, r);
  return d_i * porosity(r, domain_area) * 0.5 * (tau.t11 + tau.t22);
}

void diffusivity_field(const MacroState& state, const ModelParams& params,
                       const TortuosityTable& table, int species,
                       std::vector<double>& D) {
  const size_t cells = state.R.size();
  D.resize(cells);
  for (size_t c = 0; c < cells; ++c)
    D[c] = scalar_diffusivity(table, state.R[c], params.d[species],
                              params.domain_area);
}

void update_vr(const ModelParams& params, double dt,
               const std::vector<std::vector<double>>& U,
               const std::vector<double>& V, const std::vector<double>& R,
               const std::vector<std::uint8_t>& clogged_before,
               std::vector<double>& Vnew, std::vector<double>& Rnew,
               std::vector<std::uint8_t>& clogged) {
  const int N = params.N;
  const double b = params.beta_sum();
  const size_t cells = V.size();
  Vnew.resize(cells);
  Rnew.resize(cells);
  clogged.assign(cells, 0);
  for (size_t c = 0; c < cells; ++c) {
    double absorb = 0.0, deposit = 0.0;
    for (int i = 0; i < N; ++i) {
      absorb += params.alpha_v[i] * U[i][c];
      deposit += params.a[i] * U[i][c];
    }
    Vnew[c] = V[c] + dt * (absorb - b * V[c]);
    if (clogged_before[c]) {
      // clogging is irreversible: radius stays capped, growth frozen
      Rnew[c] = kClogRadius;
      clogged[c] = 1;
      continue;
    }
    const double source = deposit - b * V[c];
    const double r = R[c];
    double rn;
    if (r > kRadiusFloor) {
      // division form of the update; algebraically 2 pi alpha dt * source
      rn = r + dt * (1.0 / r) * params.alpha_r * source * (2.0 * kPi * r);
    } else {
      rn = r + dt * 2.0 * kPi * params.alpha_r * source;
    }
    rn = std::clamp(rn, kRadiusFloor, kClogRadius);
    Rnew[c] = rn;
    if (rn >= kClogRadius) clogged[c] = 1;
  }
}

}  // namespace

MacroState step_explicit(const MacroState& state, const ModelParams& params,
                         const GridSpec& grid, const TortuosityTable& table,
                         const BoundaryConfig& bc) {
  const int n = grid.points;
  const double dx = grid.dx();
  const double dt = grid.dt;
  const int N = params.N;
  const size_t cells = static_cast<size_t>(n) * n;
  const bool inflow_active = state.t <= params.t0 + 1e-12;

  MacroState next;
  next.t = state.t + dt;
  next.U.assign(N, std::vector<double>(cells, 0.0));

  // reaction terms at time level n
  std::vector<std::vector<double>> reaction(N, std::vector<double>(cells));
  {
    std::vector<double> u_local(N);
    for (size_t c = 0; c < cells; ++c) {
      for (int i = 0; i < N; ++i) u_local[i] = state.U[i][c];
      const std::vector<double> rates = smoluchowski_rates(u_local, params.gamma);
      for (int i = 0; i < N; ++i) reaction[i][c] = rates[i];
    }
  }

  std::vector<double> Dfield, lap;
  for (int i = 0; i < N; ++i) {
    diffusivity_field(state, params, table, i, Dfield);
    const std::vector<double> inflow = sample_inflow(bc, i, n, dx, inflow_active);
    detail::apply_diffusion(n, dx, Dfield, state.U[i], params.b_r, &inflow, lap);

    for (size_t c = 0; c < cells; ++c) {
      const double exch = exchange_term(state.R[c], state.U[i][c], state.V[c],
                                        params.a[i], params.beta[i],
                                        state.clogged[c] != 0);
      next.U[i][c] = state.U[i][c] + dt * (lap[c] + reaction[i][c] - exch);
    }
    check_finite(next.U[i], "species field");
  }

  update_vr(params, dt, state.U, state.V, state.R, state.clogged, next.V, next.R,
            next.clogged);
  check_finite(next.V, "deposited field");
  check_finite(next.R, "radius field");
  return next;
}

PicardResult step_picard(const MacroState& state, const ModelParams& params,
                         const GridSpec& grid, const TortuosityTable& table,
                         const BoundaryConfig& bc, double tol, int max_iter) {
  const int n = grid.points;
  const double dx = grid.dx();
  const double dt = grid.dt;
  const int N = params.N;
  const size_t cells = static_cast<size_t>(n) * n;
  const double b = params.beta_sum();
  const bool inflow_active = (state.t + dt) <= params.t0 + 1e-12;
  const double decay = std::exp(-b * dt);

  // trapezoid weights for the half-cell finite-volume inner product
  std::vector<double> W(cells);
  auto wgt = [n](int l) { return (l == 0 || l == n - 1) ? 0.5 : 1.0; };
  for (int l2 = 0; l2 < n; ++l2)
    for (int l1 = 0; l1 < n; ++l1) W[l2 * n + l1] = wgt(l1) * wgt(l2);

  std::vector<std::vector<double>> u_iter = state.U;
  std::vector<double> v_new(cells), r_new(cells);
  std::vector<std::uint8_t> clog_new(cells, 0);

  // The clog set is decided on the first evaluation and then frozen for the
  // rest of the step: flipping it between iterations makes the fixed-point
  // map discontinuous and stalls the convergence. Clogging is irreversible.
  auto advance_vr = [&](const std::vector<std::vector<double>>& u_tilde,
                        bool set_flags) {
    for (size_t c = 0; c < cells; ++c) {
      double absorb = 0.0;
      for (int i = 0; i < N; ++i)
        absorb += params.alpha_v[i] * 0.5 * dt *
                  (decay * state.U[i][c] + u_tilde[i][c]);
      v_new[c] = decay * state.V[c] + absorb;
      if (state.clogged[c]) {
        r_new[c] = kClogRadius;
        clog_new[c] = 1;
        continue;
      }
      double deposit = 0.0;
      for (int i = 0; i < N; ++i)
        deposit += params.a[i] * 0.5 * dt * (state.U[i][c] + u_tilde[i][c]);
      const double dissolve = b * 0.5 * dt * (state.V[c] + v_new[c]);
      double rn = state.R[c] + 2.0 * kPi * params.alpha_r * (deposit - dissolve);
      rn = std::clamp(rn, kRadiusFloor, kClogRadius);
      if (set_flags) clog_new[c] = (rn >= kClogRadius) ? 1 : 0;
      if (clog_new[c]) rn = kClogRadius;
      r_new[c] = rn;
    }
  };

  std::vector<double> Dfield(cells), tmp, rhs(cells), source(cells);
  std::vector<double> u_local(N);
  std::vector<std::vector<double>> u_next(N, std::vector<double>(cells));

  int iterations = 0;
  for (int k = 0; k < max_iter; ++k) {
    ++iterations;
    advance_vr(u_iter, /*set_flags=*/k == 0);

    // frozen coefficients and right-hand sides
    std::vector<std::vector<double>> forcing(N, std::vector<double>(cells));
    for (size_t c = 0; c < cells; ++c) {
      for (int i = 0; i < N; ++i) u_local[i] = u_iter[i][c];
      const std::vector<double> rates = smoluchowski_rates(u_local, params.gamma);
      for (int i = 0; i < N; ++i) {
        const double exch = exchange_term(r_new[c], u_iter[i][c], v_new[c],
                                          params.a[i], params.beta[i],
                                          clog_new[c] != 0);
        forcing[i][c] = rates[i] - exch;
      }
    }

    double delta = 0.0;
    for (int i = 0; i < N; ++i) {
      // D from the radius produced by the frozen iterate
      for (size_t c = 0; c < cells; ++c)
        Dfield[c] = scalar_diffusivity(table, r_new[c], params.d[i],
                                       params.domain_area);
      const std::vector<double> inflow = sample_inflow(bc, i, n, dx, inflow_active);

      // Robin source from the affine part of the diffusion operator
      std::vector<double> zero(cells, 0.0);
      detail::apply_diffusion(n, dx, Dfield, zero, params.b_r, &inflow, source);

      for (size_t c = 0; c < cells; ++c)
        rhs[c] = W[c] * (state.U[i][c] + dt * (forcing[i][c] + source[c]));

      // weighted backward-Euler operator: A u = W (u - dt L0 u)
      auto apply_op = [&](const std::vector<double>& x, std::vector<double>& out) {
        detail::apply_diffusion(n, dx, Dfield, x, params.b_r, nullptr, tmp);
        out.resize(cells);
        for (size_t c = 0; c < cells; ++c) out[c] = W[c] * (x[c] - dt * tmp[c]);
      };

      // conjugate gradients, warm start from the current iterate
      std::vector<double> x = u_iter[i];
      std::vector<double> res(cells), p(cells), Ap(cells);
      apply_op(x, Ap);
      double bnorm2 = 0.0;
      for (size_t c = 0; c < cells; ++c) {
        res[c] = rhs[c] - Ap[c];
        bnorm2 += rhs[c] * rhs[c];
      }
      p = res;
      double rr = 0.0;
      for (size_t c = 0; c < cells; ++c) rr += res[c] * res[c];
      const double target2 = std::max(bnorm2, 1e-300) * 1e-20;
      const int cg_max = 20 * n * n;
      int cg_it = 0;
      while (rr > target2 && cg_it < cg_max) {
        apply_op(p, Ap);
        double pAp = 0.0;
        for (size_t c = 0; c < cells; ++c) pAp += p[c] * Ap[c];
        const double alpha = rr / pAp;
        double rr_new = 0.0;
        for (size_t c = 0; c < cells; ++c) {
          x[c] += alpha * p[c];
          res[c] -= alpha * Ap[c];
          rr_new += res[c] * res[c];
        }
        const double beta_cg = rr_new / rr;
        for (size_t c = 0; c < cells; ++c) p[c] = res[c] + beta_cg * p[c];
        rr = rr_new;
        ++cg_it;
      }
      if (rr > target2)
        throw NumericsError("implicit diffusion solve failed to converge");

      double diff2 = 0.0;
      for (size_t c = 0; c < cells; ++c) {
        const double dv = x[c] - u_iter[i][c];
        diff2 += dv * dv;
      }
      delta = std::max(delta, std::sqrt(diff2) * dx);
      u_next[i] = std::move(x);
    }

    u_iter = u_next;
    if (delta < tol) {
      advance_vr(u_iter, /*set_flags=*/false);
      PicardResult result;
      result.state.t = state.t + dt;
      result.state.U = u_iter;
      result.state.V = v_new;
      result.state.R = r_new;
      result.state.clogged = clog_new;
      result.iterations = iterations;
      for (int i = 0; i < N; ++i) check_finite(result.state.U[i], "species field");
      return result;
    }
  }
  throw NumericsError("picard iteration did not converge (time step too large?)");
}

}  // namespace clogsim
