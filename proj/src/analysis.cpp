#include "clogsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace clogsim {
namespace {

constexpr double kPi = std::numbers::pi;

size_t history_cells(const History& hist) {
  if (hist.u.empty() || hist.u.front().empty()) return 0;
  return hist.u.front().front().size();
}

// index of the last stored time <= t (times must be increasing)
size_t last_index_at(const History& hist, double t) {
  if (hist.times.empty()) throw std::invalid_argument("empty history");
  size_t k = 0;
  while (k + 1 < hist.times.size() && hist.times[k + 1] <= t + 1e-15) ++k;
  return k;
}

}  // namespace

void AnalysisBox::validate() const {
  if (!(M > 0.0)) throw std::invalid_argument("sup-norm budget must be positive");
  if (!(eps1 > 0.0 && eps2 > 0.0))
    throw std::invalid_argument("corridor margins must be positive");
  if (!(eps2 <= inf_r0))
    throw std::invalid_argument("eps2 must not exceed the smallest initial radius");
  if (!(2.0 * sup_r0 <= 1.0 - eps1))
    throw std::invalid_argument("initial radii leave no room below the clog radius");
  if (!(a_sum >= 0.0 && b >= 0.0))
    throw std::invalid_argument("aggregate rates must be nonnegative");
}

std::vector<double> v_closed_form(const History& hist, const std::vector<double>& v0,
                                  const ModelParams& params, double t) {
  const size_t cells = v0.size();
  const size_t last = last_index_at(hist, t);
  const double b = params.beta_sum();
  std::vector<double> v(cells);
  for (size_t c = 0; c < cells; ++c) {
    double integral = 0.0;
    for (size_t k = 0; k < last; ++k) {
      const double h = hist.times[k + 1] - hist.times[k];
      double f0 = 0.0, f1 = 0.0;
      for (int i = 0; i < params.N; ++i) {
        f0 += params.alpha_v[i] * hist.u[k][i][c];
        f1 += params.alpha_v[i] * hist.u[k + 1][i][c];
      }
      integral += 0.5 * h * (std::exp(b * hist.times[k]) * f0 +
                             std::exp(b * hist.times[k + 1]) * f1);
    }
    v[c] = std::exp(-b * t) * (v0[c] + integral);
  }
  return v;
}

std::vector<double> r_closed_form(const History& hist, const std::vector<double>& r0,
                                  const ModelParams& params, double t) {
  const size_t cells = r0.size();
  const size_t last = last_index_at(hist, t);
  const bool has_v = hist.v.size() == hist.times.size();
  std::vector<double> r(cells);
  for (size_t c = 0; c < cells; ++c) {
    double integral = 0.0;
    for (size_t k = 0; k < last; ++k) {
      const double h = hist.times[k + 1] - hist.times[k];
      double f0 = 0.0, f1 = 0.0;
      for (int i = 0; i < params.N; ++i) {
        f0 += params.a[i] * hist.u[k][i][c];
        f1 += params.a[i] * hist.u[k + 1][i][c];
      }
      if (has_v) {
        const double b = params.beta_sum();
        f0 -= b * hist.v[k][c];
        f1 -= b * hist.v[k + 1][c];
      }
      integral += 0.5 * h * (f0 + f1);
    }
    r[c] = r0[c] + 2.0 * kPi * params.alpha_r * integral;
  }
  return r;
}

double feasible_horizon(const AnalysisBox& box, double alpha_r) {
  box.validate();
  if (!(alpha_r > 0.0)) throw std::invalid_argument("alpha_r must be positive");
  if (box.a_sum <= 0.0 || box.b <= 0.0)
    return std::numeric_limits<double>::infinity();

  const double margin_clog = 1.0 - 2.0 * box.sup_r0 - box.eps1;
  const double coeff = box.b / (2.0 * kPi * alpha_r * box.a_sum);
  auto rhs = [&](double t) {
    const double margin_floor = box.inf_r0 - box.eps2 -
                                2.0 * kPi * alpha_r * box.b * t * box.sup_v0;
    return coeff * std::min(margin_clog, margin_floor);
  };
  auto lhs = [&](double t) { return box.M * std::expm1(box.b * t); };

  if (rhs(0.0) <= 0.0) {
    if (box.M > 0.0)
      throw std::invalid_argument("safety margins leave no feasible horizon");
    return 0.0;
  }

  double hi = 1.0;
  while (lhs(hi) < rhs(hi)) {
    hi *= 2.0;
    if (hi > 1e12) return std::numeric_limits<double>::infinity();
  }
  double lo = 0.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (lhs(mid) <= rhs(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double radius_lipschitz_check(const History& h1, const History& h2,
                              const std::vector<double>& r1,
                              const std::vector<double>& r2,
                              const ModelParams& params, double t) {
  if (h1.times != h2.times)
    throw std::invalid_argument("histories sampled at different times");
  const size_t cells = history_cells(h1);
  if (r1.size() != cells || r2.size() != cells || history_cells(h2) != cells)
    throw std::invalid_argument("field size mismatch in Lipschitz check");

  double a_max = 0.0;
  for (const double ai : params.a) a_max = std::max(a_max, ai);
  const double b = params.beta_sum();
  const double C = 2.0 * kPi * params.alpha_r * a_max * std::max(1.0, b);

  const size_t last = last_index_at(h1, t);
  double worst = 0.0;
  for (size_t c = 0; c < cells; ++c) {
    // outer integral of |du| and of the exponentially weighted inner integral
    double outer = 0.0;
    double inner_running = 0.0;  // int_0^s e^{b q} |du(q)| dq, trapezoid
    double outer_inner = 0.0;
    auto du_at = [&](size_t k) {
      double s = 0.0;
      for (int i = 0; i < params.N; ++i)
        s += std::abs(h1.u[k][i][c] - h2.u[k][i][c]);
      return s;
    };
    double prev_du = du_at(0);
    double prev_inner = 0.0;
    for (size_t k = 0; k < last; ++k) {
      const double h = h1.times[k + 1] - h1.times[k];
      const double next_du = du_at(k + 1);
      outer += 0.5 * h * (prev_du + next_du);
      inner_running += 0.5 * h * (std::exp(b * h1.times[k]) * prev_du +
                                  std::exp(b * h1.times[k + 1]) * next_du);
      const double next_inner = std::exp(-b * h1.times[k + 1]) * inner_running;
      outer_inner += 0.5 * h * (prev_inner + next_inner);
      prev_du = next_du;
      prev_inner = next_inner;
    }
    const double bound = C * (outer + outer_inner);
    const double diff = std::abs(r1[c] - r2[c]);
    if (bound <= 0.0) {
      if (diff > 1e-14) return std::numeric_limits<double>::infinity();
      continue;
    }
    worst = std::max(worst, diff / bound);
  }
  return worst;
}

DiagnosticsRecord monitor_step(const MacroState& state, const ModelParams& params,
                               const AnalysisBox& box, const TortuosityTable& table) {
  DiagnosticsRecord rec;
  rec.t = state.t;
  const int N = params.N;
  const size_t cells = state.R.size();
  rec.u_min.assign(N, std::numeric_limits<double>::infinity());
  rec.u_max.assign(N, -std::numeric_limits<double>::infinity());

  // Sup-norm envelope from the maximum-principle estimate: at concentration
  // level M the forcing of each species is bounded by a coagulation budget
  // (worst kernel entry, at most N-1 partners), an exchange release budget
  // (interface ratio at the top of the radius corridor times the dissolved
  // load), and an exchange uptake budget.
  double gamma_max = 0.0, a_max = 0.0, beta_max = 0.0;
  for (const auto& row : params.gamma)
    for (const double g : row) gamma_max = std::max(gamma_max, g);
  for (const double ai : params.a) a_max = std::max(a_max, ai);
  for (const double bi : params.beta) beta_max = std::max(beta_max, bi);
  const double corridor_top = 0.5 * (1.0 - box.eps1);
  const double ratio_max = length_area_ratio(corridor_top);
  const double t_now = std::max(state.t, 0.0);
  const double v_bound =
      box.b > 0.0 ? std::max(box.sup_v0, box.a_sum * box.M / box.b)
                  : box.sup_v0 + box.a_sum * box.M * t_now;
  const double coag = gamma_max * std::max(N - 1, 0) * box.M * box.M;
  const double f_plus = 0.5 * coag + ratio_max * beta_max * v_bound;
  const double f_minus = coag + ratio_max * a_max * box.M;
  const double tol = 1e-8;
  const double upper = 0.5 * box.M + t_now * f_plus + tol;
  const double lower = -t_now * f_minus - tol;

  double moment = 0.0;
  for (size_t c = 0; c < cells; ++c) {
    for (int i = 0; i < N; ++i) {
      const double u = state.U[i][c];
      rec.u_min[i] = std::min(rec.u_min[i], u);
      rec.u_max[i] = std::max(rec.u_max[i], u);
      moment += (i + 1) * u;
      if (u < lower || u > upper) rec.linf_violation = true;
    }
  }
  rec.moment_total = moment / static_cast<double>(cells);

  rec.r_min = std::numeric_limits<double>::infinity();
  rec.r_max = -rec.r_min;
  int clogged = 0;
  const double corridor_hi = 0.5 * (1.0 - box.eps1);
  for (size_t c = 0; c < cells; ++c) {
    const double r = state.R[c];
    rec.r_min = std::min(rec.r_min, r);
    rec.r_max = std::max(rec.r_max, r);
    if (state.clogged[c]) {
      ++clogged;
      continue;  // clogged cells leave the corridor by construction
    }
    if (state.t <= box.s_max && (r < box.eps2 - 1e-12 || r > corridor_hi + 1e-12))
      rec.radius_corridor_violation = true;
    const TortuosityTensor tau = interpolate(table, r);
    const double tr = tau.t11 + tau.t22;
    const double det = tau.t11 * tau.t22 - tau.t12 * tau.t21;
    if (!(tr > 0.0) || det < -1e-12) rec.spd_violation = true;
  }
  rec.clogged_fraction = static_cast<double>(clogged) / static_cast<double>(cells);
  return rec;
}

}  // namespace clogsim
