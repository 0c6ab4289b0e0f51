#pragma once

#include <vector>

#include "clogsim/macro.hpp"

namespace clogsim {

/// Sup-norm budget and radius safety margins under which the radius field
/// provably stays inside the non-degenerate corridor [eps2, (1-eps1)/2].
struct AnalysisBox {
  double M = 1.0;        // sup-norm budget for u
  double eps1 = 0.1;
  double eps2 = 0.05;
  double s_max = 0.0;    // feasible horizon
  double sup_r0 = 0.25;
  double inf_r0 = 0.125;
  double sup_v0 = 0.0;
  double a_sum = 1.0;
  double b = 1.0;

  void validate() const;  // 0 < 2 eps2 <= 2 inf_r0, 2 sup_r0 <= 1 - eps1
};

/// Per-step invariant-monitor results and field statistics.
struct DiagnosticsRecord {
  double t = 0.0;
  std::vector<double> u_min, u_max;
  double r_min = 0.0, r_max = 0.0;
  double clogged_fraction = 0.0;
  double moment_total = 0.0;   // grid mean of sum_i i * u_i
  bool linf_violation = false;
  bool radius_corridor_violation = false;
  bool spd_violation = false;
  int picard_iterations = 0;
  double max_r_increment = 0.0;

  bool any_violation() const {
    return linf_violation || radius_corridor_violation || spd_violation;
  }
};

/// Time-sampled field history used by the closed-form solution operators.
struct History {
  std::vector<double> times;
  std::vector<std::vector<std::vector<double>>> u;  // time x species x cell
  std::vector<std::vector<double>> v;               // time x cell (may be empty)
};

/// v(t) = e^{-bt} (v0 + sum_i alpha_i int_0^t e^{b tau} u_i dtau),
/// trapezoidal in the stored history.
std::vector<double> v_closed_form(const History& hist, const std::vector<double>& v0,
                                  const ModelParams& params, double t);

/// r(t) = r0 + 2 pi alpha sum_i int_0^t (a_i u_i - beta_i v) dtau.
std::vector<double> r_closed_form(const History& hist, const std::vector<double>& r0,
                                  const ModelParams& params, double t);

/// Largest t with M(e^{bt}-1) <= (b / 2 pi alpha a) *
/// min{1 - 2 sup r0 - eps1, inf r0 - eps2 - 2 pi alpha b t sup v0};
/// +infinity when the condition never binds. Bisection to 1e-10.
double feasible_horizon(const AnalysisBox& box, double alpha_r);

/// Max pointwise ratio |r1 - r2| / ( C int (|du| + int e^{bs} |du|) );
/// 0 when both sides vanish. Must stay <= 1 + 1e-6.
double radius_lipschitz_check(const History& h1, const History& h2,
                              const std::vector<double>& r1,
                              const std::vector<double>& r2,
                              const ModelParams& params, double t);

/// Evaluates the sup-norm envelope, the radius corridor (while t <= s_max) and
/// positivity of the diffusion tensor; records violations without aborting.
DiagnosticsRecord monitor_step(const MacroState& state, const ModelParams& params,
                               const AnalysisBox& box, const TortuosityTable& table);

}  // namespace clogsim
