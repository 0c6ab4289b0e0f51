#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "clogsim/scenario.hpp"

using namespace clogsim;

namespace {

TortuosityTable test_table() {
  static const TortuosityTable table = build_table(0.05, 0.05, {32, 12});
  return table;
}

ScenarioConfig tiny_config() {
  ScenarioConfig c = preset_uniform();
  c.grid_points = 11;
  c.T = 0.01;
  c.snapshot_times = {0.01};
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("uniform preset carries the reference parameter set") {
  const ScenarioConfig c = preset_uniform();
  CHECK(c.params.N == 3);
  CHECK(c.params.d == std::vector<double>{0.3, 0.5, 0.99});
  CHECK(c.params.a == std::vector<double>{0.9, 0.5, 0.3});
  CHECK(c.params.beta == std::vector<double>{1.0, 1.0, 1.0});
  for (const auto& row : c.params.gamma)
    for (const double g : row) CHECK(g == 10.0);
  CHECK(c.params.b_r == 0.5);
  CHECK(c.params.t0 == 2.0);
  CHECK(c.grid_points == 41);
  CHECK(c.dt_ratio == 0.2);
  CHECK(c.T == 3.0);
  CHECK(c.inflow.type == "parabolic");
  CHECK(c.inflow.amplitude == 25.0);
  CHECK(c.r0.value == 0.1);
  CHECK_NOTHROW(c.validate());

  const BoundaryConfig bc = make_boundary(c);
  CHECK(bc.inflow_profile(0, 0.5) == doctest::Approx(25.0 * 0.25));
  CHECK(bc.inflow_profile(1, 0.5) == 0.0);
  CHECK(bc.inflow_profile(2, 0.5) == 0.0);
}

TEST_CASE("inflow shuts off after t0") {
  ScenarioConfig c = tiny_config();
  const TortuosityTable table = test_table();
  MacroState state = initial_state(c);
  state.t = 2.5;  // past t0 = 2
  GridSpec grid{c.grid_points, c.time_step(), c.T};
  const MacroState next =
      step_explicit(state, c.params, grid, table, make_boundary(c));
  for (const double u : next.U[0]) CHECK(u == 0.0);
}

TEST_CASE("bumps preset radius field") {
  const ScenarioConfig c = preset_bumps();
  CHECK_NOTHROW(c.validate());
  CHECK(c.dt_ratio == 0.25);
  const std::vector<double> r = initial_radius_field(c);
  const int n = c.grid_points;
  const double rmax = *std::max_element(r.begin(), r.end());
  // grid point (0.2, 0.2) carries the analytic peak 0.05 + 0.35 (+ ~e^-43)
  CHECK(rmax == doctest::Approx(0.40).epsilon(1e-9));
  CHECK(rmax < 0.5);
  for (const double v : r) CHECK(v >= 0.05);
  // center of the domain sits far from both bumps
  CHECK(r[(n / 2) * n + n / 2] == doctest::Approx(0.050014243).epsilon(1e-6));
}

TEST_CASE("config serialization round-trips") {
  for (const ScenarioConfig& c : {preset_uniform(), preset_bumps()}) {
    const ScenarioConfig back = parse_config(serialize_config(c));
    CHECK(config_equal(back, c));
  }
  ScenarioConfig custom = preset_uniform();
  custom.dt = 1e-4;
  custom.scheme = "picard";
  custom.monitor_policy = "abort";
  custom.emit_svg = true;
  custom.table_path = "some/table";
  CHECK(config_equal(parse_config(serialize_config(custom)), custom));
}

TEST_CASE("config validation rejects bad inputs") {
  ScenarioConfig c = preset_uniform();
  c.r0.value = 0.6;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = preset_uniform();
  c.snapshot_times = {5.0};  // beyond T
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = preset_uniform();
  c.scheme = "magic";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
  CHECK_THROWS_AS(load_config("no_such_config.json"), IoError);
}

TEST_CASE("field csv round-trip and header format") {
  const int n = 4;
  std::vector<double> field(n * n);
  for (int i = 0; i < n * n; ++i) field[i] = 0.1 * i;
  const std::string path = "field_roundtrip_test.csv";
  write_field_csv(path, field, n, 1.25, "u1");
  const std::string text = slurp(path);
  CHECK(text.rfind("# t=1.25 field=u1 n=4\n", 0) == 0);
  const FieldCsv back = read_field_csv(path);
  CHECK(back.n == n);
  CHECK(back.t == 1.25);
  CHECK(back.name == "u1");
  REQUIRE(back.values.size() == field.size());
  for (size_t i = 0; i < field.size(); ++i) CHECK(back.values[i] == field[i]);
  std::remove(path.c_str());
}

TEST_CASE("heatmap rendering") {
  const std::string path = "render_test.svg";
  // constant field: degenerate range, min=max annotated
  render_heatmap(std::vector<double>(9, 0.3), 3, "heat", path);
  const std::string constant = slurp(path);
  CHECK(constant.find("min=0.3") != std::string::npos);
  CHECK(constant.find("max=0.3") != std::string::npos);

  // one hot cell: exactly one cell at the top of the ramp
  std::vector<double> hot(9, 0.0);
  hot[4] = 1.0;
  render_heatmap(hot, 3, "heat", path);
  const std::string hot_svg = slurp(path);
  size_t top_count = 0, pos = 0;
  while ((pos = hot_svg.find("rgb(255,255,0)", pos)) != std::string::npos) {
    ++top_count;
    ++pos;
  }
  CHECK(top_count == 1);

  // determinism: same field, same bytes
  render_heatmap(hot, 3, "heat", path);
  CHECK(slurp(path) == hot_svg);

  std::vector<double> bad(9, 0.0);
  bad[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(render_heatmap(bad, 3, "heat", path), std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("bumps radius render shows two maxima at the bump centers") {
  const ScenarioConfig c = preset_bumps();
  const std::vector<double> r = initial_radius_field(c);
  const int n = c.grid_points;
  // locate the top two rendered intensities directly in the field
  std::vector<std::pair<double, int>> ranked(r.size());
  for (size_t i = 0; i < r.size(); ++i) ranked[i] = {r[i], static_cast<int>(i)};
  std::sort(ranked.rbegin(), ranked.rend());
  const double dx = 1.0 / (n - 1);
  auto coords = [&](int idx) {
    return std::pair<double, double>{(idx % n) * dx, (idx / n) * dx};
  };
  const auto [x1, y1] = coords(ranked[0].second);
  const auto [x2, y2] = coords(ranked[1].second);
  const bool near_a1 = std::hypot(x1 - 0.2, y1 - 0.2) < 0.05;
  const bool near_b1 = std::hypot(x1 - 0.8, y1 - 0.8) < 0.05;
  CHECK((near_a1 || near_b1));
  // the two peaks are far apart
  CHECK(std::hypot(x1 - x2, y1 - y2) > 0.5);
}

TEST_CASE("analysis box derived from a scenario") {
  const AnalysisBox box = make_analysis_box(preset_uniform());
  CHECK(box.sup_r0 == doctest::Approx(0.1));
  CHECK(box.inf_r0 == doctest::Approx(0.1));
  CHECK(box.a_sum == doctest::Approx(1.7));
  CHECK(box.b == doctest::Approx(3.0));
  CHECK(box.M >= 25.0 / 4.0 / 0.5);  // Robin equilibrium headroom
  CHECK_NOTHROW(box.validate());
}

TEST_CASE("run refuses an explicit time step above the guard") {
  ScenarioConfig c = tiny_config();
  const TortuosityTable table = test_table();
  GridSpec grid{c.grid_points, 0.0, c.T};
  const double guard = stability_guard(grid, c.params, table);
  c.dt = 10.0 * guard;
  CHECK_THROWS_AS(run_scenario(c, table, "out_guard_test"), NumericsError);
  std::filesystem::remove_all("out_guard_test");
}

TEST_CASE("short run writes snapshots and diagnostics deterministically") {
  const ScenarioConfig c = tiny_config();
  const TortuosityTable table = test_table();
  const RunSummary s1 = run_scenario(c, table, "out_det_a");
  const RunSummary s2 = run_scenario(c, table, "out_det_b");
  CHECK(s1.steps == s2.steps);
  CHECK(s1.steps == 5);  // T / (0.2 dx^2)
  for (const std::string name : {"u1_t0.01.csv", "u2_t0.01.csv", "u3_t0.01.csv",
                                 "v_t0.01.csv", "r_t0.01.csv", "diagnostics.csv"}) {
    CHECK(slurp("out_det_a/" + name) == slurp("out_det_b/" + name));
  }
  const FieldCsv u1 = read_field_csv("out_det_a/u1_t0.01.csv");
  CHECK(u1.n == c.grid_points);
  CHECK(u1.t == doctest::Approx(0.01));
  std::filesystem::remove_all("out_det_a");
  std::filesystem::remove_all("out_det_b");
}

TEST_CASE("picard scheme runs through the scenario loop") {
  ScenarioConfig c = tiny_config();
  c.scheme = "picard";
  const TortuosityTable table = test_table();
  const RunSummary s = run_scenario(c, table, "out_picard_test");
  CHECK(s.steps == 5);
  CHECK(s.max_picard_iterations >= 1);
  std::filesystem::remove_all("out_picard_test");
}
