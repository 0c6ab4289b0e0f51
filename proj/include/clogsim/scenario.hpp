#pragma once

#include <string>
#include <vector>

#include "clogsim/analysis.hpp"
#include "clogsim/macro.hpp"

namespace clogsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inflow profile on the x2=0 edge.
/// "parabolic":         amplitude * x1 * (1 - x1) on `species`
/// "parabolic-literal": amplitude * x1 * (species - x1)  (the species index
///                      inside the profile, available for exploration)
/// "constant", "zero"
struct InflowSpec {
  std::string type = "zero";
  double amplitude = 0.0;
  int species = 1;  // 1-based

  bool operator==(const InflowSpec&) const = default;
};

struct InitialRadius {
  std::string type = "constant";  // constant | bumps | file
  double value = 0.1;
  double r_c = 0.05, r_1 = 0.35, c = 60.0;  // bumps parameters
  std::string file;

  bool operator==(const InitialRadius&) const = default;
};

struct ScenarioConfig {
  ModelParams params;
  int grid_points = 41;
  double dt_ratio = 0.2;  // dt = dt_ratio * dx^2 unless dt is set
  double dt = 0.0;
  double T = 3.0;
  InflowSpec inflow;
  std::vector<double> u0;  // constant initial concentrations per species
  double v0 = 0.0;
  InitialRadius r0;
  std::vector<double> snapshot_times;
  bool emit_svg = false;
  std::string scheme = "explicit";  // explicit | picard
  double picard_tol = 1e-9;
  int picard_max_iter = 50;
  std::string monitor_policy = "warn";  // warn | abort
  std::string table_path;

  double time_step() const;
  void validate() const;
};

ScenarioConfig preset_uniform();
ScenarioConfig preset_bumps();

std::string serialize_config(const ScenarioConfig& config);
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

bool config_equal(const ScenarioConfig& a, const ScenarioConfig& b);

std::vector<double> initial_radius_field(const ScenarioConfig& config);
BoundaryConfig make_boundary(const ScenarioConfig& config);
MacroState initial_state(const ScenarioConfig& config);
AnalysisBox make_analysis_box(const ScenarioConfig& config);

struct RunSummary {
  int steps = 0;
  double wall_seconds = 0.0;
  double max_radius = 0.0;
  double clogged_fraction = 0.0;
  int max_picard_iterations = 0;
  int monitor_violations = 0;
};

/// Time loop with snapshot and diagnostics output under out_dir.
RunSummary run_scenario(const ScenarioConfig& config, const TortuosityTable& table,
                        const std::string& out_dir);

/// Row-major field snapshot with header `# t=<time> field=<name> n=<points>`.
void write_field_csv(const std::string& path, const std::vector<double>& field,
                     int n, double t, const std::string& name);
struct FieldCsv {
  std::vector<double> values;
  int n = 0;
  double t = 0.0;
  std::string name;
};
FieldCsv read_field_csv(const std::string& path);

/// Deterministic SVG heatmap: one filled cell per grid value, linear color
/// ramp, min/max annotated. Same field, same bytes.
void render_heatmap(const std::vector<double>& field, int n,
                    const std::string& palette, const std::string& path);

}  // namespace clogsim
